"""Network defense planning: MDP state enumeration + tabular Q-learning.

The heavy lifting lives in the `_qdefense` extension module; this package
re-exports its surface.
"""

try:
    from ._qdefense import *  # noqa: F401,F403
    from ._qdefense import __doc__ as _core_doc
except ImportError:  # in-tree test runs import the module from the build dir
    from _qdefense import *  # noqa: F401,F403
    from _qdefense import __doc__ as _core_doc

__all__ = [
    "Scenario",
    "StateSpace",
    "QTable",
    "DefensePlan",
    "ScenarioError",
    "ResourceLimitError",
    "parse_scenario",
    "load_scenario",
    "validate_scenario",
    "emit_scenario",
    "generate",
    "load_state_space",
    "train",
    "value_iteration",
    "extract_plan",
    "solve",
    "no_defense_baseline",
    "improvement_percentage",
    "qtable_to_csv",
    "dump_qtable_text",
    "synth_scenario",
]
