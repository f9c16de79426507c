#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "qdefense/qlearning.hpp"
#include "qdefense/state_space.hpp"

namespace qdefense {

/// Versioned state-space artifact (JSON: embedded scenario, generation
/// options, and the state list in discovery order). Transitions are a pure
/// function of the states and are rebuilt on load.
void save_state_space(const StateSpace& space, const std::filesystem::path& path);
StateSpace load_state_space(const std::filesystem::path& path);

/// Q-table artifact: one row per cell with columns
/// state,action,q,update_count,feasible. Deterministic formatting, so equal
/// tables serialize byte-identically.
std::string qtable_to_csv(const StateSpace& space, const QTable& q);
QTable qtable_from_csv(const StateSpace& space, std::string_view csv);

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace qdefense
