#include "qdefense/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace qdefense {

using ordered_json = nlohmann::ordered_json;

const Host* Scenario::find_host(std::string_view id) const {
    for (const auto& h : hosts)
        if (h.id == id) return &h;
    return nullptr;
}

const Vulnerability* Scenario::find_vuln(std::string_view host_id, std::string_view vuln_id) const {
    const Host* h = find_host(host_id);
    if (!h) return nullptr;
    for (const auto& v : h->vulns)
        if (v.id == vuln_id) return &v;
    return nullptr;
}

bool Scenario::has_link(std::string_view from, std::string_view to) const {
    return std::any_of(links.begin(), links.end(),
                       [&](const Link& l) { return l.from == from && l.to == to; });
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ParseError(msg); }

void expect_keys(const ordered_json& obj, std::initializer_list<std::string_view> allowed,
                 const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            fail("unknown key '" + it.key() + "' in " + where);
    }
}

std::string get_string(const ordered_json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) fail("missing '" + std::string(key) + "' in " + where);
    if (!it->is_string()) fail("'" + std::string(key) + "' must be a string in " + where);
    return it->get<std::string>();
}

double get_number(const ordered_json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) fail("missing '" + std::string(key) + "' in " + where);
    if (!it->is_number()) fail("'" + std::string(key) + "' must be a number in " + where);
    return it->get<double>();
}

Vulnerability parse_vuln(const ordered_json& j, const std::string& where) {
    if (!j.is_object()) fail("vulnerability entries must be objects in " + where);
    expect_keys(j, {"id", "cvss", "patch_cost", "patchable"}, where);
    Vulnerability v;
    v.id = get_string(j, "id", where);
    v.cvss = get_number(j, "cvss", where);
    v.patch_cost = get_number(j, "patch_cost", where);
    if (auto it = j.find("patchable"); it != j.end()) {
        if (!it->is_boolean()) fail("'patchable' must be a boolean in " + where);
        v.patchable = it->get<bool>();
    }
    return v;
}

DefenseSpec parse_defense(const ordered_json& j) {
    if (!j.is_object()) fail("defense entries must be objects");
    DefenseSpec d;
    d.id = j.contains("id") ? get_string(j, "id", "defense") : std::string();
    const std::string where = "defense '" + d.id + "'";
    if (d.id.empty()) fail("missing 'id' in defense");
    expect_keys(j, {"id", "kind", "protected", "from", "target", "vuln", "cost"}, where);
    const std::string kind = get_string(j, "kind", where);
    if (kind == "block") {
        d.kind = DefenseKind::Block;
        d.protected_host = get_string(j, "protected", where);
        d.from = get_string(j, "from", where);
    } else if (kind == "patch") {
        d.kind = DefenseKind::Patch;
        d.target = get_string(j, "target", where);
        d.vuln = get_string(j, "vuln", where);
    } else {
        fail("unknown defense kind '" + kind + "' in " + where + " (expected 'block' or 'patch')");
    }
    if (j.contains("cost")) d.cost = get_number(j, "cost", where);
    return d;
}

void append(std::vector<std::string>& out, std::string msg) { out.push_back(std::move(msg)); }

}  // namespace

Scenario parse_scenario(std::string_view text) {
    Scenario s = parse_scenario_unchecked(text);
    if (auto violations = validate_scenario(s); !violations.empty()) {
        std::string msg = violations.front();
        for (std::size_t i = 1; i < violations.size(); ++i) msg += "; " + violations[i];
        fail(msg);
    }
    return s;
}

Scenario parse_scenario_unchecked(std::string_view text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail("syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    if (!doc.is_object()) fail("scenario document must be a JSON object");
    expect_keys(doc, {"hosts", "links", "defenses", "attack_path", "rewards", "learning"},
                "scenario");

    Scenario s;

    auto hosts_it = doc.find("hosts");
    if (hosts_it == doc.end() || !hosts_it->is_array())
        fail("scenario must declare ≥1 host ('hosts' array missing)");
    for (const auto& jh : *hosts_it) {
        if (!jh.is_object()) fail("host entries must be objects");
        Host h;
        h.id = get_string(jh, "id", "host");
        expect_keys(jh, {"id", "vulns"}, "host '" + h.id + "'");
        if (auto it = jh.find("vulns"); it != jh.end()) {
            if (!it->is_array()) fail("'vulns' must be an array in host '" + h.id + "'");
            for (const auto& jv : *it) h.vulns.push_back(parse_vuln(jv, "host '" + h.id + "'"));
        }
        s.hosts.push_back(std::move(h));
    }

    if (auto it = doc.find("links"); it != doc.end()) {
        if (!it->is_array()) fail("'links' must be an array");
        for (const auto& jl : *it) {
            if (!jl.is_array() || jl.size() != 2 || !jl[0].is_string() || !jl[1].is_string())
                fail("links must be [from, to] string pairs");
            s.links.push_back(Link{jl[0].get<std::string>(), jl[1].get<std::string>()});
        }
    }

    if (auto it = doc.find("defenses"); it != doc.end()) {
        if (!it->is_array()) fail("'defenses' must be an array");
        for (const auto& jd : *it) s.defenses.push_back(parse_defense(jd));
    }

    if (auto it = doc.find("attack_path"); it != doc.end()) {
        if (!it->is_array()) fail("'attack_path' must be an array of host ids");
        for (const auto& je : *it) {
            if (!je.is_string()) fail("'attack_path' must be an array of host ids");
            s.attack_path.push_back(je.get<std::string>());
        }
    }

    if (auto it = doc.find("rewards"); it != doc.end()) {
        if (!it->is_object()) fail("'rewards' must be an object");
        expect_keys(*it,
                    {"attack_weight", "attack_success_rate", "defense_success_rate",
                     "attack_fail_reward", "defense_fail_reward", "attack_resolution"},
                    "rewards");
        RewardParams& r = s.rewards;
        if (it->contains("attack_weight")) r.attack_weight = get_number(*it, "attack_weight", "rewards");
        if (it->contains("attack_success_rate"))
            r.attack_success_rate = get_number(*it, "attack_success_rate", "rewards");
        if (it->contains("defense_success_rate"))
            r.defense_success_rate = get_number(*it, "defense_success_rate", "rewards");
        if (it->contains("attack_fail_reward"))
            r.attack_fail_reward = get_number(*it, "attack_fail_reward", "rewards");
        if (it->contains("defense_fail_reward"))
            r.defense_fail_reward = get_number(*it, "defense_fail_reward", "rewards");
        if (it->contains("attack_resolution")) {
            const std::string mode = get_string(*it, "attack_resolution", "rewards");
            if (mode == "uniform")
                r.attack_resolution = AttackResolution::Uniform;
            else if (mode == "max_cvss")
                r.attack_resolution = AttackResolution::MaxCvss;
            else
                fail("unknown attack_resolution '" + mode + "' (expected 'uniform' or 'max_cvss')");
        }
    }

    if (auto it = doc.find("learning"); it != doc.end()) {
        if (!it->is_object()) fail("'learning' must be an object");
        expect_keys(*it, {"gamma", "alpha", "epsilon", "epochs", "seed"}, "learning");
        LearningParams& l = s.learning;
        if (it->contains("gamma")) l.gamma = get_number(*it, "gamma", "learning");
        if (it->contains("alpha")) l.alpha = get_number(*it, "alpha", "learning");
        if (it->contains("epsilon")) l.epsilon = get_number(*it, "epsilon", "learning");
        if (it->contains("epochs")) {
            const double e = get_number(*it, "epochs", "learning");
            if (e < 0 || e != std::floor(e)) fail("'epochs' must be a non-negative integer");
            l.epochs = static_cast<std::uint64_t>(e);
        }
        if (it->contains("seed")) {
            const auto& js = (*it)["seed"];
            if (!js.is_number_integer() && !js.is_number_unsigned())
                fail("'seed' must be an integer");
            l.seed = js.get<std::uint64_t>();
        }
    }

    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scenario file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string emit_scenario(const Scenario& s) {
    ordered_json doc;
    doc["hosts"] = ordered_json::array();
    for (const auto& h : s.hosts) {
        ordered_json jh;
        jh["id"] = h.id;
        if (!h.vulns.empty()) {
            jh["vulns"] = ordered_json::array();
            for (const auto& v : h.vulns) {
                ordered_json jv;
                jv["id"] = v.id;
                jv["cvss"] = v.cvss;
                jv["patch_cost"] = v.patch_cost;
                if (!v.patchable) jv["patchable"] = false;
                jh["vulns"].push_back(std::move(jv));
            }
        }
        doc["hosts"].push_back(std::move(jh));
    }
    doc["links"] = ordered_json::array();
    for (const auto& l : s.links) doc["links"].push_back(ordered_json::array({l.from, l.to}));
    doc["defenses"] = ordered_json::array();
    for (const auto& d : s.defenses) {
        ordered_json jd;
        jd["id"] = d.id;
        if (d.kind == DefenseKind::Block) {
            jd["kind"] = "block";
            jd["protected"] = d.protected_host;
            jd["from"] = d.from;
        } else {
            jd["kind"] = "patch";
            jd["target"] = d.target;
            jd["vuln"] = d.vuln;
        }
        if (d.cost) jd["cost"] = *d.cost;
        doc["defenses"].push_back(std::move(jd));
    }
    if (!s.attack_path.empty()) doc["attack_path"] = s.attack_path;

    ordered_json jr;
    const RewardParams def_r;
    if (s.rewards.attack_weight != def_r.attack_weight) jr["attack_weight"] = s.rewards.attack_weight;
    if (s.rewards.attack_success_rate != def_r.attack_success_rate)
        jr["attack_success_rate"] = s.rewards.attack_success_rate;
    if (s.rewards.defense_success_rate != def_r.defense_success_rate)
        jr["defense_success_rate"] = s.rewards.defense_success_rate;
    if (s.rewards.attack_fail_reward != def_r.attack_fail_reward)
        jr["attack_fail_reward"] = s.rewards.attack_fail_reward;
    if (s.rewards.defense_fail_reward != def_r.defense_fail_reward)
        jr["defense_fail_reward"] = s.rewards.defense_fail_reward;
    if (s.rewards.attack_resolution == AttackResolution::MaxCvss) jr["attack_resolution"] = "max_cvss";
    if (!jr.empty()) doc["rewards"] = std::move(jr);

    ordered_json jl;
    jl["gamma"] = s.learning.gamma;
    jl["alpha"] = s.learning.alpha;
    jl["epsilon"] = s.learning.epsilon;
    jl["epochs"] = s.learning.epochs;
    jl["seed"] = s.learning.seed;
    doc["learning"] = std::move(jl);

    return doc.dump(2) + "\n";
}

std::vector<std::string> validate_scenario(const Scenario& s) {
    std::vector<std::string> out;

    if (s.hosts.empty()) append(out, "scenario must declare ≥1 host");

    std::unordered_set<std::string> host_ids;
    for (const auto& h : s.hosts) {
        if (h.id.empty()) append(out, "host with empty id");
        if (h.id == kInternet) append(out, "host id 'internet' is reserved");
        if (!host_ids.insert(h.id).second) append(out, "duplicate host id '" + h.id + "'");
        std::unordered_set<std::string> vuln_ids;
        for (const auto& v : h.vulns) {
            const std::string where = "vulnerability '" + v.id + "' on host '" + h.id + "'";
            if (v.id.empty()) append(out, "vulnerability with empty id on host '" + h.id + "'");
            if (!vuln_ids.insert(v.id).second)
                append(out, "duplicate vulnerability id '" + v.id + "' on host '" + h.id + "'");
            if (!(v.cvss >= 0.0 && v.cvss <= 10.0)) append(out, where + ": cvss out of [0,10]");
            if (!(v.patch_cost >= 0.0 && v.patch_cost <= 10.0))
                append(out, where + ": patch_cost out of [0,10]");
        }
    }

    auto known_host = [&](const std::string& id) { return host_ids.count(id) > 0; };

    std::set<std::pair<std::string, std::string>> seen_links;
    for (const auto& l : s.links) {
        if (l.from != kInternet && !known_host(l.from))
            append(out, "link [" + l.from + ", " + l.to + "]: unknown host '" + l.from + "'");
        if (l.to == kInternet)
            append(out, "link [" + l.from + ", " + l.to + "]: links into 'internet' are not allowed");
        else if (!known_host(l.to))
            append(out, "link [" + l.from + ", " + l.to + "]: unknown host '" + l.to + "'");
        if (!seen_links.insert({l.from, l.to}).second)
            append(out, "duplicate link [" + l.from + ", " + l.to + "]");
    }

    std::unordered_set<std::string> defense_ids;
    for (const auto& d : s.defenses) {
        const std::string where = "defense '" + d.id + "'";
        if (d.id.empty()) append(out, "defense with empty id");
        if (!defense_ids.insert(d.id).second) append(out, "duplicate defense id '" + d.id + "'");
        if (d.kind == DefenseKind::Block) {
            if (d.protected_host == kInternet) {
                append(out, where + ": cannot protect 'internet'");
            } else if (!known_host(d.protected_host)) {
                append(out, where + ": unknown host '" + d.protected_host + "'");
            } else if (d.from != kInternet && !known_host(d.from)) {
                append(out, where + ": unknown host '" + d.from + "'");
            } else if (!s.has_link(d.from, d.protected_host)) {
                append(out, where + ": block references missing link " + d.from + "->" +
                                d.protected_host);
            }
        } else {
            if (!known_host(d.target)) {
                append(out, where + ": unknown host '" + d.target + "'");
            } else {
                const Vulnerability* v = s.find_vuln(d.target, d.vuln);
                if (!v)
                    append(out, where + ": unknown vulnerability '" + d.vuln + "' on host '" +
                                    d.target + "'");
                else if (!v->patchable)
                    append(out, where + ": vulnerability '" + d.vuln + "' is not patchable");
            }
            if (d.cost) append(out, where + ": cost override is only valid for block defenses");
        }
        if (d.cost && !(*d.cost >= 0.0 && *d.cost <= 10.0))
            append(out, where + ": cost out of [0,10]");
    }

    if (!s.attack_path.empty()) {
        if (s.attack_path.front() != kInternet)
            append(out, "attack path must start at 'internet'");
        std::unordered_set<std::string> seen;
        for (std::size_t i = 1; i < s.attack_path.size(); ++i) {
            const std::string& id = s.attack_path[i];
            if (!known_host(id)) append(out, "attack path: unknown host '" + id + "'");
            if (!seen.insert(id).second) append(out, "attack path: host '" + id + "' repeats");
            if (!s.has_link(s.attack_path[i - 1], id))
                append(out, "attack path: path edge missing " + s.attack_path[i - 1] + "->" + id);
        }
    }

    const RewardParams& r = s.rewards;
    if (!(r.attack_weight >= 0.0)) append(out, "rewards: attack_weight must be ≥ 0");
    if (!(r.attack_success_rate >= 0.0 && r.attack_success_rate <= 1.0))
        append(out, "rewards: attack_success_rate out of [0,1]");
    if (!(r.defense_success_rate >= 0.0 && r.defense_success_rate <= 1.0))
        append(out, "rewards: defense_success_rate out of [0,1]");
    if (!(r.attack_fail_reward <= 0.0)) append(out, "rewards: attack_fail_reward must be ≤ 0");
    if (!(r.defense_fail_reward <= 0.0)) append(out, "rewards: defense_fail_reward must be ≤ 0");

    const LearningParams& l = s.learning;
    if (!(l.gamma > 0.0 && l.gamma < 1.0)) append(out, "learning: gamma out of (0,1)");
    if (!(l.alpha > 0.0 && l.alpha <= 1.0)) append(out, "learning: alpha out of (0,1]");
    if (!(l.epsilon >= 0.0 && l.epsilon <= 1.0)) append(out, "learning: epsilon out of [0,1]");
    if (l.epochs < 1) append(out, "learning: epochs must be ≥ 1");

    return out;
}

double defense_cost(const Scenario& s, const DefenseSpec& d) {
    if (d.kind == DefenseKind::Patch) {
        const Vulnerability* v = s.find_vuln(d.target, d.vuln);
        return v ? v->patch_cost : 0.0;
    }
    if (d.cost) return *d.cost;
    double max_cvss = 0.0;
    if (const Host* h = s.find_host(d.protected_host))
        for (const auto& v : h->vulns) max_cvss = std::max(max_cvss, v.cvss);
    return max_cvss;
}

double attack_penalty(const Scenario& s, const Vulnerability& v) {
    return v.cvss * s.rewards.attack_weight;
}

}  // namespace qdefense
