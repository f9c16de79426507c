#include "qdefense/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace qdefense {

namespace {

constexpr int kSpaceVersion = 1;

nlohmann::json bits_to_indices(const Bitset& bits) {
    auto arr = nlohmann::json::array();
    for (auto i = bits.find_first(); i != Bitset::npos; i = bits.find_next(i)) arr.push_back(i);
    return arr;
}

Bitset bits_from_indices(const nlohmann::json& arr, std::size_t size, const char* what) {
    Bitset bits(size);
    for (const auto& j : arr) {
        const auto i = j.get<std::size_t>();
        if (i >= size) throw ParseError(std::string("state-space file: bad ") + what + " index");
        bits.set(i);
    }
    return bits;
}

std::string full_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string action_name(const ScenarioIndex& ix, std::uint32_t col) {
    return col == 0 ? "attack" : ix.defense_id(col - 1);
}

}  // namespace

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void save_state_space(const StateSpace& space, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["format"] = "qdefense-space";
    doc["version"] = kSpaceVersion;
    doc["options"] = {{"state_cap", space.options().state_cap},
                      {"ignore_attack_path", space.options().ignore_attack_path}};
    doc["scenario"] = nlohmann::json::parse(emit_scenario(space.scenario()));
    auto states = nlohmann::json::array();
    for (std::uint32_t i = 0; i < space.num_states(); ++i) {
        const NetworkState& st = space.state(i);
        states.push_back({{"compromised", bits_to_indices(st.compromised)},
                          {"links", bits_to_indices(st.links)},
                          {"vulns", bits_to_indices(st.vulns)},
                          {"defenses", bits_to_indices(st.defenses_remaining)},
                          {"cursor", st.path_cursor}});
    }
    doc["states"] = std::move(states);
    write_text_file(path, doc.dump(1) + "\n");
}

StateSpace load_state_space(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("state-space file: syntax error at byte " + std::to_string(e.byte));
    }
    if (!doc.is_object() || doc.value("format", "") != "qdefense-space")
        throw ParseError("state-space file: unrecognized format");
    if (doc.value("version", 0) != kSpaceVersion)
        throw ParseError("state-space file: unsupported version");

    Scenario scenario = parse_scenario(doc.at("scenario").dump());
    GenOptions options;
    options.state_cap = doc.at("options").value("state_cap", GenOptions{}.state_cap);
    options.ignore_attack_path = doc.at("options").value("ignore_attack_path", false);

    const ScenarioIndex ix(scenario);
    std::vector<NetworkState> states;
    for (const auto& js : doc.at("states")) {
        NetworkState st;
        st.compromised = bits_from_indices(js.at("compromised"), ix.num_hosts(), "host");
        st.links = bits_from_indices(js.at("links"), ix.num_links(), "link");
        st.vulns = bits_from_indices(js.at("vulns"), ix.num_pairs(), "vulnerability");
        st.defenses_remaining = bits_from_indices(js.at("defenses"), ix.num_defenses(), "defense");
        st.path_cursor = js.at("cursor").get<std::uint32_t>();
        states.push_back(std::move(st));
    }
    if (states.empty()) throw ParseError("state-space file: no states");
    return assemble_state_space(std::move(scenario), options, std::move(states));
}

std::string qtable_to_csv(const StateSpace& space, const QTable& q) {
    const ScenarioIndex& ix = space.index();
    std::string out = "state,action,q,update_count,feasible\n";
    for (std::uint32_t s = 0; s < q.num_states(); ++s) {
        std::vector<char> feasible(q.num_actions(), 0);
        for (std::uint16_t col : space.future_columns(s)) feasible[col] = 1;
        feasible[0] = space.attack_feasible(s) ? 1 : 0;
        for (std::uint32_t col = 0; col < q.num_actions(); ++col) {
            out += std::to_string(s);
            out += ',';
            out += action_name(ix, col);
            out += ',';
            out += full_double(q.value(s, col));
            out += ',';
            out += std::to_string(q.update_count(s, col));
            out += ',';
            out += feasible[col] ? '1' : '0';
            out += '\n';
        }
    }
    return out;
}

QTable qtable_from_csv(const StateSpace& space, std::string_view csv) {
    QTable q(space.num_states(), space.num_actions());
    const ScenarioIndex& ix = space.index();

    std::istringstream in{std::string(csv)};
    std::string line;
    if (!std::getline(in, line) || line != "state,action,q,update_count,feasible")
        throw ParseError("q-table file: unrecognized header");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string state_s, action_s, q_s, count_s, feasible_s;
        if (!std::getline(fields, state_s, ',') || !std::getline(fields, action_s, ',') ||
            !std::getline(fields, q_s, ',') || !std::getline(fields, count_s, ',') ||
            !std::getline(fields, feasible_s))
            throw ParseError("q-table file: malformed line " + std::to_string(lineno));
        const auto s = static_cast<std::uint32_t>(std::stoul(state_s));
        if (s >= q.num_states())
            throw ParseError("q-table file: state out of range on line " + std::to_string(lineno));
        const std::uint32_t col =
            action_s == "attack" ? 0u : ActionId::defense(ix.defense_index(action_s)).column();
        q.set(s, col, std::stod(q_s), static_cast<std::uint32_t>(std::stoul(count_s)));
    }
    return q;
}

}  // namespace qdefense
