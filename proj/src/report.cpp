#include "abmc/report.hpp"

#include <sstream>

namespace abmc {

namespace {

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string o = "\"";
    for (char c : s) o += c == '"' ? std::string("\"\"") : std::string(1, c);
    return o + "\"";
}

std::string state_str(const SafetyProblem &p, const std::vector<std::int64_t> &s) {
    std::string o;
    for (std::size_t j = 0; j < s.size(); ++j) o += (j ? " " : "") + p.pre_vars[j].name + "=" + std::to_string(s[j]);
    return o;
}

std::string step_label(const CexStep &st) {
    std::string s = st.transition.name();
    if (st.counter_value) s += " n=" + std::to_string(*st.counter_value);
    return s;
}

nlohmann::json cex_json(const Counterexample &c) {
    nlohmann::json states = nlohmann::json::array();
    for (const auto &s : c.states) states.push_back(s);
    nlohmann::json steps = nlohmann::json::array();
    for (const auto &st : c.steps) {
        nlohmann::json j{{"transition", st.transition.name()},
                         {"learned", st.transition.is_learned()},
                         {"formula", st.transition.str()}};
        if (st.counter_value) j["n"] = *st.counter_value;
        steps.push_back(std::move(j));
    }
    return {{"states", std::move(states)}, {"steps", std::move(steps)}};
}

}  // namespace

std::string RunResult::csv_header() { return "file,engine,verdict,bound,learned,wall_ms,cex_len"; }

std::string RunResult::csv_row() const {
    std::ostringstream os;
    os << csv_field(file) << ',' << engine << ',' << verdict << ',' << (bound ? std::to_string(*bound) : "") << ','
       << learned << ',' << wall_ms << ',' << (cex_len ? std::to_string(*cex_len) : "");
    return os.str();
}

nlohmann::json RunResult::to_json() const {
    nlohmann::json j{{"file", file}, {"engine", engine}, {"verdict", verdict}, {"learned", learned}, {"wall_ms", wall_ms}};
    j["bound"] = bound ? nlohmann::json(*bound) : nlohmann::json(nullptr);
    j["cex_len"] = cex_len ? nlohmann::json(*cex_len) : nlohmann::json(nullptr);
    if (!reason.empty()) j["reason"] = reason;
    if (!detail.empty()) j["detail"] = detail;
    return j;
}

RunResult RunResult::from_json(const nlohmann::json &j) {
    RunResult r;
    r.file = j.at("file").get<std::string>();
    r.engine = j.at("engine").get<std::string>();
    r.verdict = j.at("verdict").get<std::string>();
    if (!j.at("bound").is_null()) r.bound = j.at("bound").get<unsigned>();
    r.learned = j.at("learned").get<unsigned>();
    r.wall_ms = j.at("wall_ms").get<long long>();
    if (!j.at("cex_len").is_null()) r.cex_len = j.at("cex_len").get<std::size_t>();
    r.reason = j.value("reason", "");
    r.detail = j.value("detail", "");
    return r;
}

RunResult make_result(const std::string &file, EngineKind kind, const Verdict &v) {
    RunResult r;
    r.file = file;
    r.engine = to_string(kind);
    r.verdict = v.str();
    if (!v.unknown() || v.reason == UnknownReason::BoundExhausted) r.bound = v.bound;
    r.learned = v.learned;
    r.wall_ms = v.wall.count();
    if (v.expanded) r.cex_len = v.expanded->steps.size();
    if (v.unknown()) r.reason = to_string(v.reason);
    r.detail = v.detail;
    return r;
}

nlohmann::json verdict_json(const RunResult &r, const Verdict &v, const SafetyProblem &p) {
    nlohmann::json j = r.to_json();
    nlohmann::json vars = nlohmann::json::array();
    for (const auto &x : p.pre_vars) vars.push_back(x.name);
    j["vars"] = std::move(vars);
    if (v.cex) j["cex"] = cex_json(*v.cex);
    if (v.expanded) j["expanded"] = cex_json(*v.expanded);
    return j;
}

std::string verdict_text(const RunResult &r, const Verdict &v, const SafetyProblem &p) {
    std::ostringstream os;
    os << "verdict: " << r.verdict;
    if (v.unknown()) os << " (" << r.reason << ")";
    os << "\nengine: " << r.engine << "\n";
    if (r.bound) os << "bound: " << *r.bound << "\n";
    os << "learned: " << r.learned << "\nwall_ms: " << r.wall_ms << "\n";
    if (!r.detail.empty()) os << "detail: " << r.detail << "\n";
    if (v.cex) {
        const Counterexample &c = *v.cex;
        os << "counterexample (compressed, " << c.steps.size() << " steps):\n";
        for (std::size_t i = 0; i < c.states.size(); ++i) {
            os << "  [" << i << "] " << state_str(p, c.states[i]) << "\n";
            if (i < c.steps.size()) os << "      -> " << step_label(c.steps[i]) << "\n";
        }
        std::set<Transition> used;
        for (const auto &st : c.steps) used.insert(st.transition);
        for (const auto &t : used) os << "  " << t.name() << ": " << t.str() << "\n";
    }
    if (v.expanded) {
        const Counterexample &c = *v.expanded;
        os << "counterexample (expanded, " << c.steps.size() << " steps, validated):\n";
        for (std::size_t i = 0; i < c.states.size(); ++i) {
            os << "  [" << i << "] " << state_str(p, c.states[i]);
            if (i < c.steps.size()) os << "  -> " << c.steps[i].transition.name();
            os << "\n";
        }
    }
    return os.str();
}

}  // namespace abmc
