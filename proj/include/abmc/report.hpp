#pragma once

// Result records shared by `check` and `bench`.

#include "abmc/engine.hpp"

#include "json.hpp"

namespace abmc {

struct RunResult {
    std::string file;
    std::string engine;
    std::string verdict;           ///< safe | unsafe | unknown
    std::optional<unsigned> bound; ///< absent for unknown unless the bound ran out
    unsigned learned = 0;
    long long wall_ms = 0;
    std::optional<std::size_t> cex_len;  ///< expanded length
    std::string reason;                  ///< unknown only
    std::string detail;

    static std::string csv_header();
    [[nodiscard]] std::string csv_row() const;
    [[nodiscard]] nlohmann::json to_json() const;
    static RunResult from_json(const nlohmann::json &j);
};

RunResult make_result(const std::string &file, EngineKind kind, const Verdict &v);

/// Result plus counterexample arrays.
nlohmann::json verdict_json(const RunResult &r, const Verdict &v, const SafetyProblem &p);

/// Human-readable report with compressed and expanded counterexamples.
std::string verdict_text(const RunResult &r, const Verdict &v, const SafetyProblem &p);

}  // namespace abmc
