#pragma once

// BMC, ABMC and ABMC with blocking clauses, plus counterexample handling.

#include "abmc/accel.hpp"
#include "abmc/problem.hpp"
#include "abmc/smt.hpp"
#include "abmc/trace.hpp"

#include <chrono>

namespace abmc {

enum class EngineKind : std::uint8_t { Bmc, Abmc, AbmcBlocking };

/// "bmc", "abmc", "abmc-b".
const char *to_string(EngineKind k);
std::optional<EngineKind> parse_engine(const std::string &s);

struct EngineConfig {
    EngineKind kind = EngineKind::AbmcBlocking;
    unsigned max_bound = 1000;
    std::optional<std::chrono::milliseconds> wall_timeout;
    smt::SolverConfig solver;
    bool validate_cex = true;
};

/// Raised when a counterexample fails to replay on the original problem.
/// This indicates a soundness bug and is never downgraded to a warning.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CexStep {
    Transition transition;
    std::optional<std::int64_t> counter_value;  ///< learned steps only
    Valuation aux;                              ///< unindexed auxiliaries of the step
};

struct Counterexample {
    std::vector<std::vector<std::int64_t>> states;  ///< one d-vector per step boundary
    std::vector<CexStep> steps;                     ///< steps.size() == states.size() - 1
    Valuation init_aux;
    Valuation err_aux;

    [[nodiscard]] bool concrete() const;
};

enum class UnknownReason : std::uint8_t { BoundExhausted, Timeout, SolverUnknown };
const char *to_string(UnknownReason r);

struct Verdict {
    enum class Kind : std::uint8_t { Safe, Unsafe, Unknown };
    Kind kind = Kind::Unknown;
    /// Safe: the b whose extension check was unsat. Unsafe: length of the
    /// compressed counterexample. Unknown: the bound reached.
    unsigned bound = 0;
    UnknownReason reason = UnknownReason::SolverUnknown;
    std::string detail;
    std::optional<Counterexample> cex;
    std::optional<Counterexample> expanded;
    unsigned learned = 0;
    std::chrono::milliseconds wall{0};
    DepGraph graph;

    [[nodiscard]] bool safe() const { return kind == Kind::Safe; }
    [[nodiscard]] bool unsafe() const { return kind == Kind::Unsafe; }
    [[nodiscard]] bool unknown() const { return kind == Kind::Unknown; }
    [[nodiscard]] std::string str() const;  ///< "safe", "unsafe", "unknown"
};

/// One completed iteration of the main loop, reported after the step
/// formula for bound b has been chosen.
struct IterationEvent {
    unsigned b;
    const Trace &trace;
    const std::vector<DepGraph::Edge> &new_edges;
    const StepFormula &step;
    std::optional<std::vector<Transition>> suffix;  ///< cyclic suffix chosen, if any
};

struct EngineHooks {
    smt::SolverFactory main;     ///< default: a process solver from the config
    smt::SolverFactory scratch;  ///< acceleration certificates and expansion
    std::function<void(const IterationEvent &)> on_iteration;
};

Verdict run_engine(const SafetyProblem &p, const EngineConfig &cfg, const EngineHooks &hooks = {});
Verdict run_bmc(const SafetyProblem &p, EngineConfig cfg, const EngineHooks &hooks = {});
Verdict run_abmc(const SafetyProblem &p, EngineConfig cfg, const EngineHooks &hooks = {});
Verdict run_abmc_blocking(const SafetyProblem &p, EngineConfig cfg, const EngineHooks &hooks = {});

/// beta1 forbids unrolling `cycle` at step b, beta2 forbids unrolling it
/// right after taking the learned transition with label `id` at step b.
std::pair<Formula, Formula> make_blocking_clauses(std::span<const Transition> cycle, unsigned id, unsigned b);

/// Reads the counterexample of length b off a model of the error check.
Counterexample extract_counterexample(const Valuation &sigma, std::span<const StepFormula> steps,
                                      const SafetyProblem &p, unsigned b);

/// Replaces every learned step by iterations of its cycle and replays the
/// result on p literal by literal. Throws ValidationError.
Counterexample expand_and_validate(const Counterexample &cex, const SafetyProblem &p, const smt::SolverFactory &scratch);

/// Replays a concrete counterexample on p. Throws ValidationError.
void validate_concrete(const Counterexample &cex, const SafetyProblem &p);

}  // namespace abmc
