#pragma once

// Shared test fixtures: solver factories, scripted solvers, random problem
// generators and explicit-state oracles.

#include "abmc/engine.hpp"
#include "abmc/frontend.hpp"

#include <random>

namespace abmc::test {

smt::SolverConfig z3_config();
smt::SolverFactory z3_factory();
std::unique_ptr<smt::Solver> z3();

/// Small helpers for building terms and literals in tests.
inline Var pre(const std::string &n) { return Var::pre(n); }
inline Var post(const std::string &n) { return Var::post(n); }
inline IntTerm t(const Var &v) { return IntTerm::of(v); }
inline Literal lit(const IntTerm &a, RelOp op, const IntTerm &b) { return Literal::make(a, op, b); }
inline Formula f(const Literal &l) { return Formula::lit(l); }

/// True iff a and b are equivalent (both implications unsat) over indexed
/// copies at step 0.
bool smt_equivalent(const Formula &a, const Formula &b);
/// True iff a /\ not b is unsat.
bool smt_implies(const Formula &a, const Formula &b);
/// As smt_equivalent, for formulas that are already indexed.
bool smt_equivalent_indexed(const Formula &a, const Formula &b);

/// Solver that answers from a callback; records everything asserted.
class ScriptedSolver : public smt::Solver {
public:
    struct Call {
        enum class Kind { Assert, Push, Pop, Check } kind;
        unsigned depth;
        Formula formula;
    };
    std::function<smt::SatResult(const ScriptedSolver &)> on_check;
    std::function<Valuation(const std::set<Var> &)> on_model;
    std::vector<Call> log;

    void assert_formula(const Formula &f) override { log.push_back({Call::Kind::Assert, depth_, f}); }
    void push() override {
        log.push_back({Call::Kind::Push, depth_, {}});
        ++depth_;
    }
    void pop() override {
        if (depth_ == 0) throw smt::SolverError("pop at depth 0");
        log.push_back({Call::Kind::Pop, depth_, {}});
        --depth_;
    }
    smt::SatResult check(std::optional<std::chrono::milliseconds> = std::nullopt) override {
        log.push_back({Call::Kind::Check, depth_, {}});
        return on_check ? on_check(*this) : smt::SatResult::unknown("scripted");
    }
    Valuation get_model(const std::set<Var> &vars) override {
        Valuation m = on_model ? on_model(vars) : Valuation{};
        for (const auto &v : vars) m.try_emplace(v, 0);
        return m;
    }
    [[nodiscard]] unsigned depth() const override { return depth_; }

private:
    unsigned depth_ = 0;
};

// ---------------------------------------------------------------- random problems

/// Deterministic affine update x' = sum coeff[j]*x_j + constant.
struct AffineUpdate {
    std::vector<std::int64_t> coeff;
    std::int64_t constant = 0;
    std::int64_t apply(const std::vector<std::int64_t> &s) const;
};

struct Case {
    std::vector<Literal> guard;  ///< over pre-variables
    std::vector<AffineUpdate> update;
};

/// A problem whose states stay in the box [-box, box]^d: every case requires
/// pre and post state to be inside the box.
struct BoxProblem {
    int box = 4;
    std::vector<Var> vars;
    Formula init;
    std::vector<Case> cases;
    Formula err;

    [[nodiscard]] SafetyProblem problem() const;
};

BoxProblem random_box_problem(std::mt19937 &rng);

struct Reachability {
    bool unsafe = false;
    unsigned shortest = 0;  ///< length of a shortest path to an error state
    unsigned diameter = 0;  ///< largest BFS layer from the initial states
};

/// Breadth-first search over the box using the case updates directly; every
/// successor is cross-checked against the encoded trans.
Reachability explore(const BoxProblem &bp);

/// Conjunctive transition with Identity/Increment updates, for the
/// under-approximation property. Updates are kept so paths can be unrolled
/// without going through the code under test.
struct SupportedTransition {
    std::vector<Var> vars;
    std::vector<Literal> guards;
    std::vector<AffineUpdate> update;
    [[nodiscard]] Transition transition() const;
};

SupportedTransition random_supported_transition(std::mt19937 &rng);

struct UnderApproxReport {
    std::string error;             ///< empty when every sampled model unrolls
    unsigned models_checked = 0;
};

/// For every pre-state in [-5,5]^d and every n in 1..6 at which `learned`
/// holds, unrolls the original updates n times and checks each step against
/// the original literals and the final state against the learned post-state.
UnderApproxReport check_under_approximation(const SupportedTransition &st, const Transition &learned);

/// Runs all three engines on one box problem with max bound diameter + 1
/// and compares against the explicit-state oracle.
struct FuzzResult {
    Reachability oracle;
    std::vector<Verdict> verdicts;  ///< bmc, abmc, abmc-b
    std::string error;              ///< empty if every check passed
};
FuzzResult fuzz_one(const BoxProblem &bp);

// ---------------------------------------------------------------- random CHCs

struct ChcInstance {
    std::string text;
    bool unsafe = false;
    unsigned depth = 0;  ///< fewest rule applications reaching the query
};

/// Random linear CHC system over a finite box with a derivation oracle.
ChcInstance random_chc(std::mt19937 &rng);

// ---------------------------------------------------------------- running example

/// The two disjuncts of the nested-loop example and the closed form of the inner loop.
Transition nested_tau_lt();
Transition nested_tau_eq();
Formula nested_accel1_expected(const Var &counter);

struct ReplayRow {
    Trace trace;
    std::vector<DepGraph::Edge> edges;
    std::optional<Transition> learned;
    std::optional<std::vector<Transition>> suffix;
};

struct Replay {
    SafetyProblem problem;
    Verdict verdict;
    std::vector<ReplayRow> rows;  ///< one per on_iteration event
    std::vector<Formula> asserted;  ///< formulas asserted outside push frames
};

/// ABMC on the nested-loop example with a scripted main solver that replays the models of
/// the hand-simulated run; the acceleration itself uses z3.
Replay replay_running_example();

/// Compares a replay against the expected rows b = 0..6; empty if it matches.
std::string check_replay(const Replay &r);

// ---------------------------------------------------------------- should_accel

/// Adjacent equal blocks anywhere in s.
bool has_square(const std::vector<Transition> &s);
bool is_rotation_of(std::vector<Transition> s, const std::vector<Transition> &target);

/// Sequences over {a, b, L} up to length 4, for L accelerating [a] and then
/// [a, b], checked against an independent statement of the rule. Returns an
/// error message or "" and sets `checked`.
std::string check_should_accel_exhaustive(unsigned &checked);

}  // namespace abmc::test
