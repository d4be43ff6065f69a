#pragma once

// Under-approximating acceleration of conjunctive transitions whose updates
// are x' = x (identity) or x' = x + e with e over identity variables.

#include "abmc/smt.hpp"
#include "abmc/transition.hpp"

#include <variant>

namespace abmc::accel {

enum class FailureKind : std::uint8_t { NondeterministicUpdate, UnsupportedUpdate, NonMonotonicGuard, NonPolynomial };

struct Failure {
    FailureKind kind;
    std::string detail;
    std::optional<Literal> literal;  ///< the offending guard, for NonMonotonicGuard

    [[nodiscard]] std::string str() const;
};

const char *to_string(FailureKind k);

struct Update {
    enum class Kind : std::uint8_t { Identity, Increment };
    Kind kind = Kind::Identity;
    IntTerm delta;  ///< x' = x + delta; zero for Identity
};

/// Result of classifying a transition: one update per program variable and
/// the remaining (non-update) literals.
struct Classified {
    std::map<Var, Update> updates;  ///< keyed by pre-variable
    std::vector<Literal> guards;
};

/// Per pre-variable: the value after k iterations, over the pre-variables
/// and the counter.
using ClosedForm = std::map<Var, IntTerm>;

enum class Placement : std::uint8_t { Backward, Forward };

/// Solves x' definitions out of `t` (eliminating intermediate auxiliaries)
/// and classifies every variable of `pre_vars`.
std::variant<Classified, Failure> classify(const Transition &t, std::span<const Var> pre_vars);

/// cf(k): Identity gives x, Increment{e} gives x + k*e.
ClosedForm closed_form(const std::map<Var, Update> &updates, const Var &k);

/// Monotonicity certificate for one guard. `k` is the counter used in `cf`;
/// queries go to `scratch` inside a push/pop frame.
std::variant<Placement, Failure> guard_placement(const Literal &l, const ClosedForm &cf, const Var &k,
                                                 smt::Solver &scratch);

using Outcome = std::variant<Transition, Failure>;

/// Accelerates `t`. On success the result is a learned transition with the
/// given id whose provenance cycle is `cycle` (defaults to [t]).
Outcome accelerate(const Transition &t, std::span<const Var> pre_vars, unsigned id, smt::Solver &scratch,
                   std::vector<Transition> cycle = {});

/// accelerate(compose_seq(cycle)) with provenance `cycle`.
Outcome accelerate_seq(std::span<const Transition> cycle, std::span<const Var> pre_vars, unsigned id,
                       smt::Solver &scratch);

}  // namespace abmc::accel
