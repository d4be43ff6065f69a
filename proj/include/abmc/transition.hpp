#pragma once

// Interned conjunctive transitions.

#include "abmc/formula.hpp"

#include <memory>
#include <span>

namespace abmc {

class Transition;

/// Provenance of a learned (accelerated) transition.
struct LearnedInfo {
    unsigned id = 0;                 ///< positive, unique within one engine run
    std::vector<Transition> cycle;   ///< the sequence that was accelerated
    Var counter;                     ///< fresh iteration counter (Aux)
    /// State after k iterations of the cycle, per program variable, as a
    /// term over the pre-variables and `counter` (standing for k).
    std::map<Var, IntTerm> closed_form;
    /// True if the learned relation equals the transitive closure of the
    /// cycle (required for the blocking clauses to be safety-preserving).
    bool exact = true;
};

namespace detail {
struct TransitionNode;
}

/// Handle to an interned conjunction of literals. Two handles are equal iff
/// they denote the same interned node: equal literal sets with equal
/// provenance always yield the same node.
class Transition {
public:
    /// Intern an original (non-learned) transition.
    static Transition make(std::vector<Literal> literals);
    /// Intern a learned transition. The label literal is never part of
    /// `literals`; it is attached at encoding time from the id.
    static Transition make_learned(std::vector<Literal> literals, LearnedInfo info);

    [[nodiscard]] const std::vector<Literal> &literals() const;
    [[nodiscard]] bool is_learned() const;
    [[nodiscard]] const LearnedInfo &learned() const;  ///< requires is_learned()
    [[nodiscard]] unsigned label_id() const { return is_learned() ? learned().id : 0; }
    /// Creation order; stable within a process, used for deterministic ordering.
    [[nodiscard]] std::uint64_t serial() const;

    [[nodiscard]] Formula formula() const;
    [[nodiscard]] std::set<Var> vars() const;
    [[nodiscard]] bool eval(const Valuation &sigma) const;
    [[nodiscard]] std::string str() const;
    /// Short name for dumps: t<serial> or L<id>.
    [[nodiscard]] std::string name() const;

    friend bool operator==(Transition a, Transition b) { return a.node_ == b.node_; }
    friend std::strong_ordering operator<=>(Transition a, Transition b) { return a.serial() <=> b.serial(); }

private:
    explicit Transition(const detail::TransitionNode *n) : node_(n) {}
    const detail::TransitionNode *node_;
};

/// Literal `lbl - id = 0` used to instrument transitions with their label.
Literal label_literal(unsigned id);

/// Conjunction of the transition's literals and its label literal.
Formula labeled_formula(const Transition &t);

/// Relational composition: t1 followed by t2, via a fresh intermediate
/// vector. Aux variables of t2 are renamed apart from those of t1. The
/// program variables are those mentioned (as pre or post) by either side.
Transition compose(const Transition &t1, const Transition &t2);

/// Right fold of compose; the empty sequence is the identity x' = x over
/// `pre_vars`.
Transition compose_seq(std::span<const Transition> seq, std::span<const Var> pre_vars);

/// Syntactic implicant projection: the conjunction of exactly those literals
/// of `tau` that `sigma` satisfies. `sigma` is over unindexed variables and
/// must satisfy `tau` (InternalError otherwise).
Transition sip(const Formula &tau, const Valuation &sigma);

/// Fresh auxiliary variable `base!k` (smallest k >= 1) not in `taken`.
Var fresh_aux(const std::string &base, const std::set<Var> &taken);

}  // namespace abmc
