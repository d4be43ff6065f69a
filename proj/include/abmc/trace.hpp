#pragma once

// Traces induced by models, the observed dependency graph, and the
// heuristic deciding which cyclic suffixes get accelerated.

#include "abmc/transition.hpp"

#include <span>

namespace abmc {

/// What the engine added for one step, before renaming with mu_i.
struct StepFormula {
    Formula base;                       ///< the original transition formula
    std::optional<Transition> learned;  ///< disjunct learned at this step
    bool labeled = false;               ///< instrument with the label variable

    /// base, base \/ learned, or (base /\ lbl=0) \/ (learned /\ lbl=id).
    [[nodiscard]] Formula formula() const;
};

using Trace = std::vector<Transition>;

/// Element i is the learned disjunct of step i if the model takes it (with a
/// matching label when instrumented), otherwise sip(base_i, sigma o mu_i).
/// Throws InternalError if sigma does not satisfy some step.
Trace build_trace(std::span<const StepFormula> steps, const Valuation &sigma, unsigned b);

class DepGraph {
public:
    using Edge = std::pair<Transition, Transition>;

    /// Adds the trace's elements and consecutive pairs; returns the edges
    /// that were new, in trace order.
    std::vector<Edge> update(const Trace &tr);

    [[nodiscard]] bool has_edge(const Transition &a, const Transition &b) const { return edges_.count({a, b}) > 0; }
    [[nodiscard]] const std::set<Transition> &vertices() const { return vertices_; }
    [[nodiscard]] const std::set<Edge> &edges() const { return edges_; }
    /// Edges in the order they were first observed.
    [[nodiscard]] const std::vector<Edge> &history() const { return history_; }

    [[nodiscard]] std::string to_dot() const;

private:
    std::set<Transition> vertices_;
    std::set<Edge> edges_;
    std::vector<Edge> history_;
};

/// Exact cycle sequence -> acceleration result. A failed acceleration is
/// cached as nullopt so it is not retried.
class CycleCache {
public:
    using Cycle = std::vector<Transition>;

    /// nullptr if the cycle was never accelerated.
    [[nodiscard]] const std::optional<Transition> *find(const Cycle &c) const;
    void store(const Cycle &c, std::optional<Transition> result);
    /// Learned transitions in minting order.
    [[nodiscard]] const std::vector<Transition> &learned() const { return learned_; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }

private:
    std::map<Cycle, std::optional<Transition>> entries_;
    std::vector<Transition> learned_;
};

/// All edges seq[i] -> seq[i+1] and the closing edge seq.back() -> seq[0].
bool is_cyclic(const DepGraph &g, std::span<const Transition> seq);

bool is_square_free(std::span<const Transition> seq);

/// Some rotation of seq equals cycle(L) :: [L] for a learned L of the cache.
bool is_cycle_plus_accel_conjugate(std::span<const Transition> seq, const CycleCache &cache);

/// Singletons: accelerate iff the transition is original. Longer sequences:
/// iff square-free and not a conjugate of cycle(L) :: [L].
bool should_accel(std::span<const Transition> seq, const CycleCache &cache);

/// Shortest suffix of tr that is cyclic in g and passes should_accel.
std::optional<std::vector<Transition>> shortest_accelerable_cyclic_suffix(const Trace &tr, const DepGraph &g,
                                                                          const CycleCache &cache);

}  // namespace abmc
