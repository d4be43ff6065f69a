#include "abmc/trace.hpp"

#include <sstream>

namespace abmc {

Formula StepFormula::formula() const {
    if (!learned) return labeled ? Formula::conj({base, Formula::lit(label_literal(0))}) : base;
    if (!labeled) return Formula::disj({base, learned->formula()});
    return Formula::disj({Formula::conj({base, Formula::lit(label_literal(0))}), labeled_formula(*learned)});
}

Trace build_trace(std::span<const StepFormula> steps, const Valuation &sigma, unsigned b) {
    if (steps.size() < b) throw InternalError("build_trace: fewer step formulas than the bound");
    Trace tr;
    tr.reserve(b);
    for (unsigned i = 0; i < b; ++i) {
        const StepFormula &s = steps[i];
        Formula f = s.formula();
        Valuation local = unindex(sigma, f.vars(), i);
        try {
            if (!f.eval(local)) throw InternalError("model does not satisfy step " + std::to_string(i));
            if (s.learned && s.learned->eval(local) &&
                (!s.labeled || label_literal(s.learned->label_id()).eval(local))) {
                tr.push_back(*s.learned);
                continue;
            }
            if (s.labeled && !label_literal(0).eval(local))
                throw InternalError("label at step " + std::to_string(i) + " matches no disjunct");
            tr.push_back(sip(s.base, local));
        } catch (const EvalError &e) {
            throw InternalError("incomplete model at step " + std::to_string(i) + ": " + e.what());
        }
    }
    return tr;
}

std::vector<DepGraph::Edge> DepGraph::update(const Trace &tr) {
    std::vector<Edge> added;
    vertices_.insert(tr.begin(), tr.end());
    for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
        Edge e{tr[i], tr[i + 1]};
        if (edges_.insert(e).second) {
            history_.push_back(e);
            added.push_back(e);
        }
    }
    return added;
}

std::string DepGraph::to_dot() const {
    auto esc = [](const std::string &s) {
        std::string o;
        for (char c : s) {
            if (c == '"' || c == '\\') o += '\\';
            o += c;
        }
        return o;
    };
    std::ostringstream os;
    os << "digraph deps {\n";
    for (const auto &v : vertices_)
        os << "  \"" << v.name() << "\" [label=\"" << v.name() << ": " << esc(v.str()) << "\""
           << (v.is_learned() ? ", shape=box" : "") << "];\n";
    for (const auto &[a, b] : history_) os << "  \"" << a.name() << "\" -> \"" << b.name() << "\";\n";
    os << "}\n";
    return os.str();
}

const std::optional<Transition> *CycleCache::find(const Cycle &c) const {
    auto it = entries_.find(c);
    return it == entries_.end() ? nullptr : &it->second;
}

void CycleCache::store(const Cycle &c, std::optional<Transition> result) {
    if (entries_.count(c)) throw InternalError("cycle cached twice");
    if (result) learned_.push_back(*result);
    entries_.emplace(c, std::move(result));
}

bool is_cyclic(const DepGraph &g, std::span<const Transition> seq) {
    if (seq.empty()) return false;
    for (std::size_t i = 0; i + 1 < seq.size(); ++i)
        if (!g.has_edge(seq[i], seq[i + 1])) return false;
    return g.has_edge(seq.back(), seq.front());
}

bool is_square_free(std::span<const Transition> seq) {
    const std::size_t c = seq.size();
    for (std::size_t len = 1; 2 * len <= c; ++len)
        for (std::size_t i = 0; i + 2 * len <= c; ++i) {
            bool square = true;
            for (std::size_t j = 0; j < len && square; ++j) square = seq[i + j] == seq[i + len + j];
            if (square) return false;
        }
    return true;
}

bool is_cycle_plus_accel_conjugate(std::span<const Transition> seq, const CycleCache &cache) {
    for (const auto &l : cache.learned()) {
        std::vector<Transition> pattern = l.learned().cycle;
        pattern.push_back(l);
        if (pattern.size() != seq.size()) continue;
        const std::size_t c = seq.size();
        for (std::size_t r = 0; r < c; ++r) {
            bool same = true;
            for (std::size_t i = 0; i < c && same; ++i) same = seq[(r + i) % c] == pattern[i];
            if (same) return true;
        }
    }
    return false;
}

bool should_accel(std::span<const Transition> seq, const CycleCache &cache) {
    if (seq.empty()) return false;
    if (seq.size() == 1) return !seq.front().is_learned();
    return is_square_free(seq) && !is_cycle_plus_accel_conjugate(seq, cache);
}

std::optional<std::vector<Transition>> shortest_accelerable_cyclic_suffix(const Trace &tr, const DepGraph &g,
                                                                          const CycleCache &cache) {
    for (std::size_t len = 1; len <= tr.size(); ++len) {
        std::span<const Transition> suffix(tr.data() + tr.size() - len, len);
        if (is_cyclic(g, suffix) && should_accel(suffix, cache)) return std::vector<Transition>(suffix.begin(), suffix.end());
    }
    return std::nullopt;
}

}  // namespace abmc
