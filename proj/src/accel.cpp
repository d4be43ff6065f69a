#include "abmc/accel.hpp"

#include <algorithm>

namespace abmc::accel {

namespace {

// Closed forms are polynomials by construction; this only guards against
// pathological blow-up in composed cycles.
constexpr unsigned kMaxDegree = 16;

Failure fail(FailureKind k, std::string detail, std::optional<Literal> l = std::nullopt) {
    return {k, std::move(detail), std::move(l)};
}

// Variable that an equality literal can be solved for: unit coefficient and
// occurring in no other monomial.
std::optional<Var> solvable_var(const Literal &l, VarKind kind) {
    if (l.rel() != Rel::Eq) return std::nullopt;
    for (const auto &[m, c] : l.term().monomials()) {
        if (m.size() != 1 || m[0].kind != kind || (c != 1 && c != -1)) continue;
        const Var &v = m[0];
        bool elsewhere = std::any_of(l.term().monomials().begin(), l.term().monomials().end(), [&](const auto &mc) {
            return mc.first != m && std::find(mc.first.begin(), mc.first.end(), v) != mc.first.end();
        });
        if (!elsewhere) return v;
    }
    return std::nullopt;
}

// v := solution of l for v, where l is c*v + rest = 0 and c = +-1.
IntTerm solve_for(const Literal &l, const Var &v) {
    std::int64_t c = l.term().coefficient({v});
    IntTerm rest = l.term() - IntTerm::monomial(c, {v});
    return c == 1 ? -rest : rest;
}

bool mentions_kind(const IntTerm &t, VarKind k) {
    for (const auto &v : t.vars())
        if (v.kind == k) return true;
    return false;
}

ClosedForm shifted(const ClosedForm &cf, const Var &k, const IntTerm &by) {
    ClosedForm out;
    std::map<Var, IntTerm> s{{k, by}};
    for (const auto &[x, t] : cf) out.emplace(x, t.substitute(s));
    return out;
}

}  // namespace

const char *to_string(FailureKind k) {
    switch (k) {
    case FailureKind::NondeterministicUpdate: return "NondeterministicUpdate";
    case FailureKind::UnsupportedUpdate: return "UnsupportedUpdate";
    case FailureKind::NonMonotonicGuard: return "NonMonotonicGuard";
    case FailureKind::NonPolynomial: return "NonPolynomial";
    }
    return "?";
}

std::string Failure::str() const {
    std::string s = to_string(kind);
    if (!detail.empty()) s += ": " + detail;
    return s;
}

std::variant<Classified, Failure> classify(const Transition &t, std::span<const Var> pre_vars) {
    std::vector<Literal> lits = t.literals();
    std::map<Var, IntTerm> defs;  // post variable -> definition
    try {
        for (;;) {
            std::optional<std::pair<std::size_t, Var>> pick;
            // intermediates first, so that post variables end up defined over pre-variables
            for (VarKind kind : {VarKind::Aux, VarKind::Post}) {
                for (std::size_t i = 0; i < lits.size() && !pick; ++i)
                    if (auto v = solvable_var(lits[i], kind)) pick.emplace(i, *v);
                if (pick) break;
            }
            if (!pick) break;
            auto [i, v] = *pick;
            IntTerm u = solve_for(lits[i], v);
            lits.erase(lits.begin() + static_cast<std::ptrdiff_t>(i));
            std::map<Var, IntTerm> s{{v, u}};
            for (auto &l : lits) l = l.substitute(s);
            for (auto &[w, d] : defs) d = d.substitute(s);
            if (v.kind == VarKind::Post) defs.emplace(v, u);
        }
    } catch (const std::overflow_error &) {
        return fail(FailureKind::UnsupportedUpdate, "coefficient overflow while solving updates");
    }

    Classified out;
    for (const auto &l : lits) {
        if (l.constant_value() == true) continue;
        for (const auto &v : l.term().vars())
            if (v.kind == VarKind::Post)
                return fail(FailureKind::NondeterministicUpdate, v.str() + " is not defined by an equality");
        out.guards.push_back(l);
    }

    // Pre-variables pinned to a constant by a guard. A definition that is
    // the identity under the pinning (loc = 1 /\ loc' = 1) is treated as one;
    // the guard is certified for every iteration below, so it stays valid.
    std::map<Var, IntTerm> pinned;
    for (const auto &g : out.guards) {
        if (g.rel() != Rel::Eq) continue;
        IntTerm p = g.term().without_constant();
        if (p.monomials().size() == 1) {
            const auto &[m, c] = *p.monomials().begin();
            if (m.size() == 1 && m[0].kind == VarKind::Pre && c == 1) pinned.try_emplace(m[0], -g.term().constant());
        }
    }

    std::map<Var, IntTerm> diffs;
    for (const auto &x : pre_vars) {
        auto it = defs.find(x.primed());
        if (it == defs.end()) return fail(FailureKind::NondeterministicUpdate, x.primed().str() + " is not defined");
        IntTerm d;
        try {
            d = it->second - IntTerm::of(x);
            if (d.substitute(pinned).is_zero()) d = 0;
        } catch (const std::overflow_error &) {
            return fail(FailureKind::UnsupportedUpdate, "coefficient overflow in update of " + x.str());
        }
        if (mentions_kind(d, VarKind::Aux))
            return fail(FailureKind::NondeterministicUpdate, "update of " + x.str() + " depends on " + d.str());
        diffs.emplace(x, d);
    }
    for (const auto &[x, d] : diffs) {
        for (const auto &v : d.vars()) {
            auto it = diffs.find(v);
            if (it == diffs.end() || !it->second.is_zero())
                return fail(FailureKind::UnsupportedUpdate,
                            "update of " + x.str() + " depends on non-invariant " + v.str());
        }
        out.updates.emplace(x, Update{d.is_zero() ? Update::Kind::Identity : Update::Kind::Increment, d});
    }
    for (const auto &[post, _] : defs)
        if (!diffs.count(post.unprimed()))
            return fail(FailureKind::NondeterministicUpdate, post.str() + " is not a program variable");
    return out;
}

ClosedForm closed_form(const std::map<Var, Update> &updates, const Var &k) {
    ClosedForm cf;
    for (const auto &[x, u] : updates)
        cf.emplace(x, u.kind == Update::Kind::Identity ? IntTerm::of(x) : IntTerm::of(x) + IntTerm::of(k) * u.delta);
    return cf;
}

std::variant<Placement, Failure> guard_placement(const Literal &l, const ClosedForm &cf, const Var &k,
                                                 smt::Solver &scratch) {
    Literal at_k = l.substitute(cf);
    if (at_k == l) return Placement::Backward;  // does not change along the closed form
    Literal at_k1 = l.substitute(shifted(cf, k, IntTerm::of(k) + 1));
    Literal k_nonneg = Literal::make(IntTerm::of(k), RelOp::Ge, 0);

    auto valid = [&](const Literal &from, const Literal &to) {
        scratch.push();
        scratch.assert_formula(rename_mu(Formula::conj_of({k_nonneg, from, to.negate()}), 0));
        smt::SatResult r = scratch.check();
        scratch.pop();
        return r;
    };
    smt::SatResult back = valid(at_k1, at_k);
    if (back.is_unsat()) return Placement::Backward;
    smt::SatResult fwd = valid(at_k, at_k1);
    if (fwd.is_unsat()) return Placement::Forward;
    std::string why = "guard " + l.str() + " is not monotonic along the closed form";
    if (back.is_unknown() || fwd.is_unknown()) why += " (solver: " + (back.is_unknown() ? back : fwd).str() + ")";
    return fail(FailureKind::NonMonotonicGuard, why, l);
}

Outcome accelerate(const Transition &t, std::span<const Var> pre_vars, unsigned id, smt::Solver &scratch,
                   std::vector<Transition> cycle) {
    if (cycle.empty()) cycle.push_back(t);
    auto cls = classify(t, pre_vars);
    if (auto *f = std::get_if<Failure>(&cls)) return *f;
    const auto &c = std::get<Classified>(cls);

    const std::set<Var> taken = t.vars();
    std::string name = "n!" + std::to_string(id);
    while (taken.count(Var::aux(name))) name += "_";
    const Var n = Var::aux(name);

    std::vector<Literal> lits{Literal::make(IntTerm::of(n), RelOp::Gt, 0)};
    ClosedForm cf;
    try {
        cf = closed_form(c.updates, n);
        const ClosedForm before_last = shifted(cf, n, IntTerm::of(n) - 1);
        for (const auto &g : c.guards) {
            auto p = guard_placement(g, cf, n, scratch);
            if (auto *f = std::get_if<Failure>(&p)) return *f;
            lits.push_back(std::get<Placement>(p) == Placement::Backward ? g.substitute(before_last) : g);
        }
        for (const auto &x : pre_vars) lits.push_back(Literal::make(IntTerm::of(x.primed()), RelOp::Eq, cf.at(x)));
    } catch (const std::overflow_error &) {
        return fail(FailureKind::NonPolynomial, "coefficient overflow in closed form");
    }
    std::erase_if(lits, [](const Literal &l) { return l.constant_value() == true; });

    bool exact = true;
    for (const auto &l : lits) {
        if (l.term().degree() > kMaxDegree) return fail(FailureKind::NonPolynomial, "degree bound exceeded in " + l.str());
        for (const auto &v : l.term().vars())
            if (v.kind == VarKind::Aux && v != n) exact = false;
    }
    LearnedInfo info{id, std::move(cycle), n, std::move(cf), exact};
    return Transition::make_learned(std::move(lits), std::move(info));
}

Outcome accelerate_seq(std::span<const Transition> cycle, std::span<const Var> pre_vars, unsigned id,
                       smt::Solver &scratch) {
    if (cycle.empty()) throw InternalError("accelerate_seq: empty cycle");
    Transition composed = compose_seq(cycle, pre_vars);
    return accelerate(composed, pre_vars, id, scratch, std::vector<Transition>(cycle.begin(), cycle.end()));
}

}  // namespace abmc::accel
