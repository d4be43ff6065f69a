#include "support.hpp"

#include <deque>
#include <sstream>

#ifndef ABMC_TEST_Z3
#define ABMC_TEST_Z3 "z3"
#endif

namespace abmc::test {

smt::SolverConfig z3_config() {
    smt::SolverConfig c;
    c.command = {ABMC_TEST_Z3, "-in"};
    c.random_seed = 0;
    return c;
}

smt::SolverFactory z3_factory() { return smt::process_solver_factory(z3_config()); }

std::unique_ptr<smt::Solver> z3() { return z3_factory()(); }

bool smt_implies(const Formula &a, const Formula &b) {
    auto s = z3();
    s->assert_formula(rename_mu(a, 0));
    s->assert_formula(rename_mu(Formula::negation(b), 0));
    auto r = s->check();
    if (r.is_unknown()) throw std::runtime_error("unknown in implication check: " + r.reason);
    return r.is_unsat();
}

bool smt_equivalent(const Formula &a, const Formula &b) { return smt_implies(a, b) && smt_implies(b, a); }

bool smt_equivalent_indexed(const Formula &a, const Formula &b) {
    for (const auto &[p, q] : {std::pair{a, b}, std::pair{b, a}}) {
        auto s = z3();
        s->assert_formula(p);
        s->assert_formula(to_nnf(Formula::negation(q)));
        auto r = s->check();
        if (r.is_unknown()) throw std::runtime_error("unknown in equivalence check: " + r.reason);
        if (!r.is_unsat()) return false;
    }
    return true;
}

// ---------------------------------------------------------------- box problems

std::int64_t AffineUpdate::apply(const std::vector<std::int64_t> &s) const {
    std::int64_t v = constant;
    for (std::size_t j = 0; j < coeff.size(); ++j) v += coeff[j] * s[j];
    return v;
}

namespace {

int pick(std::mt19937 &rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

IntTerm affine_term(const std::vector<Var> &vars, const AffineUpdate &u) {
    IntTerm e = u.constant;
    for (std::size_t j = 0; j < vars.size(); ++j) e += IntTerm(u.coeff[j]) * IntTerm::of(vars[j]);
    return e;
}

std::vector<Literal> box_literals(const std::vector<Var> &vars, int box, bool primed) {
    std::vector<Literal> out;
    for (const auto &v : vars) {
        IntTerm x = IntTerm::of(primed ? v.primed() : v);
        out.push_back(Literal::make(x, RelOp::Le, box));
        out.push_back(Literal::make(x, RelOp::Ge, -box));
    }
    return out;
}

Literal random_literal(std::mt19937 &rng, const std::vector<Var> &vars, int box) {
    IntTerm e = pick(rng, -box, box);
    bool any = false;
    while (!any) {
        for (const auto &v : vars) {
            int c = pick(rng, -2, 2);
            if (c == 0) continue;
            e += IntTerm(c) * IntTerm::of(v);
            any = true;
        }
    }
    static const RelOp ops[] = {RelOp::Lt, RelOp::Le, RelOp::Eq, RelOp::Ne, RelOp::Ge, RelOp::Gt};
    return Literal::make(e, ops[pick(rng, 0, 5)], 0);
}

Valuation valuation(const std::vector<Var> &vars, const std::vector<std::int64_t> &s, bool primed) {
    Valuation v;
    for (std::size_t j = 0; j < vars.size(); ++j) v[primed ? vars[j].primed() : vars[j]] = s[j];
    return v;
}

}  // namespace

SafetyProblem BoxProblem::problem() const {
    SafetyProblem p;
    p.pre_vars = vars;
    p.init = init;
    p.err = err;
    std::vector<Formula> ds;
    for (const auto &c : cases) {
        std::vector<Literal> ls = c.guard;
        for (auto &l : box_literals(vars, box, false)) ls.push_back(l);
        for (auto &l : box_literals(vars, box, true)) ls.push_back(l);
        for (std::size_t j = 0; j < vars.size(); ++j)
            ls.push_back(Literal::make(IntTerm::of(vars[j].primed()), RelOp::Eq, affine_term(vars, c.update[j])));
        ds.push_back(Formula::conj_of(ls));
    }
    p.trans = ds.size() == 1 ? ds.front() : Formula::disj(ds);
    return p;
}

BoxProblem random_box_problem(std::mt19937 &rng) {
    static const char *names[] = {"x", "y", "z"};
    BoxProblem bp;
    bp.box = 3;
    int d = pick(rng, 1, 3);
    for (int j = 0; j < d; ++j) bp.vars.push_back(Var::pre(names[j]));

    std::vector<Formula> init;
    for (const auto &v : bp.vars) {
        int lo = pick(rng, -bp.box, bp.box);
        if (pick(rng, 0, 2) == 0) {
            int hi = std::min(bp.box, lo + pick(rng, 0, 2));
            init.push_back(Formula::lit(Literal::make(IntTerm::of(v), RelOp::Ge, lo)));
            init.push_back(Formula::lit(Literal::make(IntTerm::of(v), RelOp::Le, hi)));
        } else {
            init.push_back(Formula::lit(Literal::make(IntTerm::of(v), RelOp::Eq, lo)));
        }
    }
    bp.init = Formula::conj(init);

    int ncases = pick(rng, 1, 3);
    for (int c = 0; c < ncases; ++c) {
        Case k;
        int ng = pick(rng, 0, 2);
        for (int g = 0; g < ng; ++g) k.guard.push_back(random_literal(rng, bp.vars, bp.box));
        for (int j = 0; j < d; ++j) {
            AffineUpdate u;
            u.coeff.assign(static_cast<std::size_t>(d), 0);
            int kind = pick(rng, 0, 9);
            if (kind < 4) {
                u.coeff[static_cast<std::size_t>(j)] = 1;
            } else if (kind < 7) {
                u.coeff[static_cast<std::size_t>(j)] = 1;
                u.constant = pick(rng, 0, 1) ? pick(rng, 1, 2) : -pick(rng, 1, 2);
            } else if (kind < 8) {
                u.constant = pick(rng, -bp.box, bp.box);
            } else {
                u.coeff[static_cast<std::size_t>(j)] = 1;
                u.coeff[static_cast<std::size_t>(pick(rng, 0, d - 1))] += 1;
            }
            k.update.push_back(u);
        }
        bp.cases.push_back(std::move(k));
    }

    std::vector<Formula> err;
    int ne = pick(rng, 1, 2);
    for (int e = 0; e < ne; ++e) err.push_back(Formula::lit(random_literal(rng, bp.vars, bp.box)));
    bp.err = err.size() == 1 ? err.front() : Formula::conj(err);
    return bp;
}

Reachability explore(const BoxProblem &bp) {
    const SafetyProblem p = bp.problem();
    const auto d = bp.vars.size();
    auto in_box = [&](const std::vector<std::int64_t> &s) {
        for (auto x : s)
            if (x < -bp.box || x > bp.box) return false;
        return true;
    };

    std::map<std::vector<std::int64_t>, unsigned> dist;
    std::deque<std::vector<std::int64_t>> queue;
    std::vector<std::int64_t> s(d, -bp.box);
    while (true) {
        if (p.init.eval(valuation(bp.vars, s, false))) {
            dist[s] = 0;
            queue.push_back(s);
        }
        std::size_t j = 0;
        while (j < d && s[j] == bp.box) s[j++] = -bp.box;
        if (j == d) break;
        ++s[j];
    }

    Reachability r;
    while (!queue.empty()) {
        auto cur = queue.front();
        queue.pop_front();
        unsigned k = dist[cur];
        r.diameter = std::max(r.diameter, k);
        if (!r.unsafe && p.err.eval(valuation(bp.vars, cur, false))) {
            r.unsafe = true;
            r.shortest = k;
        }
        Valuation pre = valuation(bp.vars, cur, false);
        for (const auto &c : bp.cases) {
            bool ok = true;
            for (const auto &g : c.guard) ok = ok && g.eval(pre);
            if (!ok) continue;
            std::vector<std::int64_t> next;
            for (const auto &u : c.update) next.push_back(u.apply(cur));
            if (!in_box(next)) continue;
            Valuation both = pre;
            for (auto &[v, x] : valuation(bp.vars, next, true)) both[v] = x;
            if (!p.trans.eval(both)) throw std::logic_error("oracle successor rejected by trans");
            if (dist.emplace(next, k + 1).second) queue.push_back(next);
        }
    }
    return r;
}

FuzzResult fuzz_one(const BoxProblem &bp) {
    FuzzResult fr;
    fr.oracle = explore(bp);
    const SafetyProblem p = bp.problem();
    EngineConfig cfg;
    cfg.max_bound = fr.oracle.diameter + 1;
    cfg.solver = z3_config();
    for (EngineKind k : {EngineKind::Bmc, EngineKind::Abmc, EngineKind::AbmcBlocking}) {
        cfg.kind = k;
        Verdict v;
        try {
            v = run_engine(p, cfg);
        } catch (const std::exception &e) {
            fr.error = std::string(to_string(k)) + " threw: " + e.what();
            return fr;
        }
        const std::string who = std::string(to_string(k)) + " ";
        if (v.unsafe()) {
            if (!fr.oracle.unsafe) fr.error = who + "reports unsafe on an unreachable error";
            else if (!v.expanded) fr.error = who + "unsafe without an expanded counterexample";
            else if (k == EngineKind::Bmc && v.bound != fr.oracle.shortest)
                fr.error = who + "bound " + std::to_string(v.bound) + " differs from shortest path " +
                           std::to_string(fr.oracle.shortest);
            else if (v.bound > fr.oracle.shortest)
                fr.error = who + "bound " + std::to_string(v.bound) + " exceeds shortest path";
            else if (v.expanded->steps.size() < fr.oracle.shortest)
                fr.error = who + "expanded counterexample shorter than the shortest path";
            else {
                try {
                    validate_concrete(*v.expanded, p);
                } catch (const ValidationError &e) {
                    fr.error = who + "expanded counterexample fails replay: " + e.what();
                }
            }
        } else if (v.safe()) {
            if (fr.oracle.unsafe) fr.error = who + "reports safe on a reachable error";
        } else if (fr.oracle.unsafe) {
            fr.error = who + "gave up (" + v.detail + ") below the completeness bound";
        } else if (v.reason != UnknownReason::BoundExhausted) {
            fr.error = who + "unknown for a reason other than the bound: " + v.detail;
        }
        fr.verdicts.push_back(std::move(v));
        if (!fr.error.empty()) return fr;
    }
    return fr;
}

// ---------------------------------------------------------------- supported transitions

Transition SupportedTransition::transition() const {
    std::vector<Literal> ls = guards;
    for (std::size_t j = 0; j < vars.size(); ++j)
        ls.push_back(Literal::make(IntTerm::of(vars[j].primed()), RelOp::Eq, affine_term(vars, update[j])));
    return Transition::make(ls);
}

SupportedTransition random_supported_transition(std::mt19937 &rng) {
    static const char *names[] = {"x", "y", "z"};
    SupportedTransition st;
    const int d = pick(rng, 1, 3);
    for (int j = 0; j < d; ++j) st.vars.push_back(Var::pre(names[j]));
    const auto n = static_cast<std::size_t>(d);

    std::vector<bool> identity(n);
    for (std::size_t j = 0; j < n; ++j) identity[j] = pick(rng, 0, 2) == 0;
    for (std::size_t j = 0; j < n; ++j) {
        AffineUpdate u;
        u.coeff.assign(n, 0);
        u.coeff[j] = 1;
        if (!identity[j]) {
            u.constant = pick(rng, -3, 3);
            for (std::size_t i = 0; i < n; ++i)
                if (identity[i] && pick(rng, 0, 1)) u.coeff[i] += pick(rng, -2, 2);
            if (u.constant == 0 && std::count(u.coeff.begin(), u.coeff.end(), 0) == static_cast<long>(n - 1))
                u.constant = 1;
        }
        st.update.push_back(u);
    }
    const int ng = pick(rng, 1, 3);
    for (int g = 0; g < ng; ++g) {
        IntTerm e = pick(rng, -6, 6);
        for (const auto &v : st.vars) e += IntTerm(pick(rng, -2, 2)) * IntTerm::of(v);
        if (e.is_constant()) e += IntTerm::of(st.vars.front());
        static const RelOp ops[] = {RelOp::Lt, RelOp::Le, RelOp::Ge, RelOp::Gt, RelOp::Eq, RelOp::Ne};
        st.guards.push_back(Literal::make(e, ops[pick(rng, 0, 5)], 0));
    }
    return st;
}

UnderApproxReport check_under_approximation(const SupportedTransition &st, const Transition &learned) {
    UnderApproxReport rep;
    const Transition orig = st.transition();
    const LearnedInfo &info = learned.learned();
    const Var n = info.counter;
    const std::size_t d = st.vars.size();

    // Post-states must be functions of (pre, n): one unit equality per x'.
    for (const auto &v : learned.vars()) {
        bool program = std::find(st.vars.begin(), st.vars.end(), v.unprimed()) != st.vars.end();
        if (!(program && (v.kind == VarKind::Pre || v.kind == VarKind::Post)) && v != n) {
            rep.error = "unexpected variable " + v.str();
            return rep;
        }
    }
    for (const auto &x : st.vars) {
        int defs = 0;
        for (const auto &l : learned.literals()) {
            if (!l.mentions(x.primed())) continue;
            std::int64_t c = l.term().coefficient({x.primed()});
            unsigned posts = 0;
            for (const auto &v : l.term().vars()) posts += v.kind == VarKind::Post;
            if (l.rel() != Rel::Eq || (c != 1 && c != -1) || posts != 1) {
                rep.error = "post-variable " + x.primed().str() + " constrained by " + l.str();
                return rep;
            }
            ++defs;
        }
        if (defs != 1) {
            rep.error = "post-variable " + x.primed().str() + " has " + std::to_string(defs) + " definitions";
            return rep;
        }
    }

    auto cf_at = [&](const std::vector<std::int64_t> &s, std::int64_t k) {
        Valuation v{{n, k}};
        for (std::size_t j = 0; j < d; ++j) v[st.vars[j]] = s[j];
        std::vector<std::int64_t> out;
        for (const auto &x : st.vars) out.push_back(info.closed_form.at(x).eval(v));
        return out;
    };

    std::vector<std::int64_t> pre(d, -5);
    while (true) {
        for (std::int64_t k = -1; k <= 6; ++k) {
            Valuation sigma{{n, k}};
            auto post = cf_at(pre, k);
            for (std::size_t j = 0; j < d; ++j) {
                sigma[st.vars[j]] = pre[j];
                sigma[st.vars[j].primed()] = post[j];
            }
            if (!learned.eval(sigma)) continue;
            if (k <= 0) {
                rep.error = "model with counter " + std::to_string(k);
                return rep;
            }
            ++rep.models_checked;
            std::vector<std::int64_t> cur = pre;
            for (std::int64_t i = 0; i < k; ++i) {
                std::vector<std::int64_t> next;
                for (const auto &u : st.update) next.push_back(u.apply(cur));
                if (next != cf_at(pre, i + 1)) {
                    rep.error = "closed form disagrees with unrolling at iteration " + std::to_string(i + 1);
                    return rep;
                }
                Valuation step;
                for (std::size_t j = 0; j < d; ++j) {
                    step[st.vars[j]] = cur[j];
                    step[st.vars[j].primed()] = next[j];
                }
                if (!orig.eval(step)) {
                    rep.error = "step " + std::to_string(i) + " of " + std::to_string(k) + " violates " + orig.str();
                    return rep;
                }
                cur = next;
            }
            if (cur != post) {
                rep.error = "unrolling does not reach the learned post-state";
                return rep;
            }
        }
        std::size_t j = 0;
        while (j < d && pre[j] == 5) pre[j++] = -5;
        if (j == d) break;
        ++pre[j];
    }
    return rep;
}

// ---------------------------------------------------------------- CHCs

namespace {

std::string num(std::int64_t v) { return v < 0 ? "(- " + std::to_string(-v) + ")" : std::to_string(v); }

struct ChcLit {
    std::vector<int> coeff;  // over the clause variables
    int constant = 0;
    int op = 0;  // 0 <=, 1 =, 2 >=, 3 distinct

    bool eval(const std::vector<std::int64_t> &vals) const {
        std::int64_t e = constant;
        for (std::size_t j = 0; j < coeff.size(); ++j) e += coeff[j] * vals[j];
        switch (op) {
        case 0: return e <= 0;
        case 1: return e == 0;
        case 2: return e >= 0;
        default: return e != 0;
        }
    }
    std::string text(const std::vector<std::string> &names) const {
        std::string sum = "(+ " + num(constant);
        for (std::size_t j = 0; j < coeff.size(); ++j)
            if (coeff[j] != 0) sum += " (* " + num(coeff[j]) + " " + names[j] + ")";
        sum += ")";
        static const char *ops[] = {"<=", "=", ">=", "distinct"};
        return std::string("(") + ops[op] + " " + sum + " 0)";
    }
};

ChcLit random_chc_lit(std::mt19937 &rng, std::size_t nvars, std::size_t first, bool allow_eq) {
    ChcLit l;
    l.coeff.assign(nvars, 0);
    l.constant = pick(rng, -3, 3);
    for (std::size_t j = first; j < nvars; ++j) l.coeff[j] = pick(rng, -1, 1);
    if (std::all_of(l.coeff.begin(), l.coeff.end(), [](int c) { return c == 0; })) l.coeff[first] = 1;
    l.op = allow_eq ? pick(rng, 0, 3) : (pick(rng, 0, 1) ? 0 : 2);
    return l;
}

}  // namespace

ChcInstance random_chc(std::mt19937 &rng) {
    constexpr int box = 3;
    const int npred = pick(rng, 1, 3);
    std::vector<int> arity;
    for (int i = 0; i < npred; ++i) arity.push_back(pick(rng, 1, 2));

    std::ostringstream os;
    os << "(set-logic HORN)\n";
    for (int i = 0; i < npred; ++i) {
        os << "(declare-fun P" << i << " (";
        for (int k = 0; k < arity[static_cast<std::size_t>(i)]; ++k) os << (k ? " " : "") << "Int";
        os << ") Bool)\n";
    }

    using Tuple = std::vector<std::int64_t>;
    auto tuples = [&](int ar) {
        std::vector<Tuple> out;
        for (int a = -box; a <= box; ++a) {
            if (ar == 1) {
                out.push_back({a});
                continue;
            }
            for (int b = -box; b <= box; ++b) out.push_back({a, b});
        }
        return out;
    };
    auto box_text = [&](const std::string &v) {
        return "(<= " + num(-box) + " " + v + ") (<= " + v + " " + std::to_string(box) + ")";
    };
    auto app = [](int pred, const std::vector<std::string> &args) {
        std::string s = "(P" + std::to_string(pred);
        for (const auto &a : args) s += " " + a;
        return s + ")";
    };

    // Derivation oracle: facts then rules to a fixpoint, with BFS depth.
    std::map<std::pair<int, Tuple>, unsigned> derived;
    std::deque<std::pair<int, Tuple>> frontier;
    struct Rule {
        int from, to;
        std::vector<ChcLit> lits;  // over body vars then head vars
    };
    std::vector<Rule> rules;

    const int nfacts = pick(rng, 1, 2);
    for (int f = 0; f < nfacts; ++f) {
        int p = pick(rng, 0, npred - 1);
        int ar = arity[static_cast<std::size_t>(p)];
        std::vector<std::string> hv;
        for (int k = 0; k < ar; ++k) hv.push_back("y" + std::to_string(k));
        std::vector<ChcLit> lits;
        for (int k = 0; k < ar; ++k) {
            ChcLit eq;
            eq.coeff.assign(static_cast<std::size_t>(ar), 0);
            eq.coeff[static_cast<std::size_t>(k)] = 1;
            eq.constant = -pick(rng, -box, box);
            eq.op = pick(rng, 0, 3) == 0 ? 0 : 1;
            lits.push_back(eq);
        }
        os << "(assert (forall (";
        for (const auto &v : hv) os << "(" << v << " Int)";
        os << ") (=> (and";
        for (const auto &v : hv) os << " " << box_text(v);
        for (const auto &l : lits) os << " " << l.text(hv);
        os << ") " << app(p, hv) << ")))\n";
        for (const auto &tup : tuples(ar)) {
            bool ok = std::all_of(lits.begin(), lits.end(), [&](const ChcLit &l) { return l.eval(tup); });
            if (ok && derived.emplace(std::make_pair(p, tup), 0).second) frontier.emplace_back(p, tup);
        }
    }

    const int nrules = pick(rng, 1, 4);
    for (int r = 0; r < nrules; ++r) {
        Rule rule{pick(rng, 0, npred - 1), pick(rng, 0, npred - 1), {}};
        int ab = arity[static_cast<std::size_t>(rule.from)], ah = arity[static_cast<std::size_t>(rule.to)];
        std::vector<std::string> names;
        for (int k = 0; k < ab; ++k) names.push_back("x" + std::to_string(k));
        for (int k = 0; k < ah; ++k) names.push_back("y" + std::to_string(k));
        const auto nv = names.size();
        for (int k = 0; k < ah; ++k) {
            // y_k = x_j + c or a guard-like relation
            ChcLit l;
            l.coeff.assign(nv, 0);
            l.coeff[static_cast<std::size_t>(ab + k)] = 1;
            l.coeff[static_cast<std::size_t>(pick(rng, 0, ab - 1))] = -1;
            l.constant = -pick(rng, -2, 2);
            l.op = pick(rng, 0, 4) == 0 ? 0 : 1;
            rule.lits.push_back(l);
        }
        if (pick(rng, 0, 1)) rule.lits.push_back(random_chc_lit(rng, nv, 0, false));
        os << "(assert (forall (";
        for (const auto &v : names) os << "(" << v << " Int)";
        std::vector<std::string> bv(names.begin(), names.begin() + ab), hv(names.begin() + ab, names.end());
        os << ") (=> (and " << app(rule.from, bv);
        for (const auto &v : hv) os << " " << box_text(v);
        for (const auto &l : rule.lits) os << " " << l.text(names);
        os << ") " << app(rule.to, hv) << ")))\n";
        rules.push_back(std::move(rule));
    }

    int qp = pick(rng, 0, npred - 1);
    int qa = arity[static_cast<std::size_t>(qp)];
    std::vector<std::string> qv;
    for (int k = 0; k < qa; ++k) qv.push_back("x" + std::to_string(k));
    ChcLit ql = random_chc_lit(rng, static_cast<std::size_t>(qa), 0, true);
    os << "(assert (forall (";
    for (const auto &v : qv) os << "(" << v << " Int)";
    os << ") (=> (and " << app(qp, qv) << " " << ql.text(qv) << ") false)))\n(check-sat)\n";

    while (!frontier.empty()) {
        auto [p, tup] = frontier.front();
        frontier.pop_front();
        unsigned k = derived.at({p, tup});
        for (const auto &rule : rules) {
            if (rule.from != p) continue;
            for (const auto &head : tuples(arity[static_cast<std::size_t>(rule.to)])) {
                Tuple all = tup;
                all.insert(all.end(), head.begin(), head.end());
                bool ok = std::all_of(rule.lits.begin(), rule.lits.end(), [&](const ChcLit &l) { return l.eval(all); });
                if (ok && derived.emplace(std::make_pair(rule.to, head), k + 1).second) frontier.emplace_back(rule.to, head);
            }
        }
    }

    ChcInstance inst;
    inst.text = os.str();
    for (const auto &[key, k] : derived) {
        if (key.first != qp || !ql.eval(key.second)) continue;
        if (!inst.unsafe || k < inst.depth) inst.depth = k;
        inst.unsafe = true;
    }
    return inst;
}

// ---------------------------------------------------------------- running example

namespace {

const Var kX = Var::pre("x"), kY = Var::pre("y");

const char *kNestedText = R"((vars x y)
(init (and (<= x 0) (<= y 0)))
(trans (or (and (< x 100) (= x' (+ x 1)) (= y' y))
           (and (= x 100) (= x' 0) (= y' (+ y 1)))))
(err (>= y 100)))";

// models of the hand-simulated run, by step
Valuation replay_model() {
    const std::int64_t xs[] = {0, 1, 2, 100, 0, 1, 100, 0};
    const std::int64_t ys[] = {0, 0, 0, 0, 1, 1, 1, 2};
    Valuation m;
    for (unsigned i = 0; i < 8; ++i) {
        m[kX.at(i)] = xs[i];
        m[kY.at(i)] = ys[i];
    }
    m[Var::aux("n!1").at(2)] = 98;
    m[Var::aux("n!1").at(5)] = 99;
    return m;
}

}  // namespace

Transition nested_tau_lt() {
    return Transition::make({lit(t(kX), RelOp::Lt, 100), lit(t(kX.primed()), RelOp::Eq, t(kX) + 1),
                             lit(t(kY.primed()), RelOp::Eq, t(kY))});
}

Transition nested_tau_eq() {
    return Transition::make({lit(t(kX), RelOp::Eq, 100), lit(t(kX.primed()), RelOp::Eq, 0),
                             lit(t(kY.primed()), RelOp::Eq, t(kY) + 1)});
}

Formula nested_accel1_expected(const Var &n) {
    return Formula::conj_of({lit(t(n), RelOp::Gt, 0), lit(t(kX) + t(n), RelOp::Le, 100),
                             lit(t(kX.primed()), RelOp::Eq, t(kX) + t(n)), lit(t(kY.primed()), RelOp::Eq, t(kY))});
}

Replay replay_running_example() {
    Replay out;
    out.problem = parse_native(kNestedText);
    // the solver dies with the run, so its log is copied at every check
    std::vector<ScriptedSolver::Call> log;
    EngineHooks hooks;
    hooks.main = [&log] {
        auto s = std::make_unique<ScriptedSolver>();
        // error checks happen inside a push frame and are all unsat
        s->on_check = [&log](const ScriptedSolver &self) {
            log = self.log;
            return self.depth() > 0 ? smt::SatResult::unsat() : smt::SatResult::sat();
        };
        s->on_model = [](const std::set<Var> &vars) {
            Valuation all = replay_model(), m;
            for (const auto &v : vars)
                if (auto it = all.find(v); it != all.end()) m.insert(*it);
            return m;
        };
        return s;
    };
    hooks.scratch = z3_factory();
    hooks.on_iteration = [&](const IterationEvent &e) {
        out.rows.push_back({e.trace, e.new_edges, e.step.learned, e.suffix});
    };
    EngineConfig cfg;
    cfg.kind = EngineKind::Abmc;
    cfg.max_bound = 7;
    cfg.solver = z3_config();
    out.verdict = run_abmc(out.problem, cfg, hooks);
    for (const auto &c : log)
        if (c.kind == ScriptedSolver::Call::Kind::Assert && c.depth == 0) out.asserted.push_back(c.formula);
    return out;
}

std::string check_replay(const Replay &r) {
    std::ostringstream err;
    if (!r.verdict.unknown() || r.verdict.reason != UnknownReason::BoundExhausted)
        err << "verdict " << r.verdict.str() << "; ";
    if (r.rows.size() != 7) return err.str() + "expected 7 iterations, got " + std::to_string(r.rows.size());
    if (!r.rows[2].learned) return err.str() + "nothing learned at b=2";
    const Transition a1 = *r.rows[2].learned;
    if (!a1.is_learned() || a1.learned().id != 1 || !smt_equivalent(a1.formula(), nested_accel1_expected(a1.learned().counter)))
        err << "accel1 is " << a1.formula().str() << "; ";

    using E = std::vector<DepGraph::Edge>;
    const Transition lt = nested_tau_lt(), eq = nested_tau_eq();
    struct Want {
        Trace trace;
        E edges;
        std::optional<Transition> learned;
    };
    const Want want[] = {
        {{}, {}, std::nullopt},
        {{lt}, {}, std::nullopt},
        {{lt, lt}, {{lt, lt}}, a1},
        {{lt, lt, a1}, {{lt, a1}}, std::nullopt},
        {{lt, lt, a1, eq}, {{a1, eq}}, std::nullopt},
        {{lt, lt, a1, eq, lt}, {{eq, lt}}, a1},
        // the outer cycle is chosen but its acceleration fails
        {{lt, lt, a1, eq, lt, a1}, {}, std::nullopt},
    };
    for (unsigned b = 0; b < 7; ++b) {
        const ReplayRow &row = r.rows[b];
        if (row.trace != want[b].trace) err << "b=" << b << ": trace differs; ";
        if (row.edges != want[b].edges) err << "b=" << b << ": new edges differ; ";
        if (row.learned != want[b].learned) err << "b=" << b << ": learned transition differs; ";
    }
    if (r.rows[6].suffix != std::vector<Transition>{eq, lt, a1}) err << "b=6: suffix is not [t=, t<, accel1]; ";

    const Formula tau = r.problem.trans, tau_or = Formula::disj({r.problem.trans, a1.formula()});
    const Formula steps[] = {tau, tau, tau_or, tau, tau, tau_or, tau};
    if (r.asserted.size() != 8) {
        err << "expected 8 top-level assertions, got " << r.asserted.size();
    } else {
        if (r.asserted[0] != rename_mu(r.problem.init, 0)) err << "init assertion differs; ";
        for (unsigned b = 0; b < 7; ++b)
            if (r.asserted[b + 1] != rename_mu(steps[b], b)) err << "b=" << b << ": asserted step differs; ";
    }
    return err.str();
}

// ---------------------------------------------------------------- should_accel

bool has_square(const std::vector<Transition> &s) {
    for (std::size_t len = 1; 2 * len <= s.size(); ++len)
        for (std::size_t i = 0; i + 2 * len <= s.size(); ++i)
            if (std::equal(s.begin() + static_cast<long>(i), s.begin() + static_cast<long>(i + len),
                           s.begin() + static_cast<long>(i + len)))
                return true;
    return false;
}

bool is_rotation_of(std::vector<Transition> s, const std::vector<Transition> &target) {
    if (s.size() != target.size()) return false;
    for (std::size_t r = 0; r < s.size(); ++r) {
        if (s == target) return true;
        std::rotate(s.begin(), s.begin() + 1, s.end());
    }
    return false;
}

std::string check_should_accel_exhaustive(unsigned &checked) {
    checked = 0;
    auto letter = [](const std::string &name) {
        return Transition::make({lit(t(Var::pre(name)), RelOp::Eq, t(Var::post(name)) + 1)});
    };
    const Transition a = letter("a"), b = letter("b");
    for (const std::vector<Transition> &cycle : {std::vector<Transition>{a}, std::vector<Transition>{a, b}}) {
        LearnedInfo info;
        info.id = static_cast<unsigned>(cycle.size());
        info.cycle = cycle;
        info.counter = Var::aux("k!" + std::to_string(info.id));
        const Transition l = Transition::make_learned(
            {lit(t(info.counter), RelOp::Gt, 0), lit(t(Var::pre("q")), RelOp::Eq, info.id)}, info);
        CycleCache cache;
        cache.store(cycle, l);
        std::vector<Transition> target = cycle;
        target.push_back(l);

        std::vector<Transition> cur;
        std::string error;
        std::function<void()> rec = [&] {
            if (!error.empty()) return;
            if (!cur.empty()) {
                bool want = cur.size() == 1 ? !cur.front().is_learned() : !has_square(cur) && !is_rotation_of(cur, target);
                if (should_accel(cur, cache) != want) {
                    error = "length " + std::to_string(cur.size()) + " sequence answered " + (want ? "false" : "true");
                    return;
                }
                ++checked;
            }
            if (cur.size() == 4) return;
            for (const auto &x : {a, b, l}) {
                cur.push_back(x);
                rec();
                cur.pop_back();
            }
        };
        rec();
        if (!error.empty()) return error;
    }
    return "";
}

}  // namespace abmc::test
