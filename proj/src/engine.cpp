#include "abmc/engine.hpp"

#include <algorithm>

namespace abmc {

using Clock = std::chrono::steady_clock;

const char *to_string(EngineKind k) {
    switch (k) {
    case EngineKind::Bmc: return "bmc";
    case EngineKind::Abmc: return "abmc";
    case EngineKind::AbmcBlocking: return "abmc-b";
    }
    return "?";
}

std::optional<EngineKind> parse_engine(const std::string &s) {
    if (s == "bmc") return EngineKind::Bmc;
    if (s == "abmc") return EngineKind::Abmc;
    if (s == "abmc-b" || s == "abmc_b") return EngineKind::AbmcBlocking;
    return std::nullopt;
}

const char *to_string(UnknownReason r) {
    switch (r) {
    case UnknownReason::BoundExhausted: return "BoundExhausted";
    case UnknownReason::Timeout: return "Timeout";
    case UnknownReason::SolverUnknown: return "SolverUnknown";
    }
    return "?";
}

std::string Verdict::str() const {
    switch (kind) {
    case Kind::Safe: return "safe";
    case Kind::Unsafe: return "unsafe";
    case Kind::Unknown: return "unknown";
    }
    return "?";
}

bool Counterexample::concrete() const {
    return std::none_of(steps.begin(), steps.end(), [](const CexStep &s) { return s.transition.is_learned(); });
}

// ---------------------------------------------------------------- blocking clauses

std::pair<Formula, Formula> make_blocking_clauses(std::span<const Transition> cycle, unsigned id, unsigned b) {
    std::vector<Formula> now;
    std::vector<Formula> next;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        Formula f = labeled_formula(cycle[i]);
        now.push_back(rename_mu(f, b + static_cast<unsigned>(i)));
        next.push_back(rename_mu(f, b + static_cast<unsigned>(i) + 1));
    }
    Formula beta1 = to_nnf(Formula::negation(Formula::conj(std::move(now))));
    Literal not_taken = rename_mu(Literal::make(IntTerm::of(Var::label()), RelOp::Ne, static_cast<std::int64_t>(id)), b);
    Formula beta2 = Formula::disj({Formula::lit(not_taken), to_nnf(Formula::negation(Formula::conj(std::move(next))))});
    return {beta1, beta2};
}

// ---------------------------------------------------------------- counterexamples

namespace {

std::vector<Var> aux_vars(const std::set<Var> &vs) {
    std::vector<Var> out;
    for (const auto &v : vs)
        if (v.kind == VarKind::Aux) out.push_back(v);
    return out;
}

std::int64_t value_of(const Valuation &sigma, const Var &v) {
    auto it = sigma.find(v);
    if (it == sigma.end()) throw InternalError("model has no value for " + v.str());
    return it->second;
}

// Valuation over unindexed program variables for the step pre -> post.
Valuation step_valuation(const SafetyProblem &p, const std::vector<std::int64_t> &pre,
                         const std::vector<std::int64_t> *post) {
    Valuation s;
    for (std::size_t j = 0; j < p.dim(); ++j) {
        s[p.pre_vars[j]] = pre[j];
        if (post) s[p.pre_vars[j].primed()] = (*post)[j];
    }
    return s;
}

// Unassigned auxiliaries (other disjuncts) get 0 so evaluation is total.
void complete_aux(Valuation &s, const Formula &f) {
    for (const auto &v : f.vars())
        if (v.kind == VarKind::Aux) s.try_emplace(v, 0);
}

}  // namespace

Counterexample extract_counterexample(const Valuation &sigma, std::span<const StepFormula> steps,
                                      const SafetyProblem &p, unsigned b) {
    Counterexample cex;
    for (unsigned i = 0; i <= b; ++i) {
        std::vector<std::int64_t> s;
        for (const auto &x : p.pre_vars) s.push_back(value_of(sigma, x.at(i)));
        cex.states.push_back(std::move(s));
    }
    Trace tr = build_trace(steps, sigma, b);
    for (unsigned i = 0; i < b; ++i) {
        CexStep st{tr[i], std::nullopt, {}};
        for (const auto &v : aux_vars(tr[i].vars())) st.aux[v] = value_of(sigma, v.at(i));
        if (tr[i].is_learned()) st.counter_value = value_of(sigma, tr[i].learned().counter.at(i));
        cex.steps.push_back(std::move(st));
    }
    for (const auto &v : aux_vars(p.init.vars())) cex.init_aux[v] = value_of(sigma, v.at(0));
    for (const auto &v : aux_vars(p.err.vars())) cex.err_aux[v] = value_of(sigma, v.at(b));
    return cex;
}

void validate_concrete(const Counterexample &cex, const SafetyProblem &p) {
    if (cex.states.size() != cex.steps.size() + 1) throw ValidationError("state/step count mismatch");
    for (const auto &s : cex.states)
        if (s.size() != p.dim()) throw ValidationError("state of wrong dimension");
    std::set<Literal> trans_lits;
    for (const auto &l : p.trans.literals()) trans_lits.insert(l);

    try {
        Valuation s0 = step_valuation(p, cex.states.front(), nullptr);
        s0.insert(cex.init_aux.begin(), cex.init_aux.end());
        complete_aux(s0, p.init);
        if (!p.init.eval(s0)) throw ValidationError("state 0 violates init");

        for (std::size_t i = 0; i < cex.steps.size(); ++i) {
            const CexStep &st = cex.steps[i];
            const std::string where = "step " + std::to_string(i);
            if (st.transition.is_learned()) throw ValidationError(where + " is a learned transition");
            for (const auto &l : st.transition.literals())
                if (!trans_lits.count(l)) throw ValidationError(where + " uses a literal that is not in trans: " + l.str());
            Valuation s = step_valuation(p, cex.states[i], &cex.states[i + 1]);
            s.insert(st.aux.begin(), st.aux.end());
            complete_aux(s, st.transition.formula());
            if (!st.transition.eval(s)) throw ValidationError(where + " violates its implicant " + st.transition.str());
            complete_aux(s, p.trans);
            if (!p.trans.eval(s)) throw ValidationError(where + " violates trans");
        }

        Valuation se = step_valuation(p, cex.states.back(), nullptr);
        se.insert(cex.err_aux.begin(), cex.err_aux.end());
        complete_aux(se, p.err);
        if (!p.err.eval(se)) throw ValidationError("final state violates err");
    } catch (const EvalError &e) {
        throw ValidationError(std::string("incomplete counterexample: ") + e.what());
    }
}

namespace {

class Expander {
public:
    Expander(const SafetyProblem &p, const smt::SolverFactory &factory) : p_(p), factory_(factory) {}

    void step(const CexStep &st, const std::vector<std::int64_t> &from, const std::vector<std::int64_t> &to,
              Counterexample &out) {
        if (!st.transition.is_learned()) {
            out.steps.push_back(st);
            out.states.push_back(to);
            return;
        }
        const LearnedInfo &info = st.transition.learned();
        if (!st.counter_value || *st.counter_value < 1)
            throw ValidationError("learned step " + st.transition.name() + " without a positive counter value");
        const std::int64_t n = *st.counter_value;
        auto iterate = [&](std::int64_t k) {
            Valuation s = step_valuation(p_, from, nullptr);
            s[info.counter] = k;
            std::vector<std::int64_t> u;
            for (const auto &x : p_.pre_vars) u.push_back(info.closed_form.at(x).eval(s));
            return u;
        };
        if (iterate(n) != to) throw ValidationError("closed form of " + st.transition.name() + " misses the recorded state");
        std::vector<std::int64_t> u = from;
        for (std::int64_t k = 0; k < n; ++k) {
            std::vector<std::int64_t> v = iterate(k + 1);
            iteration(info.cycle, st.aux, u, v, out);
            u = std::move(v);
        }
    }

private:
    void iteration(const std::vector<Transition> &cycle, const Valuation &aux, const std::vector<std::int64_t> &from,
                   const std::vector<std::int64_t> &to, Counterexample &out) {
        if (cycle.size() == 1 && !cycle[0].is_learned()) {
            Valuation own;
            bool known = true;
            for (const auto &v : aux_vars(cycle[0].vars())) {
                auto it = aux.find(v);
                if (it == aux.end()) known = false;
                else own.insert(*it);
            }
            if (known) {
                step(CexStep{cycle[0], std::nullopt, own}, from, to, out);
                return;
            }
        }
        smt::Solver &s = solver();
        s.push();
        std::set<Var> vars;
        auto add = [&](const Formula &f) {
            f.collect_vars(vars);
            s.assert_formula(f);
        };
        const auto c = static_cast<unsigned>(cycle.size());
        for (unsigned j = 0; j < c; ++j) add(rename_mu(cycle[j].formula(), j));
        for (std::size_t d = 0; d < p_.dim(); ++d) {
            const Var &x = p_.pre_vars[d];
            add(Formula::lit(Literal::make(IntTerm::of(x.at(0)), RelOp::Eq, from[d])));
            add(Formula::lit(Literal::make(IntTerm::of(x.at(c)), RelOp::Eq, to[d])));
        }
        smt::SatResult r = s.check();
        if (!r.is_sat()) {
            s.pop();
            throw ValidationError("cannot expand an iteration of a learned cycle: solver says " + r.str());
        }
        Valuation sigma = s.get_model(vars);
        s.pop();
        std::vector<std::vector<std::int64_t>> w;
        for (unsigned j = 0; j <= c; ++j) {
            std::vector<std::int64_t> st;
            for (const auto &x : p_.pre_vars) st.push_back(value_of(sigma, x.at(j)));
            w.push_back(std::move(st));
        }
        for (unsigned j = 0; j < c; ++j) {
            CexStep st{cycle[j], std::nullopt, {}};
            for (const auto &v : aux_vars(cycle[j].vars())) st.aux[v] = value_of(sigma, v.at(j));
            if (cycle[j].is_learned()) st.counter_value = value_of(sigma, cycle[j].learned().counter.at(j));
            step(st, w[j], w[j + 1], out);
        }
    }

    smt::Solver &solver() {
        if (!solver_) {
            if (!factory_) throw ValidationError("expansion needs a solver but none is configured");
            solver_ = factory_();
        }
        return *solver_;
    }

    const SafetyProblem &p_;
    const smt::SolverFactory &factory_;
    std::unique_ptr<smt::Solver> solver_;
};

}  // namespace

Counterexample expand_and_validate(const Counterexample &cex, const SafetyProblem &p, const smt::SolverFactory &scratch) {
    if (cex.states.size() != cex.steps.size() + 1) throw ValidationError("state/step count mismatch");
    Counterexample out;
    out.init_aux = cex.init_aux;
    out.err_aux = cex.err_aux;
    out.states.push_back(cex.states.front());
    Expander ex(p, scratch);
    try {
        for (std::size_t i = 0; i < cex.steps.size(); ++i) ex.step(cex.steps[i], cex.states[i], cex.states[i + 1], out);
    } catch (const EvalError &e) {
        throw ValidationError(std::string("cannot evaluate closed form: ") + e.what());
    } catch (const std::overflow_error &e) {
        throw ValidationError(std::string("overflow while expanding: ") + e.what());
    }
    if (out.states.back() != cex.states.back()) throw ValidationError("expansion ends in a different state");
    validate_concrete(out, p);
    return out;
}

// ---------------------------------------------------------------- main loop

namespace {

smt::SolverConfig with_transcript_suffix(smt::SolverConfig c, const std::string &suffix) {
    if (!c.transcript_path.empty()) c.transcript_path += suffix;
    return c;
}

class Run {
public:
    Run(const SafetyProblem &p, const EngineConfig &cfg, const EngineHooks &hooks)
        : p_(p), cfg_(cfg), hooks_(hooks), start_(Clock::now()) {
        scratch_factory_ = hooks.scratch ? hooks.scratch
                                         : smt::process_solver_factory(with_transcript_suffix(cfg.solver, ".scratch"));
    }

    Verdict go() {
        Verdict v;
        try {
            v = loop();
        } catch (const smt::SolverError &e) {
            v = unknown(UnknownReason::SolverUnknown, std::string("solver error: ") + e.what());
        }
        v.learned = static_cast<unsigned>(cache_.learned().size());
        v.wall = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start_);
        v.graph = graph_;
        return v;
    }

private:
    Verdict loop() {
        if (cfg_.max_bound < 1) throw std::invalid_argument("max bound must be at least 1");
        solver_ = hooks_.main ? hooks_.main() : smt::process_solver_factory(cfg_.solver)();
        const bool accelerating = cfg_.kind != EngineKind::Bmc;
        const bool blocking = cfg_.kind == EngineKind::AbmcBlocking;

        assert_top(rename_mu(p_.init, 0));
        Valuation sigma;
        if (accelerating) {
            smt::SatResult r = check();
            if (r.is_unsat()) return safe(0);
            if (r.is_unknown()) return unknown_from(r);
            sigma = solver_->get_model(vars_);
        }

        for (unsigned b = 0;; ++b) {
            if (timed_out()) return unknown(UnknownReason::Timeout, "wall-clock limit reached", b);

            solver_->push();
            Formula err = rename_mu(p_.err, b);
            solver_->assert_formula(err);
            smt::SatResult r = check();
            if (r.is_sat()) {
                std::set<Var> vs = vars_;
                err.collect_vars(vs);
                return unsafe(solver_->get_model(vs), b);
            }
            if (r.is_unknown()) {
                if (timed_out()) return unknown(UnknownReason::Timeout, "wall-clock limit reached", b);
                poison("error check at bound " + std::to_string(b) + " returned " + r.str());
            }
            solver_->pop();

            if (b >= cfg_.max_bound) return unknown(UnknownReason::BoundExhausted, "maximal bound reached", b);

            StepFormula step{p_.trans, std::nullopt, blocking};
            Trace tr;
            std::vector<DepGraph::Edge> added;
            std::optional<std::vector<Transition>> suffix;
            if (accelerating) {
                tr = build_trace(steps_, sigma, b);
                added = graph_.update(tr);
                suffix = shortest_accelerable_cyclic_suffix(tr, graph_, cache_);
                if (suffix) step.learned = learn(*suffix);
            }
            assert_top(rename_mu(step.formula(), b));
            if (blocking && step.learned) {
                auto [beta1, beta2] = make_blocking_clauses(*suffix, step.learned->label_id(), b);
                assert_top(beta1);
                assert_top(beta2);
                if (!step.learned->learned().exact)
                    poison("blocking with inexact learned transition " + step.learned->name());
            }
            steps_.push_back(step);
            if (hooks_.on_iteration) hooks_.on_iteration(IterationEvent{b, tr, added, steps_.back(), suffix});

            r = check();
            if (r.is_unsat()) {
                if (poisoned_) return unknown(UnknownReason::SolverUnknown, "safety not established: " + poison_why_, b);
                return safe(b);
            }
            if (r.is_unknown()) return unknown_from(r, b);
            if (accelerating) sigma = solver_->get_model(vars_);
        }
    }

    std::optional<Transition> learn(const std::vector<Transition> &cycle) {
        if (const auto *hit = cache_.find(cycle)) return *hit;
        accel::Outcome o = accel::accelerate_seq(cycle, p_.pre_vars, next_id_, scratch());
        if (auto *t = std::get_if<Transition>(&o)) {
            ++next_id_;
            cache_.store(cycle, *t);
            return *t;
        }
        cache_.store(cycle, std::nullopt);
        return std::nullopt;
    }

    smt::Solver &scratch() {
        if (!scratch_) scratch_ = scratch_factory_();
        return *scratch_;
    }

    void assert_top(const Formula &f) {
        f.collect_vars(vars_);
        solver_->assert_formula(f);
    }

    std::optional<std::chrono::milliseconds> remaining() const {
        if (!cfg_.wall_timeout) return std::nullopt;
        auto left = *cfg_.wall_timeout - std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start_);
        return std::max(left, std::chrono::milliseconds(1));
    }

    bool timed_out() const { return cfg_.wall_timeout && Clock::now() - start_ >= *cfg_.wall_timeout; }

    smt::SatResult check() { return solver_->check(remaining()); }

    void poison(const std::string &why) {
        if (!poisoned_) poison_why_ = why;
        poisoned_ = true;
    }

    Verdict safe(unsigned b) {
        Verdict v;
        v.kind = Verdict::Kind::Safe;
        v.bound = b;
        return v;
    }

    Verdict unknown(UnknownReason r, std::string detail, unsigned b = 0) {
        Verdict v;
        v.kind = Verdict::Kind::Unknown;
        v.reason = r;
        v.detail = std::move(detail);
        v.bound = b;
        return v;
    }

    Verdict unknown_from(const smt::SatResult &r, unsigned b = 0) {
        if (timed_out()) return unknown(UnknownReason::Timeout, "wall-clock limit reached", b);
        return unknown(UnknownReason::SolverUnknown, "solver returned " + r.str(), b);
    }

    Verdict unsafe(const Valuation &sigma, unsigned b) {
        Verdict v;
        v.kind = Verdict::Kind::Unsafe;
        v.bound = b;
        v.cex = extract_counterexample(sigma, steps_, p_, b);
        if (cfg_.validate_cex) v.expanded = expand_and_validate(*v.cex, p_, scratch_factory_);
        return v;
    }

    const SafetyProblem &p_;
    const EngineConfig &cfg_;
    const EngineHooks &hooks_;
    Clock::time_point start_;
    smt::SolverFactory scratch_factory_;
    std::unique_ptr<smt::Solver> solver_;
    std::unique_ptr<smt::Solver> scratch_;
    std::set<Var> vars_;
    std::vector<StepFormula> steps_;
    DepGraph graph_;
    CycleCache cache_;
    unsigned next_id_ = 1;
    bool poisoned_ = false;
    std::string poison_why_;
};

}  // namespace

Verdict run_engine(const SafetyProblem &p, const EngineConfig &cfg, const EngineHooks &hooks) {
    p.validate();
    return Run(p, cfg, hooks).go();
}

Verdict run_bmc(const SafetyProblem &p, EngineConfig cfg, const EngineHooks &hooks) {
    cfg.kind = EngineKind::Bmc;
    return run_engine(p, cfg, hooks);
}

Verdict run_abmc(const SafetyProblem &p, EngineConfig cfg, const EngineHooks &hooks) {
    cfg.kind = EngineKind::Abmc;
    return run_engine(p, cfg, hooks);
}

Verdict run_abmc_blocking(const SafetyProblem &p, EngineConfig cfg, const EngineHooks &hooks) {
    cfg.kind = EngineKind::AbmcBlocking;
    return run_engine(p, cfg, hooks);
}

}  // namespace abmc
