#include "abmc/transition.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>

namespace abmc {

namespace detail {

struct TransitionNode {
    std::vector<Literal> literals;
    std::optional<LearnedInfo> learned;
    std::uint64_t serial = 0;
};

namespace {

// Learned transitions are keyed by id and cycle in addition to their
// literals, so identity survives re-acceleration but different runs that
// happen to mint the same formula under different provenance stay apart.
struct Key {
    std::vector<Literal> literals;
    unsigned id = 0;
    std::vector<std::uint64_t> cycle;
    auto operator<=>(const Key &) const = default;
};

class Pool {
public:
    const TransitionNode *intern(std::vector<Literal> lits, std::optional<LearnedInfo> info) {
        std::sort(lits.begin(), lits.end());
        lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
        Key key{lits, 0, {}};
        if (info) {
            key.id = info->id;
            for (const auto &t : info->cycle) key.cycle.push_back(t.serial());
        }
        std::lock_guard lock(mutex_);
        auto it = nodes_.find(key);
        if (it != nodes_.end()) return it->second.get();
        auto node = std::make_unique<TransitionNode>();
        node->literals = std::move(lits);
        node->learned = std::move(info);
        node->serial = next_serial_++;
        const TransitionNode *raw = node.get();
        nodes_.emplace(std::move(key), std::move(node));
        return raw;
    }

private:
    std::mutex mutex_;
    std::map<Key, std::unique_ptr<TransitionNode>> nodes_;
    std::uint64_t next_serial_ = 1;
};

Pool &pool() {
    static Pool p;
    return p;
}

}  // namespace
}  // namespace detail

Transition Transition::make(std::vector<Literal> literals) {
    return Transition(detail::pool().intern(std::move(literals), std::nullopt));
}

Transition Transition::make_learned(std::vector<Literal> literals, LearnedInfo info) {
    if (info.id == 0) throw InternalError("learned transition needs a positive id");
    return Transition(detail::pool().intern(std::move(literals), std::move(info)));
}

const std::vector<Literal> &Transition::literals() const { return node_->literals; }
bool Transition::is_learned() const { return node_->learned.has_value(); }
const LearnedInfo &Transition::learned() const {
    if (!node_->learned) throw InternalError("transition is not learned");
    return *node_->learned;
}
std::uint64_t Transition::serial() const { return node_->serial; }

Formula Transition::formula() const { return Formula::conj_of(literals()); }

std::set<Var> Transition::vars() const {
    std::set<Var> out;
    for (const auto &l : literals()) l.term().collect_vars(out);
    return out;
}

bool Transition::eval(const Valuation &sigma) const {
    return std::all_of(literals().begin(), literals().end(), [&](const Literal &l) { return l.eval(sigma); });
}

std::string Transition::str() const {
    if (literals().empty()) return "true";
    std::string s;
    for (std::size_t i = 0; i < literals().size(); ++i) s += (i ? " /\\ " : "") + literals()[i].str();
    return s;
}

std::string Transition::name() const {
    return is_learned() ? "L" + std::to_string(learned().id) : "t" + std::to_string(serial());
}

Literal label_literal(unsigned id) {
    return Literal::make(IntTerm::of(Var::label()), RelOp::Eq, static_cast<std::int64_t>(id));
}

Formula labeled_formula(const Transition &t) {
    auto lits = t.literals();
    lits.push_back(label_literal(t.label_id()));
    return Formula::conj_of(lits);
}

Var fresh_aux(const std::string &base, const std::set<Var> &taken) {
    for (unsigned k = 1;; ++k) {
        Var v = Var::aux(base + "!" + std::to_string(k));
        if (!taken.count(v)) return v;
    }
}

namespace {

std::set<std::string> program_names(const Transition &t) {
    std::set<std::string> out;
    for (const auto &v : t.vars())
        if (v.kind == VarKind::Pre || v.kind == VarKind::Post) out.insert(v.name);
    return out;
}

}  // namespace

Transition compose(const Transition &t1, const Transition &t2) {
    std::set<Var> taken = t1.vars();
    const std::set<Var> vars2 = t2.vars();
    taken.insert(vars2.begin(), vars2.end());

    std::set<std::string> names = program_names(t1);
    for (const auto &n : program_names(t2)) names.insert(n);

    std::map<Var, Var> mid;  // program name -> intermediate
    for (const auto &n : names) {
        Var m = fresh_aux(n, taken);
        taken.insert(m);
        mid.emplace(Var::pre(n), m);
    }

    const std::set<Var> vars1 = t1.vars();
    std::map<Var, Var> apart;  // aux of t2 that clash with t1
    for (const auto &v : vars2) {
        if (v.kind == VarKind::Aux && vars1.count(v)) {
            Var r = fresh_aux(v.name, taken);
            taken.insert(r);
            apart.emplace(v, r);
        }
    }

    std::vector<Literal> lits;
    for (const auto &l : t1.literals())
        lits.push_back(l.rename([&](const Var &v) { return v.kind == VarKind::Post ? mid.at(v.unprimed()) : v; }));
    for (const auto &l : t2.literals()) {
        lits.push_back(l.rename([&](const Var &v) {
            if (v.kind == VarKind::Pre) return mid.at(v);
            if (auto it = apart.find(v); it != apart.end()) return it->second;
            return v;
        }));
    }
    return Transition::make(std::move(lits));
}

Transition compose_seq(std::span<const Transition> seq, std::span<const Var> pre_vars) {
    if (seq.empty()) {
        std::vector<Literal> lits;
        for (const auto &x : pre_vars) lits.push_back(Literal::make(IntTerm::of(x.primed()), RelOp::Eq, IntTerm::of(x)));
        return Transition::make(std::move(lits));
    }
    // right fold: compose(t0, compose(t1, ...))
    Transition acc = seq.back();
    for (std::size_t i = seq.size() - 1; i-- > 0;) acc = compose(seq[i], acc);
    return acc;
}

Transition sip(const Formula &tau, const Valuation &sigma) {
    if (!tau.is_nnf()) throw InternalError("sip: formula is not in NNF");
    if (!tau.eval(sigma)) throw InternalError("sip: valuation does not satisfy the formula");
    std::vector<Literal> chosen;
    for (const auto &l : tau.literals())
        if (l.eval(sigma)) chosen.push_back(l);
    return Transition::make(std::move(chosen));
}

}  // namespace abmc
