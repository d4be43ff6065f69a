#include "abmc/frontend.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace abmc {

namespace {

const std::set<std::string> kReserved = {"and", "or", "not", "=>", "<", "<=", "=", "!=", ">=", ">", "+", "-", "*",
                                         "true", "false", "distinct", "let", "forall", "exists", "ite", "lbl"};

bool is_integer(const std::string &s) {
    std::size_t i = (s.size() > 1 && s[0] == '-') ? 1 : 0;
    return i < s.size() && std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::int64_t integer_of(const SExpr &e) {
    try {
        return std::stoll(e.text);
    } catch (const std::out_of_range &) {
        e.fail("integer literal out of range: " + e.text);
    }
}

using Resolver = std::function<Var(const SExpr &)>;

IntTerm term_of(const SExpr &e, const Resolver &resolve) {
    if (e.is_atom()) {
        if (is_integer(e.text)) return integer_of(e);
        return IntTerm::of(resolve(e));
    }
    if (!e.is_list() || e.items.empty() || !e.items[0].is_atom()) e.fail("expected an integer term");
    const std::string &op = e.items[0].text;
    const std::size_t n = e.items.size() - 1;
    auto arg = [&](std::size_t i) { return term_of(e.items[i], resolve); };
    try {
        if (op == "+") {
            IntTerm t;
            for (std::size_t i = 1; i <= n; ++i) t += arg(i);
            return t;
        }
        if (op == "-") {
            if (n == 0) e.fail("'-' needs an argument");
            if (n == 1) return -arg(1);
            IntTerm t = arg(1);
            for (std::size_t i = 2; i <= n; ++i) t -= arg(i);
            return t;
        }
        if (op == "*") {
            IntTerm t = 1;
            for (std::size_t i = 1; i <= n; ++i) t = t * arg(i);
            return t;
        }
    } catch (const std::overflow_error &) {
        e.fail("integer overflow in constant arithmetic");
    }
    e.fail("unknown function symbol '" + op + "'");
}

Formula relation(const SExpr &e, RelOp op, const Resolver &resolve) {
    if (e.items.size() < 3) e.fail("relation needs at least two arguments");
    std::vector<Formula> parts;
    for (std::size_t i = 1; i + 1 < e.items.size(); ++i)
        parts.push_back(Formula::lit(Literal::make(term_of(e.items[i], resolve), op, term_of(e.items[i + 1], resolve))));
    return parts.size() == 1 ? parts.front() : Formula::conj(std::move(parts));
}

Formula formula_of(const SExpr &e, const Resolver &resolve) {
    if (e.is_atom("true")) return Formula::top();
    if (e.is_atom("false")) return Formula::bottom();
    if (!e.is_list() || e.items.empty() || !e.items[0].is_atom()) e.fail("expected a formula");
    const std::string &op = e.items[0].text;
    auto children = [&](std::size_t from) {
        std::vector<Formula> cs;
        for (std::size_t i = from; i < e.items.size(); ++i) cs.push_back(formula_of(e.items[i], resolve));
        return cs;
    };
    if (op == "and") return Formula::conj(children(1));
    if (op == "or") return Formula::disj(children(1));
    if (op == "not") {
        if (e.items.size() != 2) e.fail("'not' takes one argument");
        return Formula::negation(formula_of(e.items[1], resolve));
    }
    if (op == "=>") {
        if (e.items.size() < 3) e.fail("'=>' takes at least two arguments");
        auto cs = children(1);
        Formula head = cs.back();
        cs.pop_back();
        return Formula::disj({Formula::negation(Formula::conj(std::move(cs))), head});
    }
    if (op == "<") return relation(e, RelOp::Lt, resolve);
    if (op == "<=") return relation(e, RelOp::Le, resolve);
    if (op == "=") return relation(e, RelOp::Eq, resolve);
    if (op == ">=") return relation(e, RelOp::Ge, resolve);
    if (op == ">") return relation(e, RelOp::Gt, resolve);
    if (op == "!=" || op == "distinct") {
        if (e.items.size() != 3) e.fail("'" + op + "' takes two arguments");
        return relation(e, RelOp::Ne, resolve);
    }
    e.fail("unknown predicate symbol '" + op + "'");
}

// NNF with constant literals folded and unary connectives removed, so that
// printing and re-parsing is the identity.
Formula simplify(const Formula &f) {
    using K = Formula::Kind;
    switch (f.kind()) {
    case K::Lit: {
        auto c = f.literal().constant_value();
        if (!c) return f;
        return *c ? Formula::top() : Formula::bottom();
    }
    case K::And:
    case K::Or: {
        // drop the unit of the connective, stop at its zero
        const K unit = f.kind();
        std::vector<Formula> cs;
        for (const auto &c : f.children()) {
            Formula s = simplify(c);
            if (s.kind() != K::Lit && s.children().empty()) {
                if (s.kind() == unit) continue;
                return s;
            }
            cs.push_back(std::move(s));
        }
        if (cs.size() == 1) return cs.front();
        return f.kind() == K::And ? Formula::conj(std::move(cs)) : Formula::disj(std::move(cs));
    }
    case K::Not: break;
    }
    throw InternalError("simplify expects NNF");
}

Formula normalize(const Formula &f) { return simplify(to_nnf(f)); }

void check_name(const SExpr &e, bool aux) {
    if (!e.is_atom()) e.fail("expected a variable name");
    const std::string &s = e.text;
    if (kReserved.count(s)) e.fail("reserved name '" + s + "'");
    bool ok = !s.empty() && (std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_');
    for (char c : s)
        ok = ok && (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || (aux && c == '!'));
    if (!ok) e.fail("invalid variable name '" + s + "'");
}

}  // namespace

// ---------------------------------------------------------------- native

SafetyProblem parse_native(std::string_view text) {
    std::vector<SExpr> top = parse_sexprs(text);
    SafetyProblem p;
    std::set<std::string> program;
    std::set<std::string> aux;
    const SExpr *sections[3] = {nullptr, nullptr, nullptr};
    bool have_vars = false;

    for (const auto &s : top) {
        if (!s.is_list() || s.items.empty() || !s.items[0].is_atom()) s.fail("expected a (section ...) form");
        const std::string &kw = s.items[0].text;
        if (kw == "vars" || kw == "aux") {
            bool is_aux = kw == "aux";
            if (!is_aux) {
                if (have_vars) s.fail("duplicate (vars ...) section");
                have_vars = true;
            }
            for (std::size_t i = 1; i < s.items.size(); ++i) {
                const SExpr *name = &s.items[i];
                if (name->is_list()) {
                    if (name->items.size() != 2 || !name->items[1].is_atom()) name->fail("expected (name Sort)");
                    if (!name->items[1].is_atom("Int"))
                        name->items[1].fail("unsupported sort '" + name->items[1].str() + "' (only Int)");
                    name = &name->items[0];
                }
                check_name(*name, is_aux);
                if (program.count(name->text) || aux.count(name->text)) name->fail("duplicate variable '" + name->text + "'");
                if (is_aux) {
                    aux.insert(name->text);
                } else {
                    program.insert(name->text);
                    p.pre_vars.push_back(Var::pre(name->text));
                }
            }
            continue;
        }
        int idx = kw == "init" ? 0 : kw == "trans" ? 1 : kw == "err" ? 2 : -1;
        if (idx < 0) s.items[0].fail("unknown section '" + kw + "'");
        if (sections[idx]) s.fail("duplicate (" + kw + " ...) section");
        if (s.items.size() != 2) s.fail("(" + kw + " F) takes exactly one formula");
        sections[idx] = &s;
    }
    if (!have_vars) throw ParseError("missing (vars ...) section", 1, 1);
    const char *names[3] = {"init", "trans", "err"};
    for (int i = 0; i < 3; ++i)
        if (!sections[i]) throw ParseError(std::string("missing (") + names[i] + " ...) section", 1, 1);

    auto resolver = [&](bool allow_post) -> Resolver {
        return [&, allow_post](const SExpr &a) -> Var {
            const std::string &s = a.text;
            if (!s.empty() && s.back() == '\'') {
                std::string base = s.substr(0, s.size() - 1);
                if (!program.count(base)) a.fail("unknown symbol '" + s + "'");
                if (!allow_post) a.fail("post-variable '" + s + "' not allowed here");
                return Var::post(base);
            }
            if (program.count(s)) return Var::pre(s);
            if (aux.count(s)) return Var::aux(s);
            a.fail("unknown symbol '" + s + "'");
        };
    };
    p.init = normalize(formula_of(sections[0]->items[1], resolver(false)));
    p.trans = normalize(formula_of(sections[1]->items[1], resolver(true)));
    p.err = normalize(formula_of(sections[2]->items[1], resolver(false)));
    try {
        p.validate();
    } catch (const std::invalid_argument &e) {
        throw ParseError(e.what(), top.front().line, top.front().column);
    }
    return p;
}

std::string print_native(const SafetyProblem &p) {
    SexprStyle style{[](const Var &v) { return v.kind == VarKind::Post ? v.name + "'" : v.name; }, false};
    std::ostringstream os;
    os << "(vars";
    for (const auto &x : p.pre_vars) os << ' ' << x.name;
    os << ")\n";
    std::set<Var> vs = p.init.vars();
    p.trans.collect_vars(vs);
    p.err.collect_vars(vs);
    std::string aux;
    for (const auto &v : vs)
        if (v.kind == VarKind::Aux) aux += " " + v.name;
    if (!aux.empty()) os << "(aux" << aux << ")\n";
    os << "(init " << to_sexpr(p.init, style) << ")\n";
    os << "(trans " << to_sexpr(p.trans, style) << ")\n";
    os << "(err " << to_sexpr(p.err, style) << ")\n";
    return os.str();
}

// ---------------------------------------------------------------- CHC

const ChcPredicate &ChcSystem::predicate(const std::string &name) const {
    for (const auto &q : predicates)
        if (q.name == name) return q;
    throw std::out_of_range("unknown predicate " + name);
}

std::size_t ChcSystem::count(ChcClause::Kind k) const {
    return static_cast<std::size_t>(
        std::count_if(clauses.begin(), clauses.end(), [k](const ChcClause &c) { return c.kind == k; }));
}

namespace {

SExpr inline_lets(const SExpr &e, const std::map<std::string, SExpr> &env) {
    if (e.is_atom()) {
        auto it = env.find(e.text);
        return it == env.end() ? e : it->second;
    }
    if (!e.is_list()) return e;
    if (e.head_is("let")) {
        if (e.items.size() != 3 || !e.items[1].is_list()) e.fail("malformed let");
        std::map<std::string, SExpr> inner = env;
        for (const auto &b : e.items[1].items) {
            if (!b.is_list() || b.items.size() != 2 || !b.items[0].is_atom()) b.fail("malformed let binding");
            inner[b.items[0].text] = inline_lets(b.items[1], env);  // parallel let
        }
        return inline_lets(e.items[2], inner);
    }
    if ((e.head_is("forall") || e.head_is("exists")) && e.items.size() == 3 && e.items[1].is_list()) {
        std::map<std::string, SExpr> inner = env;
        for (const auto &b : e.items[1].items)
            if (b.is_list() && !b.items.empty()) inner.erase(b.items[0].text);
        SExpr out = e;
        out.items[2] = inline_lets(e.items[2], inner);
        return out;
    }
    SExpr out = e;
    for (auto &c : out.items) c = inline_lets(c, env);
    return out;
}

class ChcReader {
public:
    ChcSystem read(std::string_view text) {
        for (const auto &cmd : parse_sexprs(text)) {
            if (!cmd.is_list() || cmd.items.empty() || !cmd.items[0].is_atom()) cmd.fail("expected a command");
            const std::string &kw = cmd.items[0].text;
            if (kw == "set-logic") {
                if (cmd.items.size() != 2 || !cmd.items[1].is_atom("HORN")) cmd.fail("only (set-logic HORN) is supported");
            } else if (kw == "declare-fun") {
                declare_fun(cmd);
            } else if (kw == "declare-var") {
                if (cmd.items.size() != 3 || !cmd.items[1].is_atom()) cmd.fail("malformed declare-var");
                require_int(cmd.items[2]);
                globals_.insert(cmd.items[1].text);
            } else if (kw == "assert") {
                if (cmd.items.size() != 2) cmd.fail("assert takes one argument");
                clause(inline_lets(cmd.items[1], {}));
            } else if (kw == "check-sat" || kw == "exit" || kw == "set-info" || kw == "set-option" ||
                       kw == "get-model" || kw == "get-info") {
                continue;
            } else {
                cmd.items[0].fail("unsupported command '" + kw + "'");
            }
        }
        return std::move(sys_);
    }

private:
    static void require_int(const SExpr &sort) {
        if (!sort.is_atom("Int")) sort.fail("unsupported sort '" + sort.str() + "' (only Int)");
    }

    void declare_fun(const SExpr &cmd) {
        if (cmd.items.size() != 4 || !cmd.items[1].is_atom() || !cmd.items[2].is_list())
            cmd.fail("malformed declare-fun");
        if (!cmd.items[3].is_atom("Bool")) cmd.items[3].fail("predicates must return Bool");
        for (const auto &s : cmd.items[2].items) require_int(s);
        const std::string &name = cmd.items[1].text;
        if (preds_.count(name)) cmd.items[1].fail("predicate '" + name + "' declared twice");
        ChcPredicate q{name, static_cast<unsigned>(cmd.items[2].items.size()),
                       static_cast<unsigned>(sys_.predicates.size() + 1)};
        preds_[name] = q.arity;
        sys_.predicates.push_back(q);
    }

    bool is_app(const SExpr &e) const {
        if (e.is_atom()) return preds_.count(e.text) > 0;
        return e.is_list() && !e.items.empty() && e.items[0].is_atom() && preds_.count(e.items[0].text) > 0;
    }

    PredApp app(const SExpr &e, const Resolver &resolve) const {
        PredApp a;
        a.pred = e.is_atom() ? e.text : e.items[0].text;
        std::size_t nargs = e.is_atom() ? 0 : e.items.size() - 1;
        if (nargs != preds_.at(a.pred)) e.fail("predicate '" + a.pred + "' applied to wrong number of arguments");
        for (std::size_t i = 1; i <= nargs; ++i) a.args.push_back(term_of(e.items[i], resolve));
        return a;
    }

    void no_apps_inside(const SExpr &e) const {
        if (is_app(e)) e.fail("predicate application under a connective is unsupported");
        if (e.is_list())
            for (const auto &c : e.items) no_apps_inside(c);
    }

    void flatten(const SExpr &e, std::vector<const SExpr *> &out) const {
        if (e.head_is("and")) {
            for (std::size_t i = 1; i < e.items.size(); ++i) flatten(e.items[i], out);
        } else {
            out.push_back(&e);
        }
    }

    void clause(const SExpr &a) {
        std::set<std::string> bound = globals_;
        const SExpr *matrix = &a;
        if (a.head_is("forall")) {
            if (a.items.size() != 3 || !a.items[1].is_list()) a.fail("malformed forall");
            for (const auto &b : a.items[1].items) {
                if (!b.is_list() || b.items.size() != 2 || !b.items[0].is_atom()) b.fail("malformed binder");
                require_int(b.items[1]);
                bound.insert(b.items[0].text);
            }
            matrix = &a.items[2];
        }
        Resolver resolve = [&](const SExpr &s) -> Var {
            if (!bound.count(s.text)) s.fail("unknown symbol '" + s.text + "'");
            return Var::aux(s.text);
        };

        std::vector<const SExpr *> body;
        const SExpr *head = nullptr;
        if (matrix->head_is("=>")) {
            if (matrix->items.size() < 3) matrix->fail("'=>' takes at least two arguments");
            for (std::size_t i = 1; i + 1 < matrix->items.size(); ++i) flatten(matrix->items[i], body);
            head = &matrix->items.back();
        } else if (matrix->head_is("not")) {
            if (matrix->items.size() != 2) matrix->fail("'not' takes one argument");
            flatten(matrix->items[1], body);
        } else {
            head = matrix;
        }

        ChcClause c;
        for (const auto &v : bound) c.vars.push_back(Var::aux(v));
        std::vector<Formula> constraint;
        for (const SExpr *b : body) {
            if (is_app(*b)) {
                if (c.body) b->fail("non-linear CHC unsupported (more than one body predicate)");
                c.body = app(*b, resolve);
            } else {
                no_apps_inside(*b);
                constraint.push_back(formula_of(*b, resolve));
            }
        }
        if (head && is_app(*head)) {
            c.head = app(*head, resolve);
            c.kind = c.body ? ChcClause::Kind::Rule : ChcClause::Kind::Fact;
        } else {
            if (head && !head->is_atom("false")) {
                no_apps_inside(*head);
                constraint.push_back(Formula::negation(formula_of(*head, resolve)));
            }
            if (!c.body) a.fail("query without a body predicate is unsupported");
            c.kind = ChcClause::Kind::Query;
        }
        c.constraint = normalize(Formula::conj(std::move(constraint)));
        sys_.clauses.push_back(std::move(c));
    }

    ChcSystem sys_;
    std::map<std::string, unsigned> preds_;
    std::set<std::string> globals_;
};

}  // namespace

ChcSystem parse_chc(std::string_view text) { return ChcReader().read(text); }

SafetyProblem encode_chc(const ChcSystem &sys) {
    unsigned k = 0;
    for (const auto &q : sys.predicates) k = std::max(k, q.arity);
    SafetyProblem p;
    const Var loc = Var::pre("loc");
    p.pre_vars.push_back(loc);
    for (unsigned j = 1; j <= k; ++j) p.pre_vars.push_back(Var::pre("a" + std::to_string(j)));

    std::vector<Formula> init;
    std::vector<Formula> trans;
    std::vector<Formula> err;
    for (std::size_t ci = 0; ci < sys.clauses.size(); ++ci) {
        const ChcClause &c = sys.clauses[ci];
        std::map<Var, IntTerm> subst;
        std::vector<std::pair<Var, IntTerm>> pending;  // slot = argument, resolved after binding

        auto bind = [&](const PredApp &a, bool post) {
            for (std::size_t j = 0; j < a.args.size(); ++j) {
                Var slot = p.pre_vars[j + 1];
                if (post) slot = slot.primed();
                const IntTerm &arg = a.args[j];
                const auto &ms = arg.monomials();
                bool plain = ms.size() == 1 && ms.begin()->first.size() == 1 && ms.begin()->second == 1;
                if (plain && !subst.count(ms.begin()->first[0])) subst.emplace(ms.begin()->first[0], IntTerm::of(slot));
                else pending.emplace_back(slot, arg);
            }
        };
        if (c.body) bind(*c.body, false);
        if (c.head) bind(*c.head, c.kind == ChcClause::Kind::Rule);
        unsigned fresh = 0;
        for (const auto &v : c.vars)
            if (!subst.count(v)) subst.emplace(v, IntTerm::of(Var::aux("e!" + std::to_string(ci) + "!" + std::to_string(++fresh))));

        std::vector<Formula> conj;
        auto at = [&](const Var &x, unsigned id) {
            conj.push_back(Formula::lit(Literal::make(IntTerm::of(x), RelOp::Eq, static_cast<std::int64_t>(id))));
        };
        if (c.body) at(loc, sys.predicate(c.body->pred).id);
        if (c.head) at(c.kind == ChcClause::Kind::Rule ? loc.primed() : loc, sys.predicate(c.head->pred).id);
        for (const auto &[slot, arg] : pending)
            conj.push_back(Formula::lit(Literal::make(IntTerm::of(slot), RelOp::Eq, arg.substitute(subst))));
        conj.push_back(c.constraint.substitute(subst));
        Formula f = normalize(Formula::conj(std::move(conj)));
        (c.kind == ChcClause::Kind::Fact ? init : c.kind == ChcClause::Kind::Rule ? trans : err).push_back(f);
    }
    auto join = [](std::vector<Formula> fs) { return fs.size() == 1 ? fs.front() : Formula::disj(std::move(fs)); };
    p.init = join(std::move(init));
    p.trans = join(std::move(trans));
    p.err = join(std::move(err));
    p.validate();
    return p;
}

SafetyProblem load_problem(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    auto ends_with = [&](const char *suf) {
        std::string s(suf);
        return path.size() >= s.size() && path.compare(path.size() - s.size(), s.size(), s) == 0;
    };
    bool chc = ends_with(".smt2") ||
               (!ends_with(".sp") && (text.find("set-logic HORN") != std::string::npos ||
                                      text.find("declare-fun") != std::string::npos));
    return chc ? encode_chc(parse_chc(text)) : parse_native(text);
}

}  // namespace abmc
