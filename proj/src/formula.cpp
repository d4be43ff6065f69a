#include "abmc/formula.hpp"

#include <algorithm>
#include <sstream>

namespace abmc {

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("integer overflow in term arithmetic");
    return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("integer overflow in term arithmetic");
    return r;
}

}  // namespace

std::string Var::str() const {
    std::string s = name;
    if (kind == VarKind::Post) s += '\'';
    if (index) s += "^(" + std::to_string(*index) + ")";
    return s;
}

// ---------------------------------------------------------------- IntTerm

IntTerm::IntTerm(std::int64_t c) {
    if (c != 0) coeffs_.emplace(Monomial{}, c);
}

IntTerm IntTerm::of(const Var &v) { return monomial(1, {v}); }

IntTerm IntTerm::monomial(std::int64_t coeff, Monomial m) {
    std::sort(m.begin(), m.end());
    IntTerm t;
    t.add_monomial(m, coeff);
    return t;
}

void IntTerm::add_monomial(const Monomial &m, std::int64_t c) {
    if (c == 0) return;
    auto [it, inserted] = coeffs_.try_emplace(m, c);
    if (!inserted) {
        it->second = checked_add(it->second, c);
        if (it->second == 0) coeffs_.erase(it);
    }
}

std::int64_t IntTerm::constant() const { return coefficient({}); }

std::int64_t IntTerm::coefficient(const Monomial &m) const {
    auto it = coeffs_.find(m);
    return it == coeffs_.end() ? 0 : it->second;
}

bool IntTerm::is_constant() const {
    return coeffs_.empty() || (coeffs_.size() == 1 && coeffs_.begin()->first.empty());
}

unsigned IntTerm::degree() const {
    unsigned d = 0;
    for (const auto &[m, c] : coeffs_) d = std::max<unsigned>(d, static_cast<unsigned>(m.size()));
    return d;
}

std::set<Var> IntTerm::vars() const {
    std::set<Var> out;
    collect_vars(out);
    return out;
}

void IntTerm::collect_vars(std::set<Var> &out) const {
    for (const auto &[m, c] : coeffs_) out.insert(m.begin(), m.end());
}

bool IntTerm::mentions(const Var &v) const {
    for (const auto &[m, c] : coeffs_)
        if (std::find(m.begin(), m.end(), v) != m.end()) return true;
    return false;
}

IntTerm IntTerm::without_constant() const {
    IntTerm t = *this;
    t.coeffs_.erase(Monomial{});
    return t;
}

IntTerm IntTerm::rename(const std::function<Var(const Var &)> &f) const {
    IntTerm out;
    for (const auto &[m, c] : coeffs_) {
        Monomial r;
        r.reserve(m.size());
        for (const auto &v : m) r.push_back(f(v));
        std::sort(r.begin(), r.end());
        out.add_monomial(r, c);
    }
    return out;
}

IntTerm IntTerm::substitute(const std::map<Var, IntTerm> &s) const {
    IntTerm out;
    for (const auto &[m, c] : coeffs_) {
        IntTerm prod = c;
        Monomial rest;
        for (const auto &v : m) {
            auto it = s.find(v);
            if (it == s.end()) rest.push_back(v);
            else prod = prod * it->second;
        }
        out += prod * monomial(1, rest);
    }
    return out;
}

std::int64_t IntTerm::eval(const Valuation &sigma) const {
    std::int64_t sum = 0;
    for (const auto &[m, c] : coeffs_) {
        std::int64_t prod = c;
        for (const auto &v : m) {
            auto it = sigma.find(v);
            if (it == sigma.end()) throw EvalError("no value for variable " + v.str());
            prod = checked_mul(prod, it->second);
        }
        sum = checked_add(sum, prod);
    }
    return sum;
}

IntTerm &IntTerm::operator+=(const IntTerm &o) {
    for (const auto &[m, c] : o.coeffs_) add_monomial(m, c);
    return *this;
}

IntTerm &IntTerm::operator-=(const IntTerm &o) {
    for (const auto &[m, c] : o.coeffs_) add_monomial(m, checked_mul(c, -1));
    return *this;
}

IntTerm operator*(const IntTerm &a, const IntTerm &b) {
    IntTerm out;
    for (const auto &[ma, ca] : a.coeffs_) {
        for (const auto &[mb, cb] : b.coeffs_) {
            Monomial m;
            m.reserve(ma.size() + mb.size());
            std::merge(ma.begin(), ma.end(), mb.begin(), mb.end(), std::back_inserter(m));
            out.add_monomial(m, checked_mul(ca, cb));
        }
    }
    return out;
}

IntTerm operator-(const IntTerm &a) { return IntTerm{} - a; }

std::string IntTerm::str() const {
    if (coeffs_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    // constant last reads more naturally: x + y - 3
    auto emit = [&](const Monomial &m, std::int64_t c) {
        bool neg = c < 0;
        std::int64_t mag = neg ? -c : c;
        if (first) os << (neg ? "-" : "");
        else os << (neg ? " - " : " + ");
        first = false;
        if (m.empty()) {
            os << mag;
            return;
        }
        if (mag != 1) os << mag << "*";
        for (std::size_t i = 0; i < m.size(); ++i) os << (i ? "*" : "") << m[i].str();
    };
    for (const auto &[m, c] : coeffs_)
        if (!m.empty()) emit(m, c);
    if (auto c = constant(); c != 0) emit({}, c);
    return os.str();
}

// ---------------------------------------------------------------- Literal

Literal Literal::normalized(IntTerm t, Rel r) {
    if (r != Rel::Le) {
        auto it = std::find_if(t.monomials().begin(), t.monomials().end(),
                               [](const auto &mc) { return !mc.first.empty(); });
        bool flip = it != t.monomials().end() ? it->second < 0 : t.constant() < 0;
        if (flip) t = -t;
    }
    return {std::move(t), r};
}

Literal Literal::make(const IntTerm &lhs, RelOp op, const IntTerm &rhs) {
    IntTerm d = lhs - rhs;
    switch (op) {
    case RelOp::Le: return normalized(d, Rel::Le);
    case RelOp::Lt: return normalized(d + 1, Rel::Le);
    case RelOp::Ge: return normalized(-d, Rel::Le);
    case RelOp::Gt: return normalized(-d + 1, Rel::Le);
    case RelOp::Eq: return normalized(d, Rel::Eq);
    case RelOp::Ne: return normalized(d, Rel::Ne);
    }
    throw InternalError("bad relation");
}

Literal Literal::negate() const {
    switch (rel_) {
    case Rel::Le: return normalized(-term_ + 1, Rel::Le);  // p > 0  <=>  -p + 1 <= 0
    case Rel::Eq: return {term_, Rel::Ne};
    case Rel::Ne: return {term_, Rel::Eq};
    }
    throw InternalError("bad relation");
}

bool Literal::eval(const Valuation &sigma) const {
    std::int64_t v = term_.eval(sigma);
    switch (rel_) {
    case Rel::Le: return v <= 0;
    case Rel::Eq: return v == 0;
    case Rel::Ne: return v != 0;
    }
    throw InternalError("bad relation");
}

std::optional<bool> Literal::constant_value() const {
    if (!term_.is_constant()) return std::nullopt;
    return eval({});
}

Literal Literal::rename(const std::function<Var(const Var &)> &f) const {
    return normalized(term_.rename(f), rel_);
}

Literal Literal::substitute(const std::map<Var, IntTerm> &s) const {
    return normalized(term_.substitute(s), rel_);
}

std::string Literal::str() const {
    IntTerm lhs = term_.without_constant();
    std::int64_t rhs = -term_.constant();
    const char *op = rel_ == Rel::Le ? " <= " : rel_ == Rel::Eq ? " = " : " != ";
    return lhs.str() + op + std::to_string(rhs);
}

// ---------------------------------------------------------------- Formula

Formula Formula::lit(Literal l) {
    Formula f;
    f.kind_ = Kind::Lit;
    f.lit_ = std::move(l);
    return f;
}

Formula Formula::conj(std::vector<Formula> cs) {
    Formula f;
    f.kind_ = Kind::And;
    f.children_ = std::move(cs);
    return f;
}

Formula Formula::disj(std::vector<Formula> cs) {
    Formula f;
    f.kind_ = Kind::Or;
    f.children_ = std::move(cs);
    return f;
}

Formula Formula::negation(Formula g) {
    Formula f;
    f.kind_ = Kind::Not;
    f.children_.push_back(std::move(g));
    return f;
}

Formula Formula::conj_of(const std::vector<Literal> &ls) {
    std::vector<Formula> cs;
    cs.reserve(ls.size());
    for (const auto &l : ls) cs.push_back(lit(l));
    return conj(std::move(cs));
}

bool Formula::operator==(const Formula &o) const = default;

bool Formula::is_nnf() const {
    if (kind_ == Kind::Not) return false;
    return std::all_of(children_.begin(), children_.end(), [](const Formula &c) { return c.is_nnf(); });
}

bool Formula::eval(const Valuation &sigma) const {
    switch (kind_) {
    case Kind::Lit: return lit_.eval(sigma);
    case Kind::And:
        // Every child is evaluated so that missing variables are always reported.
        {
            bool r = true;
            for (const auto &c : children_) r = c.eval(sigma) && r;
            return r;
        }
    case Kind::Or: {
        bool r = false;
        for (const auto &c : children_) r = c.eval(sigma) || r;
        return r;
    }
    case Kind::Not: return !children_.front().eval(sigma);
    }
    throw InternalError("bad formula kind");
}

void Formula::collect_literals(std::vector<Literal> &out) const {
    if (kind_ == Kind::Lit) {
        out.push_back(lit_);
        return;
    }
    for (const auto &c : children_) c.collect_literals(out);
}

std::vector<Literal> Formula::literals() const {
    std::vector<Literal> out;
    collect_literals(out);
    return out;
}

std::set<Var> Formula::vars() const {
    std::set<Var> out;
    collect_vars(out);
    return out;
}

void Formula::collect_vars(std::set<Var> &out) const {
    if (kind_ == Kind::Lit) {
        lit_.term().collect_vars(out);
        return;
    }
    for (const auto &c : children_) c.collect_vars(out);
}

Formula Formula::rename(const std::function<Var(const Var &)> &f) const {
    if (kind_ == Kind::Lit) return lit(lit_.rename(f));
    Formula r = *this;
    for (auto &c : r.children_) c = c.rename(f);
    return r;
}

Formula Formula::substitute(const std::map<Var, IntTerm> &s) const {
    if (kind_ == Kind::Lit) return lit(lit_.substitute(s));
    Formula r = *this;
    for (auto &c : r.children_) c = c.substitute(s);
    return r;
}

std::string Formula::str() const {
    switch (kind_) {
    case Kind::Lit: return lit_.str();
    case Kind::And:
    case Kind::Or: {
        if (children_.empty()) return kind_ == Kind::And ? "true" : "false";
        if (children_.size() == 1) return children_.front().str();
        std::string sep = kind_ == Kind::And ? " /\\ " : " \\/ ";
        std::string s = "(";
        for (std::size_t i = 0; i < children_.size(); ++i) s += (i ? sep : "") + children_[i].str();
        return s + ")";
    }
    case Kind::Not: return "!" + children_.front().str();
    }
    return "?";
}

namespace {

Formula nnf(const Formula &f, bool negated) {
    using K = Formula::Kind;
    switch (f.kind()) {
    case K::Lit: return Formula::lit(negated ? f.literal().negate() : f.literal());
    case K::Not: return nnf(f.children().front(), !negated);
    case K::And:
    case K::Or: {
        std::vector<Formula> cs;
        cs.reserve(f.children().size());
        for (const auto &c : f.children()) cs.push_back(nnf(c, negated));
        bool is_and = (f.kind() == K::And) != negated;
        return is_and ? Formula::conj(std::move(cs)) : Formula::disj(std::move(cs));
    }
    }
    throw InternalError("bad formula kind");
}

}  // namespace

Formula to_nnf(const Formula &f) { return nnf(f, false); }

Var rename_mu(const Var &v, unsigned i) {
    if (v.indexed()) throw InternalError("rename_mu: variable " + v.str() + " is already indexed");
    return v.kind == VarKind::Post ? v.at(i + 1) : v.at(i);
}

Literal rename_mu(const Literal &l, unsigned i) {
    return l.rename([i](const Var &v) { return rename_mu(v, i); });
}

Formula rename_mu(const Formula &f, unsigned i) {
    return f.rename([i](const Var &v) { return rename_mu(v, i); });
}

Valuation unindex(const Valuation &sigma, const std::set<Var> &vars, unsigned i) {
    Valuation out;
    for (const auto &v : vars) {
        auto it = sigma.find(rename_mu(v, i));
        if (it != sigma.end()) out.emplace(v, it->second);
    }
    return out;
}

// ---------------------------------------------------------------- s-expressions

namespace {

std::string number(std::int64_t c) {
    if (c >= 0) return std::to_string(c);
    // magnitude via unsigned arithmetic so INT64_MIN prints correctly
    return "(- " + std::to_string(0 - static_cast<std::uint64_t>(c)) + ")";
}

}  // namespace

std::string to_sexpr(const IntTerm &t, const SexprStyle &style) {
    std::vector<std::string> parts;
    for (const auto &[m, c] : t.monomials()) {
        if (m.empty()) {
            parts.push_back(number(c));
            continue;
        }
        std::vector<std::string> factors;
        if (c != 1) factors.push_back(number(c));
        for (const auto &v : m) factors.push_back(style.symbol(v));
        if (factors.size() == 1) {
            parts.push_back(factors.front());
        } else {
            std::string s = "(*";
            for (const auto &f : factors) s += " " + f;
            parts.push_back(s + ")");
        }
    }
    if (parts.empty()) return "0";
    if (parts.size() == 1) return parts.front();
    std::string s = "(+";
    for (const auto &p : parts) s += " " + p;
    return s + ")";
}

std::string to_sexpr(const Literal &l, const SexprStyle &style) {
    if (auto v = l.constant_value()) return *v ? "true" : "false";
    std::string lhs = to_sexpr(l.term().without_constant(), style);
    std::string rhs = number(checked_mul(l.term().constant(), -1));
    switch (l.rel()) {
    case Rel::Le: return "(<= " + lhs + " " + rhs + ")";
    case Rel::Eq: return "(= " + lhs + " " + rhs + ")";
    case Rel::Ne: return style.smtlib ? "(not (= " + lhs + " " + rhs + "))" : "(!= " + lhs + " " + rhs + ")";
    }
    throw InternalError("bad relation");
}

std::string to_sexpr(const Formula &f, const SexprStyle &style) {
    using K = Formula::Kind;
    switch (f.kind()) {
    case K::Lit: return to_sexpr(f.literal(), style);
    case K::Not: return "(not " + to_sexpr(f.children().front(), style) + ")";
    case K::And:
    case K::Or: {
        bool is_and = f.kind() == K::And;
        if (f.children().empty()) return is_and ? "true" : "false";
        if (f.children().size() == 1) return to_sexpr(f.children().front(), style);
        std::string s = is_and ? "(and" : "(or";
        for (const auto &c : f.children()) s += " " + to_sexpr(c, style);
        return s + ")";
    }
    }
    throw InternalError("bad formula kind");
}

}  // namespace abmc
