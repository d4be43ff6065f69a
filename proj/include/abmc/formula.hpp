#pragma once

// Integer terms, literals and quantifier-free formulas over program,
// auxiliary and label variables.

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace abmc {

/// Raised when an internal invariant is broken (a bug, never user error).
struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Raised by evaluation when a variable has no value.
struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class VarKind : std::uint8_t { Pre, Post, Aux, Label };

/// A variable. Unindexed variables live in transition formulas; indexed
/// ones (x^(i)) only ever appear in formulas handed to a solver.
struct Var {
    std::string name;
    VarKind kind = VarKind::Pre;
    std::optional<unsigned> index;

    static Var pre(std::string name) { return {std::move(name), VarKind::Pre, std::nullopt}; }
    static Var post(std::string name) { return {std::move(name), VarKind::Post, std::nullopt}; }
    static Var aux(std::string name) { return {std::move(name), VarKind::Aux, std::nullopt}; }
    static Var label() { return {"lbl", VarKind::Label, std::nullopt}; }

    [[nodiscard]] Var at(unsigned i) const { return {name, kind == VarKind::Post ? VarKind::Pre : kind, i}; }
    [[nodiscard]] Var primed() const { return {name, VarKind::Post, std::nullopt}; }
    [[nodiscard]] Var unprimed() const { return {name, VarKind::Pre, std::nullopt}; }
    [[nodiscard]] bool indexed() const { return index.has_value(); }

    /// Human-readable form: x, x', n, lbl, x^(3).
    [[nodiscard]] std::string str() const;

    auto operator<=>(const Var &) const = default;
};

using Valuation = std::map<Var, std::int64_t>;

/// Multiset of variables, kept sorted. The empty monomial is the constant 1.
using Monomial = std::vector<Var>;

/// Polynomial with integer coefficients in canonical form: like monomials
/// merged, zero coefficients dropped.
class IntTerm {
public:
    IntTerm() = default;
    IntTerm(std::int64_t c);  // NOLINT(google-explicit-constructor)
    static IntTerm of(const Var &v);
    static IntTerm monomial(std::int64_t coeff, Monomial m);

    [[nodiscard]] const std::map<Monomial, std::int64_t> &monomials() const { return coeffs_; }
    [[nodiscard]] std::int64_t constant() const;
    [[nodiscard]] std::int64_t coefficient(const Monomial &m) const;
    [[nodiscard]] bool is_constant() const;
    [[nodiscard]] bool is_zero() const { return coeffs_.empty(); }
    [[nodiscard]] unsigned degree() const;
    [[nodiscard]] std::set<Var> vars() const;
    void collect_vars(std::set<Var> &out) const;
    [[nodiscard]] bool mentions(const Var &v) const;

    /// The non-constant part (constant monomial removed).
    [[nodiscard]] IntTerm without_constant() const;

    [[nodiscard]] IntTerm rename(const std::function<Var(const Var &)> &f) const;
    [[nodiscard]] IntTerm substitute(const std::map<Var, IntTerm> &s) const;
    [[nodiscard]] std::int64_t eval(const Valuation &sigma) const;

    IntTerm &operator+=(const IntTerm &o);
    IntTerm &operator-=(const IntTerm &o);
    friend IntTerm operator+(IntTerm a, const IntTerm &b) { return a += b; }
    friend IntTerm operator-(IntTerm a, const IntTerm &b) { return a -= b; }
    friend IntTerm operator*(const IntTerm &a, const IntTerm &b);
    friend IntTerm operator-(const IntTerm &a);

    [[nodiscard]] std::string str() const;

    auto operator<=>(const IntTerm &) const = default;

private:
    void add_monomial(const Monomial &m, std::int64_t c);
    std::map<Monomial, std::int64_t> coeffs_;
};

/// Relations accepted when building a literal. Only Le, Eq and Ne survive
/// normalization.
enum class RelOp : std::uint8_t { Lt, Le, Eq, Ne, Ge, Gt };
enum class Rel : std::uint8_t { Le, Eq, Ne };

/// Canonical literal `p rel 0`.
///  - `>=`, `>` are rewritten by negating p; strict relations are tightened
///    over the integers (p < 0  becomes  p + 1 <= 0).
///  - For = and != the first non-constant monomial has positive coefficient.
class Literal {
public:
    Literal() = default;
    static Literal make(const IntTerm &lhs, RelOp op, const IntTerm &rhs = 0);

    [[nodiscard]] const IntTerm &term() const { return term_; }
    [[nodiscard]] Rel rel() const { return rel_; }

    [[nodiscard]] Literal negate() const;
    [[nodiscard]] bool eval(const Valuation &sigma) const;
    [[nodiscard]] bool mentions(const Var &v) const { return term_.mentions(v); }
    [[nodiscard]] Literal rename(const std::function<Var(const Var &)> &f) const;
    [[nodiscard]] Literal substitute(const std::map<Var, IntTerm> &s) const;

    /// Value of a variable-free literal; nullopt if it mentions variables.
    [[nodiscard]] std::optional<bool> constant_value() const;

    [[nodiscard]] std::string str() const;

    auto operator<=>(const Literal &) const = default;

private:
    Literal(IntTerm t, Rel r) : term_(std::move(t)), rel_(r) {}
    static Literal normalized(IntTerm t, Rel r);
    IntTerm term_;
    Rel rel_ = Rel::Le;
};

/// Boolean combination of literals. A formula without Not nodes is in NNF;
/// transition formulas are always kept that way.
class Formula {
public:
    enum class Kind : std::uint8_t { Lit, And, Or, Not };

    Formula() : kind_(Kind::And) {}  // true
    static Formula lit(Literal l);
    static Formula conj(std::vector<Formula> cs);
    static Formula disj(std::vector<Formula> cs);
    static Formula negation(Formula f);
    static Formula top() { return conj({}); }
    static Formula bottom() { return disj({}); }
    static Formula conj_of(const std::vector<Literal> &ls);

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] const Literal &literal() const { return lit_; }
    [[nodiscard]] const std::vector<Formula> &children() const { return children_; }

    [[nodiscard]] bool is_nnf() const;
    [[nodiscard]] bool eval(const Valuation &sigma) const;
    void collect_literals(std::vector<Literal> &out) const;
    [[nodiscard]] std::vector<Literal> literals() const;
    [[nodiscard]] std::set<Var> vars() const;
    void collect_vars(std::set<Var> &out) const;
    [[nodiscard]] Formula rename(const std::function<Var(const Var &)> &f) const;
    [[nodiscard]] Formula substitute(const std::map<Var, IntTerm> &s) const;

    [[nodiscard]] std::string str() const;

    bool operator==(const Formula &o) const;

private:
    Kind kind_;
    Literal lit_;
    std::vector<Formula> children_;
};

/// Push negations down to the literals (De Morgan, double negation,
/// relation flip). The result is negation-free and equivalent.
Formula to_nnf(const Formula &f);

/// Step renaming: non-post variables x become x^(i), post variables x'
/// become x^(i+1). Throws InternalError on an already indexed variable.
Var rename_mu(const Var &v, unsigned i);
Literal rename_mu(const Literal &l, unsigned i);
Formula rename_mu(const Formula &f, unsigned i);

/// Restriction of an indexed valuation to step i, expressed over the
/// unindexed variables `vars` (sigma o mu_i). Missing entries are skipped.
Valuation unindex(const Valuation &sigma, const std::set<Var> &vars, unsigned i);

/// Prefix rendering with a caller-chosen variable spelling. Literals print
/// as `(<= P K)`, `(= P K)` and disequalities as `(!= P K)` or, with
/// `smtlib`, `(not (= P K))`. Negative numbers print as `(- k)`.
struct SexprStyle {
    std::function<std::string(const Var &)> symbol;
    bool smtlib = false;
};
std::string to_sexpr(const IntTerm &t, const SexprStyle &style);
std::string to_sexpr(const Literal &l, const SexprStyle &style);
std::string to_sexpr(const Formula &f, const SexprStyle &style);

}  // namespace abmc
