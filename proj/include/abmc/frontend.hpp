#pragma once

// Native .sp problems and linear CHCs in SMT-LIB 2 (HORN).

#include "abmc/problem.hpp"
#include "abmc/sexpr.hpp"

namespace abmc {

/// Native format:
///   (vars x y)          ; optionally (x Int)
///   (aux e)             ; optional auxiliaries
///   (init F) (trans F) (err F)
/// Post-variables are written x'. Throws ParseError.
SafetyProblem parse_native(std::string_view text);

/// Canonical native rendering; parse_native(print_native(p)) == p for
/// every problem produced by parse_native.
std::string print_native(const SafetyProblem &p);

struct ChcPredicate {
    std::string name;
    unsigned arity = 0;
    unsigned id = 0;  ///< location value, from 1 in declaration order
};

struct PredApp {
    std::string pred;
    std::vector<IntTerm> args;  ///< over the clause variables
};

/// Clause variables are represented as unindexed Aux variables named as in
/// the input.
struct ChcClause {
    enum class Kind : std::uint8_t { Fact, Rule, Query };
    Kind kind = Kind::Fact;
    std::vector<Var> vars;
    std::optional<PredApp> body;
    std::optional<PredApp> head;
    Formula constraint;
};

struct ChcSystem {
    std::vector<ChcPredicate> predicates;
    std::vector<ChcClause> clauses;

    [[nodiscard]] const ChcPredicate &predicate(const std::string &name) const;
    [[nodiscard]] std::size_t count(ChcClause::Kind k) const;
};

ChcSystem parse_chc(std::string_view text);

/// Location-variable encoding: variables loc, a1..ak (k = max arity).
SafetyProblem encode_chc(const ChcSystem &sys);

/// Reads a file, choosing the reader by extension (.sp native, .smt2 CHC)
/// or by content. Throws ParseError or std::runtime_error.
SafetyProblem load_problem(const std::string &path);

}  // namespace abmc
