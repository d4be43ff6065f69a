#pragma once

#include "abmc/formula.hpp"

namespace abmc {

/// Safety problem (init, trans, err) over a fixed vector of pre-variables.
///
/// init and err range over the pre-variables. Problems produced from CHCs
/// may also use auxiliary (existentially quantified) variables there; such
/// names never clash with the auxiliaries of `trans`.
struct SafetyProblem {
    std::vector<Var> pre_vars;
    Formula init;
    Formula trans;
    Formula err;

    [[nodiscard]] std::size_t dim() const { return pre_vars.size(); }
    [[nodiscard]] std::vector<Var> post_vars() const;

    /// Checks the variable discipline and NNF; throws std::invalid_argument.
    void validate() const;

    bool operator==(const SafetyProblem &) const = default;
};

}  // namespace abmc
