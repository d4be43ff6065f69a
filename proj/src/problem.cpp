#include "abmc/problem.hpp"

#include <algorithm>

namespace abmc {

std::vector<Var> SafetyProblem::post_vars() const {
    std::vector<Var> out;
    out.reserve(pre_vars.size());
    for (const auto &x : pre_vars) out.push_back(x.primed());
    return out;
}

void SafetyProblem::validate() const {
    std::set<Var> pre(pre_vars.begin(), pre_vars.end());
    if (pre.size() != pre_vars.size()) throw std::invalid_argument("duplicate program variable");
    for (const auto &x : pre_vars)
        if (x.kind != VarKind::Pre || x.indexed()) throw std::invalid_argument("bad program variable " + x.str());

    std::set<Var> trans_aux;
    for (const auto &v : trans.vars()) {
        if (v.indexed() || v.kind == VarKind::Label) throw std::invalid_argument("bad variable in trans: " + v.str());
        if (v.kind == VarKind::Aux) trans_aux.insert(v);
        else if (!pre.count(v.unprimed())) throw std::invalid_argument("undeclared variable in trans: " + v.str());
    }
    auto check_state = [&](const Formula &f, const char *what) {
        for (const auto &v : f.vars()) {
            if (v.indexed() || v.kind == VarKind::Post || v.kind == VarKind::Label)
                throw std::invalid_argument(std::string("bad variable in ") + what + ": " + v.str());
            if (v.kind == VarKind::Aux && trans_aux.count(v))
                throw std::invalid_argument(std::string(what) + " shares auxiliary variable " + v.str() + " with trans");
            if (v.kind == VarKind::Pre && !pre.count(v))
                throw std::invalid_argument(std::string("undeclared variable in ") + what + ": " + v.str());
        }
    };
    check_state(init, "init");
    check_state(err, "err");
    for (const auto &v : init.vars())
        if (v.kind == VarKind::Aux && err.vars().count(v))
            throw std::invalid_argument("init shares auxiliary variable " + v.str() + " with err");
    if (!init.is_nnf() || !trans.is_nnf() || !err.is_nnf()) throw std::invalid_argument("formulas must be in NNF");
}

}  // namespace abmc
