#pragma once

#include <string>
#include <vector>

#include "ehdn/common.hpp"

namespace ehdn {

enum class VarKind { Continuous, Binary };
enum class RowSense { LE, GE, EQ };

struct LinTerm {
    int var = -1;
    double coef = 0.0;
};

/// Affine expression sum(coef*var) + constant.
struct LinExpr {
    std::vector<LinTerm> terms;
    double constant = 0.0;

    LinExpr() = default;
    explicit LinExpr(double c) : constant(c) {}

    LinExpr& add(int var, double coef) {
        if (coef != 0.0) terms.push_back({var, coef});
        return *this;
    }
    LinExpr& operator+=(const LinExpr& o) {
        terms.insert(terms.end(), o.terms.begin(), o.terms.end());
        constant += o.constant;
        return *this;
    }
    double eval(const std::vector<double>& x) const {
        double v = constant;
        for (const auto& t : terms) v += t.coef * x[t.var];
        return v;
    }
    /// Merge duplicate variables and drop zeros.
    void compress();
};

struct VarDef {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lb = 0.0;
    double ub = kInf;
};

struct LinRow {
    LinExpr expr;  // constant folded into rhs at solve time
    RowSense sense = RowSense::LE;
    double rhs = 0.0;
    std::string name;
};

/// ||vec(x)||_2 <= rhs(x), every component affine.
struct SocRow {
    std::vector<LinExpr> vec;
    LinExpr rhs;
    std::string name;
};

/// Solver-agnostic mixed-binary program with linear and second-order-cone
/// constraints. Kept deliberately dumb: builders push rows, the solver lowers.
class ModelIR {
public:
    int add_var(std::string name, VarKind kind, double lb, double ub) {
        if (lb > ub + 1e-12) fail_model("variable {}: lb {} > ub {}", name, lb, ub);
        vars_.push_back({std::move(name), kind, lb, ub});
        return static_cast<int>(vars_.size()) - 1;
    }
    int add_continuous(std::string name, double lb, double ub) {
        return add_var(std::move(name), VarKind::Continuous, lb, ub);
    }
    int add_binary(std::string name) { return add_var(std::move(name), VarKind::Binary, 0.0, 1.0); }

    int add_row(LinExpr e, RowSense s, double rhs, std::string name = {}) {
        check_expr(e, name);
        rows_.push_back({std::move(e), s, rhs, std::move(name)});
        return static_cast<int>(rows_.size()) - 1;
    }
    int add_soc(std::vector<LinExpr> vec, LinExpr rhs, std::string name = {}) {
        for (const auto& e : vec) check_expr(e, name);
        check_expr(rhs, name);
        socs_.push_back({std::move(vec), std::move(rhs), std::move(name)});
        return static_cast<int>(socs_.size()) - 1;
    }

    void set_objective(LinExpr obj, bool minimize = true) {
        check_expr(obj, "objective");
        objective_ = std::move(obj);
        minimize_ = minimize;
    }

    int num_vars() const { return static_cast<int>(vars_.size()); }
    int num_rows() const { return static_cast<int>(rows_.size()); }
    int num_socs() const { return static_cast<int>(socs_.size()); }
    const std::vector<VarDef>& vars() const { return vars_; }
    const std::vector<LinRow>& rows() const { return rows_; }
    const std::vector<SocRow>& socs() const { return socs_; }
    const LinExpr& objective() const { return objective_; }
    bool minimize() const { return minimize_; }
    VarDef& var(int i) { return vars_.at(i); }
    const VarDef& var(int i) const { return vars_.at(i); }

    bool has_binaries() const {
        for (const auto& v : vars_)
            if (v.kind == VarKind::Binary) return true;
        return false;
    }

    /// Max violation of all linear rows, bounds and cones at point x.
    double max_violation(const std::vector<double>& x) const;

private:
    void check_expr(const LinExpr& e, const std::string& where) const {
        for (const auto& t : e.terms)
            if (t.var < 0 || t.var >= num_vars())
                fail_model("expression '{}' references undeclared variable {}", where, t.var);
    }

    std::vector<VarDef> vars_;
    std::vector<LinRow> rows_;
    std::vector<SocRow> socs_;
    LinExpr objective_;
    bool minimize_ = true;
};

}  // namespace ehdn
