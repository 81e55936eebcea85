#include "ehdn/model_ir.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ehdn {

void LinExpr::compress() {
    std::map<int, double> acc;
    for (const auto& t : terms) acc[t.var] += t.coef;
    terms.clear();
    for (const auto& [v, c] : acc)
        if (c != 0.0) terms.push_back({v, c});
}

double ModelIR::max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (int j = 0; j < num_vars(); ++j) {
        worst = std::max(worst, vars_[j].lb - x[j]);
        worst = std::max(worst, x[j] - vars_[j].ub);
    }
    for (const auto& r : rows_) {
        double v = r.expr.eval(x);
        if (r.sense == RowSense::LE || r.sense == RowSense::EQ) worst = std::max(worst, v - r.rhs);
        if (r.sense == RowSense::GE || r.sense == RowSense::EQ) worst = std::max(worst, r.rhs - v);
    }
    for (const auto& s : socs_) {
        double nrm = 0.0;
        for (const auto& e : s.vec) {
            double v = e.eval(x);
            nrm += v * v;
        }
        worst = std::max(worst, std::sqrt(nrm) - s.rhs.eval(x));
    }
    return worst;
}

}  // namespace ehdn
