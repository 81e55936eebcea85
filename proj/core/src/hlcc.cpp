#include "ehdn/hlcc.hpp"

#include <algorithm>
#include <cmath>

#include "ehdn/solver.hpp"

namespace ehdn {

HlccSpec make_ssa_hlcc(const Network& net, double k_cc, double eps, double gamma1,
                       double gamma2) {
    HlccSpec spec;
    spec.s.assign(net.num_entries(), 0.0);
    for (int c : net.ssa_pipe_comps())
        for (int t = 0; t < net.periods; ++t) spec.s[net.entry(c, t)] = 1.0;
    spec.k_cc = k_cc;
    spec.eps = eps;
    spec.gamma1 = gamma1;
    spec.gamma2 = gamma2;
    bool any = false;
    for (double v : spec.s) any |= v != 0.0;
    if (!any) fail_model("HLCC: no SSA pipelines in the instance");
    if (eps <= 0 || eps >= 1) fail_model("HLCC: eps must lie in (0,1)");
    if (gamma1 < 0 || gamma2 < gamma1) fail_model("HLCC: need 0 <= gamma1 <= gamma2");
    if (k_cc < 0) fail_model("HLCC: k_cc must be >= 0");
    return spec;
}

double cantelli_inf(double mu, double sigma, double kprime) {
    if (kprime < mu) return 0.0;
    double d = kprime - mu;
    if (sigma == 0.0) return 1.0;  // point mass at mu <= kprime
    return d * d / (sigma * sigma + d * d);
}

double worst_case_prob(double mu_s, double q, double gamma1, double gamma2, double k_cc) {
    if (q < 0) fail_model("worst_case_prob: negative quadratic form {}", q);
    double kprime = k_cc - mu_s;
    if (kprime < -1e-12)
        fail_model("HLCC unsolvable: k_cc {} below the worst-case mean {}", k_cc, mu_s);
    kprime = std::max(kprime, 0.0);
    if (q == 0.0 || gamma2 == 0.0) return 1.0;  // deterministic mean below k_cc

    double m1 = std::sqrt(gamma1 * q);
    double radius = std::sqrt(gamma2 * q);
    if (kprime <= std::min(m1, radius) + 1e-15) return 0.0;

    // the bound decreases in sigma, so sigma sits on the circle; the ratio
    // sigma/(kprime-mu) peaks at mu = radius^2/kprime or at the mean cap m1
    double mu_star = std::min(m1, radius * radius / kprime);
    double smax = std::sqrt(std::max(0.0, radius * radius - mu_star * mu_star));
    double r = smax / (kprime - mu_star);
    return 1.0 / (1.0 + r * r);
}

double hlcc_coefficient(double gamma1, double gamma2, double eps) {
    if (eps <= 0 || eps >= 1) fail_model("HLCC: eps must lie in (0,1)");
    if (gamma2 <= 0) fail_model("HLCC: gamma2 must be > 0");
    if (gamma1 / gamma2 <= eps)
        return std::sqrt(gamma1) + std::sqrt((1.0 - eps) / eps * (gamma2 - gamma1));
    return std::sqrt(gamma2 / eps);
}

namespace {

/// Square root factor C (C^T C = M) of the selected-entry covariance.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return ev.asDiagonal() * es.eigenvectors().transpose();
}

std::vector<int> support(const std::vector<double>& s) {
    std::vector<int> out;
    for (size_t e = 0; e < s.size(); ++e)
        if (s[e] != 0.0) out.push_back(static_cast<int>(e));
    return out;
}

}  // namespace

double hlcc_lhs(const HlccSpec& spec, const MeanMap& mu, const SecondMomentMap& q,
                const std::vector<int>& x) {
    double mean = 0.0, quad = 0.0;
    auto es = support(spec.s);
    for (int e : es) mean += spec.s[e] * mu.value(e, x);
    for (int e1 : es)
        for (int e2 : es) quad += spec.s[e1] * spec.s[e2] * q.q(e1, e2, x);
    return mean + hlcc_coefficient(spec.gamma1, spec.gamma2, spec.eps) *
                      std::sqrt(std::max(0.0, quad));
}

void emit_hlcc_soc(ModelIR& m, const std::vector<int>& x_vars, const HlccSpec& spec,
                   const MeanMap& mu, const SecondMomentMap& q, const std::string& name) {
    auto es = support(spec.s);
    int d = static_cast<int>(es.size());
    if (d == 0) fail_model("HLCC: empty selection vector");
    Eigen::MatrixXd sub(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) sub(i, j) = q.sigma_eff(es[i], es[j]);
    Eigen::MatrixXd c = psd_sqrt(sub);
    double coef = hlcc_coefficient(spec.gamma1, spec.gamma2, spec.eps);

    // vec_i(x) = coef * sum_j C_ij s_j k_j(x); k affine per binary component
    std::vector<LinExpr> vec(d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            int e = es[j];
            double w = coef * c(i, j) * spec.s[e];
            if (w == 0.0) continue;
            vec[i].constant += w * q.k0[e];
            vec[i].add(x_vars[q.comp[e]], w * (q.k1[e] - q.k0[e]));
        }
    }
    LinExpr rhs;
    rhs.constant = spec.k_cc;
    for (int e : es) {
        rhs.constant -= spec.s[e] * mu.mu[e].base;
        rhs.add(x_vars[mu.mu[e].comp], -spec.s[e] * mu.mu[e].coef);
    }
    m.add_soc(std::move(vec), std::move(rhs), name);
}

MinBudgetResult min_budget(const Network& net, const HlccSpec& spec, const MeanMap& mu,
                           const SecondMomentMap& q) {
    MinBudgetResult res;
    res.hardening.assign(net.num_components(), 0);

    // components that influence the constraint
    std::vector<bool> involved(net.num_components(), false);
    for (size_t e = 0; e < spec.s.size(); ++e)
        if (spec.s[e] != 0.0) involved[mu.mu[e].comp] = true;

    std::vector<int> all_hard(net.num_components(), 0);
    for (int c = 0; c < net.num_components(); ++c) all_hard[c] = involved[c] ? 1 : 0;
    {
        double mean = 0.0, quad = 0.0;
        auto es = support(spec.s);
        for (int e : es) mean += spec.s[e] * mu.value(e, all_hard);
        for (int e1 : es)
            for (int e2 : es) quad += spec.s[e1] * spec.s[e2] * q.q(e1, e2, all_hard);
        if (mean > spec.k_cc + 1e-9) {
            res.feasible = false;
            res.achievable_probability = 0.0;
            return res;
        }
        res.achievable_probability =
            worst_case_prob(mean, quad, spec.gamma1, spec.gamma2, spec.k_cc);
        if (hlcc_lhs(spec, mu, q, all_hard) > spec.k_cc + 1e-9) {
            res.feasible = false;
            return res;
        }
    }

    ModelIR m;
    std::vector<int> x_vars(net.num_components(), -1);
    LinExpr obj;
    for (int c = 0; c < net.num_components(); ++c) {
        if (involved[c]) {
            x_vars[c] = m.add_binary(fmt::format("x[{}]", net.comp_id(c)));
            obj.add(x_vars[c], net.comp_harden_cost(c));
        } else {
            // uninvolved components never pay; model them as fixed zeros
            x_vars[c] = m.add_var(fmt::format("x[{}]", net.comp_id(c)), VarKind::Binary, 0.0, 0.0);
        }
    }
    emit_hlcc_soc(m, x_vars, spec, mu, q);
    m.set_objective(obj);
    auto r = solve_model(m);
    if (!r.feasible()) {
        res.feasible = false;
        return res;
    }
    res.feasible = true;
    res.budget = r.obj;
    for (int c = 0; c < net.num_components(); ++c)
        res.hardening[c] = r.x[x_vars[c]] > 0.5 ? 1 : 0;
    double mean = 0.0, quad = 0.0;
    auto es = support(spec.s);
    for (int e : es) mean += spec.s[e] * mu.value(e, res.hardening);
    for (int e1 : es)
        for (int e2 : es) quad += spec.s[e1] * spec.s[e2] * q.q(e1, e2, res.hardening);
    res.worst_case_probability = worst_case_prob(mean, quad, spec.gamma1, spec.gamma2, spec.k_cc);
    return res;
}

}  // namespace ehdn
