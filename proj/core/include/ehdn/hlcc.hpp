#pragma once

#include <string>
#include <vector>

#include "ehdn/ambiguity.hpp"
#include "ehdn/fragility.hpp"
#include "ehdn/model_ir.hpp"
#include "ehdn/network.hpp"

namespace ehdn {

/// Distributionally robust cap on filter-counted failures: the probability
/// that s'a exceeds k_cc must stay below eps under every distribution in the
/// failure ambiguity set.
struct HlccSpec {
    std::vector<double> s;  // nonnegative selection over failure entries
    double k_cc = 1.0;
    double eps = 0.05;
    double gamma1 = 0.0;
    double gamma2 = 1.0;
};

/// Selection vector over all (SSA pipeline, period) entries.
HlccSpec make_ssa_hlcc(const Network& net, double k_cc, double eps, double gamma1, double gamma2);

/// One-sided tail bound for a distribution with mean mu and deviation sigma:
/// inf P(xi <= kprime) over that moment class.
double cantelli_inf(double mu, double sigma, double kprime);

/// inf over (mu, sigma) in the moment region {|mu| <= sqrt(gamma1 q),
/// mu^2 + sigma^2 <= gamma2 q} of the Cantelli bound at kprime = k_cc - mu_s.
/// Throws ModelError when k_cc < mu_s (solvability violated).
double worst_case_prob(double mu_s, double q, double gamma1, double gamma2, double k_cc);

/// Multiplier on sqrt(s'Q(x)s) in the deterministic equivalent; picks the
/// branch by gamma1/gamma2 <= eps (boundary assigned to the first branch,
/// where both coincide).
double hlcc_coefficient(double gamma1, double gamma2, double eps);

/// Left side s'mu(x) + coef * sqrt(s'Q(x)s) of the deterministic equivalent
/// evaluated at a binary hardening vector.
double hlcc_lhs(const HlccSpec& spec, const MeanMap& mu, const SecondMomentMap& q,
                const std::vector<int>& x);

/// Emit the second-order-cone form over the hardening variables x_vars:
/// coef * || C (s o k(x)) || <= k_cc - s'mu(x), with C'C the selected
/// entry covariance. Everything inside the norm is affine in x.
void emit_hlcc_soc(ModelIR& m, const std::vector<int>& x_vars, const HlccSpec& spec,
                   const MeanMap& mu, const SecondMomentMap& q, const std::string& name = "hlcc");

struct MinBudgetResult {
    bool feasible = false;
    double budget = 0.0;
    std::vector<int> hardening;          // per component
    double worst_case_probability = 0.0; // at the returned plan
    double achievable_probability = 0.0; // at full hardening (diagnostic)
};

/// Cheapest hardening satisfying the chance constraint alone (binary program
/// with the single cone row). Infeasible risk targets are reported with the
/// probability achievable under full hardening.
MinBudgetResult min_budget(const Network& net, const HlccSpec& spec, const MeanMap& mu,
                           const SecondMomentMap& q);

}  // namespace ehdn
