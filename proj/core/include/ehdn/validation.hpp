#pragma once

#include <cstdint>

#include "ehdn/ambiguity.hpp"
#include "ehdn/ccg.hpp"
#include "ehdn/dispatch.hpp"
#include "ehdn/fragility.hpp"
#include "ehdn/network.hpp"

namespace ehdn {

struct ValidationOptions {
    int samples = 1000;
    double quantile = 0.95;
    std::uint64_t seed = 0;
    int threads = 1;
    /// sample failures through the linearized curves instead of the exact
    /// nonlinear ones (the exact model is the honest default)
    bool linearized_curves = false;
};

struct ValidationReport {
    int samples = 0;
    std::uint64_t seed = 0;
    double quantile = 0.95;
    double mean_shed_cost = 0.0;
    double shed_cost_half_width = 0.0;  // 95% normal approximation
    double var_ssa = 0.0;               // quantile of the SSA failure count
    double mean_ssa_failures = 0.0;
    double mean_failures = 0.0;
};

/// Intensity scenario paths from the nominal (truncated normal) distribution.
Eigen::MatrixXd sample_intensity(const IntensityAmbiguity& amb, int n, std::uint64_t seed);

/// One failure realization: per component and period, Bernoulli draws with
/// the exact (or linearized) fragility conditional on surviving so far.
ScenarioRealization sample_failures(const Network& net, const FragilityParams& params,
                                    const std::vector<int>& hardening,
                                    const Eigen::VectorXd& intensity,
                                    const IntensityIndex& index, std::uint64_t seed,
                                    bool linearized = false,
                                    const std::vector<LinearizedCurve>* lin = nullptr);

/// Empirical mean dispatch cost of a plan under the nominal distribution,
/// with its 95% confidence half-width.
ValidationReport estimate_welsc(const Network& net, const FragilityParams& params,
                                const IntensityAmbiguity& amb, const HardeningPlan& plan,
                                const ValidationOptions& opt);

/// Quantile of the SSA failure count over sampled scenarios (dispatch-free).
ValidationReport var_ssa(const Network& net, const FragilityParams& params,
                         const IntensityAmbiguity& amb, const HardeningPlan& plan,
                         const ValidationOptions& opt);

/// Value of the lifted ambiguity set: relative worst-case-cost improvement of
/// the lifted-set plan over the first-order-moment plan, both priced under
/// the lifted set. Nonnegative whenever the lifted plan is optimal.
struct VolaResult {
    double vola = 0.0;
    double f_lpcas_at_lpcas = 0.0;
    double f_lpcas_at_fmas = 0.0;
    bool defined = true;
};
VolaResult vola(const Network& net, const Lpcas& lifted_set, const HardeningPlan& plan_fmas,
                const HardeningPlan& plan_lpcas, const CcgOptions& opt);

}  // namespace ehdn
