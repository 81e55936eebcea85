#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ehdn/fragility.hpp"
#include "ehdn/network.hpp"

namespace ehdn {

/// Intensity coordinate space: one (zone, period, kind) cell per wind speed
/// and rainfall value; kind 0 = wind (m/s), 1 = rain (mm/h).
struct IntensityIndex {
    int zones = 0, periods = 0;

    int size() const { return zones * periods * 2; }
    int at(int zone, int t, int kind) const { return (zone * periods + t) * 2 + kind; }
    int zone_of(int i) const { return i / (periods * 2); }
    int period_of(int i) const { return (i / 2) % periods; }
    int kind_of(int i) const { return i % 2; }
};

/// Forecast data backing the intensity ambiguity set: per-zone expected
/// peaks shaped by a shared ramp profile, per-kind variances, exponential
/// correlation in time and a flat cross-zone correlation.
struct Forecast {
    std::vector<double> wind_peak;  // per zone, m/s
    std::vector<double> rain_peak;  // per zone, mm/h
    std::vector<double> profile;    // per period multiplier in (0,1]
    double wind_var = 0.0;
    double rain_var = 0.0;
    double zone_corr = 0.0;
    double period_corr = 0.0;
    double gamma_d1 = 1.0;
    double gamma_d2 = 2.0;
    double gamma1 = 0.0;  // failure-set mean ratio
    double gamma2 = 1.0;  // failure-set second-moment ratio
    // ratios for the leakage chance constraint, calibrated on the projection
    // it actually uses; default to the set-level ratios when absent
    double hlcc_gamma1 = -1.0;
    double hlcc_gamma2 = -1.0;
};

/// Second-order moment ambiguity set of the disaster intensity.
struct IntensityAmbiguity {
    IntensityIndex index;
    Eigen::VectorXd dbar;     // expectations
    Eigen::MatrixXd qd;       // covariance
    Eigen::VectorXd lo, hi;   // support bounds
    double gamma_d1 = 1.0;
    double gamma_d2 = 2.0;
};

/// Validates dimensions, PSD-ness and support membership of the means.
IntensityAmbiguity build_intensity_set(const Network& net, const Forecast& fc);

/// Map intensity coordinates onto failure entries: a line entry reads its
/// zone wind at t, a pipeline entry reads accumulated zone rain up to t.
/// Returns the per-entry expected driving intensity, its support width and
/// the entry-space covariance L Qd L^T.
struct EntryIntensity {
    std::vector<double> dbar_eff;
    std::vector<double> support_width;
    Eigen::MatrixXd sigma_eff;
};
EntryIntensity map_intensity_to_entries(const Network& net, const IntensityAmbiguity& amb);

/// Sparse projection vector over failure entries.
struct ProjVec {
    std::vector<std::pair<int, double>> entries;

    double dot(const std::vector<double>& v) const {
        double s = 0;
        for (auto [e, c] : entries) s += c * v[e];
        return s;
    }
};

/// Standard basis vectors plus one aggregate indicator per (zone, period):
/// K = num_entries + zones * periods, every vector nonzero.
std::vector<ProjVec> select_projection_vectors(const Network& net);

/// Quantile bounds mu_check/mu_hat, exactly affine per binary component
/// (two-point interpolation of the clamped endpoint values).
struct QuantileMaps {
    std::vector<AffineEntry> lo, hi;
};
QuantileMaps quantile_bounds(const MeanMap& mu, const SecondMomentMap& q, double gamma1);

/// delta(x) = gamma2 f'Q~(x)f expanded over {1, x_c, x_c x_c'} monomials.
struct BinaryQuad {
    double constant = 0.0;
    std::vector<std::pair<int, double>> lin;             // coefficient on x_c
    std::vector<std::tuple<int, int, double>> quad;      // c < c' pairs

    double eval(const std::vector<int>& x) const {
        double s = constant;
        for (auto [c, v] : lin) s += v * x[c];
        for (auto [c, d, v] : quad) s += v * x[c] * x[d];
        return s;
    }
};

/// Lifted partial cross-moment ambiguity set in decision-affine form.
struct Lpcas {
    MeanMap mu;
    QuantileMaps bounds;
    SecondMomentMap q;
    std::vector<ProjVec> proj;
    std::vector<BinaryQuad> delta;  // parallel to proj
    int n_l = 1;                    // failure-count cap of the lifted support
    double gamma1 = 0.0;
    double gamma2 = 1.0;
    bool lifted = true;  // false drops the cross-moment rows (FMAS baseline)

    int num_entries() const { return static_cast<int>(mu.mu.size()); }
    /// exact lift floor w_i(a) = (f_i'(a - mu~(x)))^2
    double lift_value(int i, const std::vector<std::uint8_t>& a, const std::vector<int>& x) const;
};

Lpcas build_lpcas(const Network& net, const MeanMap& mu, const SecondMomentMap& q,
                  double gamma1, double gamma2, int n_l, bool lifted = true);

/// Smallest N such that P(#failures > N) < eps under independent
/// Bernoulli(mu_hat_i(0)) draws (Poisson-binomial tail).
int default_failure_cap(const QuantileMaps& bounds, double eps = 1e-3);

/// Posterior cross-validation of (gamma1, gamma2) on sampled intensity
/// scenarios evaluated through the exact nonlinear curves.
struct GammaCalibration {
    double gamma1 = 0.0;
    double gamma2 = 1.0;
    bool all_folds_passed = false;
};
GammaCalibration calibrate_gammas(const Network& net, const FragilityParams& params,
                                  const IntensityAmbiguity& amb, const MeanMap& mu,
                                  const SecondMomentMap& q,
                                  const std::vector<double>& gamma1_grid,
                                  const std::vector<double>& gamma2_grid, int num_samples,
                                  std::uint64_t seed, int folds = 5,
                                  bool include_indicator_noise = true);

/// Smallest ratios keeping the lifted set nonempty on a binary support: any
/// binary indicator has variance m(1-m), so each diagonal row needs
/// gamma2 * Q_ee to cover min over admissible means m of m(1-2mu) + mu^2.
/// Scans a gamma1 grid and returns the pair minimizing the required gamma2,
/// inflated by `safety`.
struct GammaSuggestion {
    double gamma1 = 0.0;
    double gamma2 = 1.0;
};
GammaSuggestion suggest_feasible_gammas(const MeanMap& mu, const SecondMomentMap& q,
                                        double safety = 1.5,
                                        const std::vector<std::uint8_t>* entry_mask = nullptr);

/// Smallest gamma2 keeping the lifted set nonempty at a given gamma1
/// (infinite when no finite value works at that gamma1).
double required_gamma2(const MeanMap& mu, const SecondMomentMap& q, double gamma1,
                       const std::vector<std::uint8_t>* entry_mask = nullptr);

namespace detail {
/// Truncated multivariate normal draws (rejection with clipping fallback),
/// one row per sample, deterministic per (seed, row).
Eigen::MatrixXd sample_intensity_matrix(const IntensityAmbiguity& amb, int n, std::uint64_t seed);
}  // namespace detail

}  // namespace ehdn
