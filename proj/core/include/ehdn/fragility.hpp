#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ehdn/network.hpp"

namespace ehdn {

/// Piecewise-linear curve over intensity; flat extrapolation beyond the table.
struct PiecewiseCurve {
    std::vector<double> v;  // strictly increasing abscissae
    std::vector<double> p;  // values in [0,1]

    bool empty() const { return v.empty(); }
    double eval(double x) const;
};

/// a * exp(b * v), clamped to 1.
struct PoleCurve {
    double a = 0.0;
    double b = 0.0;
};

/// max(direct(v), chi * indirect(v)) per hardening state.
struct WireCurves {
    double chi = 0.0;
    PiecewiseCurve direct;
    PiecewiseCurve indirect;
};

/// Lognormal CDF parameters for one pipeline segment.
struct PipeCurve {
    double z = 0.0;      // > 0, 1/mm scale on accumulated rainfall
    double sigma = 1.0;  // > 0
};

struct LineFragility {
    PoleCurve pole[2];                    // [unhardened, hardened]
    std::optional<WireCurves> wire[2];
};

struct PipeFragility {
    PipeCurve seg[2];
};

/// Per-component curve parameters for both hardening states.
struct FragilityParams {
    std::vector<LineFragility> lines;  // parallel to Network::lines
    std::vector<PipeFragility> pipes;  // parallel to Network::pipes
};

double pole_fragility(double v, bool hardened, const LineFragility& p);
double wire_fragility(double v, bool hardened, const LineFragility& p);
double line_failure_prob(double v, bool hardened, const GridLine& line, const LineFragility& p);

/// Failure probability of the whole pipeline given accumulated rainfall
/// sum(rain_history); monotone nondecreasing as history grows.
double pipeline_failure_prob(std::span<const double> rain_history, bool hardened,
                             const Pipeline& pipe, const PipeFragility& p);
/// Same curve as a function of the accumulated rainfall directly.
double pipeline_failure_from_cumulative(double cum_rain, bool hardened, const Pipeline& pipe,
                                        const PipeFragility& p);

/// First-order expansion of one component curve at an expansion intensity.
/// Slope/intercept per hardening state; a curve clamped at 1 degenerates to
/// (k, b) = (0, 1).
struct LinearizedCurve {
    double k0 = 0.0, b0 = 0.0;  // unhardened
    double k1 = 0.0, b1 = 0.0;  // hardened
    double expansion = 0.0;

    double k(bool hardened) const { return hardened ? k1 : k0; }
    double value(bool hardened) const {
        return hardened ? k1 * expansion + b1 : k0 * expansion + b0;
    }
};

LinearizedCurve linearize_line(const GridLine& line, const LineFragility& p, double vbar,
                               double support_width);
LinearizedCurve linearize_pipe(const Pipeline& pipe, const PipeFragility& p, double cum_rbar,
                               double support_width);

/// value(x) = base + coef * x[comp]
struct AffineEntry {
    double base = 0.0;
    double coef = 0.0;
    int comp = -1;

    double at(int xc) const { return base + coef * xc; }
    double at01(bool hardened) const { return base + (hardened ? coef : 0.0); }
};

/// Affine map x -> mu~(x) over all failure entries (component x period).
struct MeanMap {
    std::vector<AffineEntry> mu;  // size num_entries

    double value(int e, bool hardened) const { return mu[e].at01(hardened); }
    double value(int e, const std::vector<int>& x) const { return mu[e].at(x[mu[e].comp]); }
};

/// Decision-dependent second moment Q~(x)_{ee'} = k_e(x) k_e'(x) Seff_{ee'},
/// with Seff the driving-intensity covariance mapped onto failure entries.
struct SecondMomentMap {
    Eigen::MatrixXd sigma_eff;         // num_entries x num_entries
    std::vector<double> k0, k1;        // slopes per entry
    std::vector<int> comp;             // hardening variable per entry

    double k(int e, bool hardened) const { return hardened ? k1[e] : k0[e]; }
    double k(int e, const std::vector<int>& x) const { return x[comp[e]] ? k1[e] : k0[e]; }
    double q(int e, int f, const std::vector<int>& x) const {
        return k(e, x) * k(f, x) * sigma_eff(e, f);
    }
    double q_diag(int e, bool hardened) const {
        double kk = k(e, hardened);
        return kk * kk * sigma_eff(e, e);
    }
    int size() const { return static_cast<int>(k0.size()); }
};

/// Per-entry linearizations at the expected driving intensities dbar_eff
/// (expected zone wind for lines, expected accumulated zone rain for pipes).
std::vector<LinearizedCurve> linearize_all(const Network& net, const FragilityParams& params,
                                           const std::vector<double>& dbar_eff,
                                           const std::vector<double>& support_width);

/// Builds mu~ as constant + coefficient on the component's hardening
/// variable; throws ModelError naming the component if a value leaves [0,1].
MeanMap failure_mean_map(const Network& net, const std::vector<LinearizedCurve>& lin,
                         const std::vector<double>& dbar_eff);

SecondMomentMap failure_second_moment_map(const Network& net,
                                          const std::vector<LinearizedCurve>& lin,
                                          const Eigen::MatrixXd& sigma_eff);

}  // namespace ehdn
