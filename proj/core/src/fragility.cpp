#include "ehdn/fragility.hpp"

#include <algorithm>
#include <cmath>

namespace ehdn {

double PiecewiseCurve::eval(double x) const {
    if (empty()) return 0.0;
    if (x <= v.front()) return p.front();
    if (x >= v.back()) return p.back();
    auto it = std::upper_bound(v.begin(), v.end(), x);
    size_t i = static_cast<size_t>(it - v.begin());
    double t = (x - v[i - 1]) / (v[i] - v[i - 1]);
    return p[i - 1] + t * (p[i] - p[i - 1]);
}

double pole_fragility(double v, bool hardened, const LineFragility& p) {
    const PoleCurve& c = p.pole[hardened ? 1 : 0];
    return std::min(c.a * std::exp(c.b * v), 1.0);
}

double wire_fragility(double v, bool hardened, const LineFragility& p) {
    const auto& w = p.wire[hardened ? 1 : 0];
    if (!w) return 0.0;
    double direct = w->direct.eval(v);
    double indirect = w->chi * w->indirect.eval(v);
    return clamp01(std::max(direct, indirect));
}

double line_failure_prob(double v, bool hardened, const GridLine& line, const LineFragility& p) {
    double fp = pole_fragility(v, hardened, p);
    double fw = wire_fragility(v, hardened, p);
    double survive = std::pow(1.0 - fp, line.poles) * std::pow(1.0 - fw, line.wire_segments);
    return clamp01(1.0 - survive);
}

double pipeline_failure_from_cumulative(double cum_rain, bool hardened, const Pipeline& pipe,
                                        const PipeFragility& p) {
    const PipeCurve& c = p.seg[hardened ? 1 : 0];
    double arg = c.z * cum_rain;
    if (arg <= 0.0) return 0.0;  // limit of the lognormal CDF as rain -> 0
    double seg = norm_cdf(std::log(arg) / c.sigma);
    return clamp01(1.0 - std::pow(1.0 - seg, pipe.segments));
}

double pipeline_failure_prob(std::span<const double> rain_history, bool hardened,
                             const Pipeline& pipe, const PipeFragility& p) {
    double cum = 0.0;
    for (double r : rain_history) {
        if (r < 0) fail_model("pipeline '{}': negative rainfall in history", pipe.id);
        cum += r;
    }
    return pipeline_failure_from_cumulative(cum, hardened, pipe, p);
}

namespace {

constexpr double kClampEps = 1e-12;

/// (k, b) so that k*d + b matches value and slope of f at d; degenerate
/// (0, 1) when the curve is saturated.
template <typename F>
std::pair<double, double> expand(F&& f, double d, double analytic_slope, bool have_analytic,
                                 double support_width) {
    double val = f(d);
    if (val >= 1.0 - kClampEps) return {0.0, 1.0};
    double k;
    if (have_analytic) {
        k = analytic_slope;
    } else {
        double h = std::max(1e-6, 0.01 * support_width);
        k = (f(d + h) - f(std::max(0.0, d - h))) / (h + std::min(d, h));
    }
    if (k < 0) k = 0;
    return {k, val - k * d};
}

}  // namespace

LinearizedCurve linearize_line(const GridLine& line, const LineFragility& p, double vbar,
                               double support_width) {
    LinearizedCurve out;
    out.expansion = vbar;
    for (int s = 0; s < 2; ++s) {
        bool hardened = s == 1;
        auto f = [&](double v) { return line_failure_prob(v, hardened, line, p); };
        bool closed_form = !p.wire[s].has_value();
        double slope = 0.0;
        if (closed_form) {
            // d/dv [1 - (1-a e^{bv})^N] = N (1-pe)^{N-1} * a b e^{bv}, 0 once clamped
            const PoleCurve& c = p.pole[s];
            double pe = c.a * std::exp(c.b * vbar);
            if (pe < 1.0)
                slope = line.poles * std::pow(1.0 - pe, line.poles - 1) * c.b * pe;
            else
                closed_form = false;  // clamped region; expand() handles it
        }
        auto [k, b] = expand(f, vbar, slope, closed_form, support_width);
        if (s == 0) {
            out.k0 = k;
            out.b0 = b;
        } else {
            out.k1 = k;
            out.b1 = b;
        }
    }
    return out;
}

LinearizedCurve linearize_pipe(const Pipeline& pipe, const PipeFragility& p, double cum_rbar,
                               double support_width) {
    LinearizedCurve out;
    out.expansion = cum_rbar;
    for (int s = 0; s < 2; ++s) {
        bool hardened = s == 1;
        auto f = [&](double r) { return pipeline_failure_from_cumulative(r, hardened, pipe, p); };
        const PipeCurve& c = p.seg[s];
        double slope = 0.0;
        bool analytic = cum_rbar > 0.0;
        if (analytic) {
            double u = std::log(c.z * cum_rbar) / c.sigma;
            double seg = norm_cdf(u);
            double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
            double dseg = pdf / (c.sigma * cum_rbar);
            slope = pipe.segments * std::pow(1.0 - seg, pipe.segments - 1) * dseg;
        }
        auto [k, b] = expand(f, cum_rbar, slope, analytic, support_width);
        if (s == 0) {
            out.k0 = k;
            out.b0 = b;
        } else {
            out.k1 = k;
            out.b1 = b;
        }
    }
    return out;
}

std::vector<LinearizedCurve> linearize_all(const Network& net, const FragilityParams& params,
                                           const std::vector<double>& dbar_eff,
                                           const std::vector<double>& support_width) {
    std::vector<LinearizedCurve> out(net.num_entries());
    for (int c = 0; c < net.num_components(); ++c) {
        for (int t = 0; t < net.periods; ++t) {
            int e = net.entry(c, t);
            if (net.comp_kind(c) == CompKind::Line)
                out[e] = linearize_line(net.lines[c], params.lines[c], dbar_eff[e],
                                        support_width[e]);
            else
                out[e] = linearize_pipe(net.pipes[net.comp_pipe(c)],
                                        params.pipes[net.comp_pipe(c)], dbar_eff[e],
                                        support_width[e]);
        }
    }
    return out;
}

MeanMap failure_mean_map(const Network& net, const std::vector<LinearizedCurve>& lin,
                         const std::vector<double>& dbar_eff) {
    MeanMap m;
    m.mu.resize(net.num_entries());
    for (int e = 0; e < net.num_entries(); ++e) {
        const auto& lc = lin[e];
        double d = dbar_eff[e];
        double unh = lc.k0 * d + lc.b0;
        double hard = lc.k1 * d + lc.b1;
        const double tol = 1e-9;
        if (unh < -tol || unh > 1 + tol || hard < -tol || hard > 1 + tol)
            fail_model("failure mean for component '{}' period {} leaves [0,1]: {} / {}",
                       net.comp_id(net.entry_comp(e)), net.entry_period(e), unh, hard);
        m.mu[e] = {unh, hard - unh, net.entry_comp(e)};
    }
    return m;
}

SecondMomentMap failure_second_moment_map(const Network& net,
                                          const std::vector<LinearizedCurve>& lin,
                                          const Eigen::MatrixXd& sigma_eff) {
    int n = net.num_entries();
    if (sigma_eff.rows() != n || sigma_eff.cols() != n)
        fail_model("sigma_eff dimension {} != number of failure entries {}", sigma_eff.rows(), n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma_eff);
    double lmin = es.eigenvalues().minCoeff();
    double lmax = es.eigenvalues().maxCoeff();
    if (lmin < -1e-8 * std::max(1.0, lmax))
        fail_model("intensity covariance not PSD: min eigenvalue {:.3e}", lmin);

    SecondMomentMap q;
    q.sigma_eff = sigma_eff;
    q.k0.resize(n);
    q.k1.resize(n);
    q.comp.resize(n);
    for (int e = 0; e < n; ++e) {
        q.k0[e] = lin[e].k0;
        q.k1[e] = lin[e].k1;
        q.comp[e] = net.entry_comp(e);
    }
    return q;
}

}  // namespace ehdn
