#include "ehdn/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ehdn/rng.hpp"

namespace ehdn {

IntensityAmbiguity build_intensity_set(const Network& net, const Forecast& fc) {
    int nz = static_cast<int>(net.zones.size());
    int t_count = net.periods;
    if (static_cast<int>(fc.wind_peak.size()) != nz || static_cast<int>(fc.rain_peak.size()) != nz)
        fail_data("forecast: peak vectors must have one entry per zone ({} zones)", nz);
    if (static_cast<int>(fc.profile.size()) != t_count)
        fail_data("forecast: profile length {} != periods {}", fc.profile.size(), t_count);
    if (fc.wind_var < 0 || fc.rain_var < 0) fail_data("forecast: negative variance");
    if (fc.gamma_d1 < 0) fail_data("forecast: gamma_d1 must be >= 0");
    if (fc.gamma_d2 < std::max(1.0, fc.gamma_d1))
        fail_data("forecast: gamma_d2 must be >= max(1, gamma_d1)");
    if (std::fabs(fc.zone_corr) > 1 || std::fabs(fc.period_corr) > 1)
        fail_data("forecast: correlations must lie in [-1, 1]");

    IntensityAmbiguity amb;
    amb.index = {nz, t_count};
    amb.gamma_d1 = fc.gamma_d1;
    amb.gamma_d2 = fc.gamma_d2;
    int dim = amb.index.size();
    amb.dbar.resize(dim);
    amb.lo.resize(dim);
    amb.hi.resize(dim);
    amb.qd.resize(dim, dim);

    for (int z = 0; z < nz; ++z)
        for (int t = 0; t < t_count; ++t) {
            amb.dbar[amb.index.at(z, t, 0)] = fc.wind_peak[z] * fc.profile[t];
            amb.dbar[amb.index.at(z, t, 1)] = fc.rain_peak[z] * fc.profile[t];
            amb.lo[amb.index.at(z, t, 0)] = net.zones[z].wind_min[t];
            amb.hi[amb.index.at(z, t, 0)] = net.zones[z].wind_max[t];
            amb.lo[amb.index.at(z, t, 1)] = net.zones[z].rain_min[t];
            amb.hi[amb.index.at(z, t, 1)] = net.zones[z].rain_max[t];
        }

    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            if (amb.index.kind_of(i) != amb.index.kind_of(j)) {
                amb.qd(i, j) = 0.0;
                continue;
            }
            double var = amb.index.kind_of(i) == 0 ? fc.wind_var : fc.rain_var;
            double rho_z =
                amb.index.zone_of(i) == amb.index.zone_of(j) ? 1.0 : fc.zone_corr;
            double rho_t =
                std::pow(fc.period_corr, std::abs(amb.index.period_of(i) - amb.index.period_of(j)));
            amb.qd(i, j) = var * rho_z * rho_t;
        }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(amb.qd);
    double lmin = es.eigenvalues().minCoeff();
    if (lmin < -1e-8 * std::max(1.0, es.eigenvalues().maxCoeff()))
        fail_model("intensity covariance not PSD (min eigenvalue {:.3e}); check correlations",
                   lmin);
    for (int i = 0; i < dim; ++i)
        if (amb.dbar[i] < amb.lo[i] - 1e-9 || amb.dbar[i] > amb.hi[i] + 1e-9)
            fail_model("forecast mean {:.4g} outside support [{:.4g}, {:.4g}] (zone {}, period {})",
                       amb.dbar[i], amb.lo[i], amb.hi[i], amb.index.zone_of(i),
                       amb.index.period_of(i));
    return amb;
}

EntryIntensity map_intensity_to_entries(const Network& net, const IntensityAmbiguity& amb) {
    int ne = net.num_entries();
    int dim = amb.index.size();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(ne, dim);
    EntryIntensity out;
    out.dbar_eff.assign(ne, 0.0);
    out.support_width.assign(ne, 0.0);
    for (int c = 0; c < net.num_components(); ++c) {
        int z = net.comp_zone(c);
        for (int t = 0; t < net.periods; ++t) {
            int e = net.entry(c, t);
            if (net.comp_kind(c) == CompKind::Line) {
                l(e, amb.index.at(z, t, 0)) = 1.0;
            } else {
                for (int tau = 0; tau <= t; ++tau) l(e, amb.index.at(z, tau, 1)) = 1.0;
            }
        }
    }
    Eigen::VectorXd deff = l * amb.dbar;
    Eigen::VectorXd wlo = l * amb.lo;
    Eigen::VectorXd whi = l * amb.hi;
    out.sigma_eff = l * amb.qd * l.transpose();
    for (int e = 0; e < ne; ++e) {
        out.dbar_eff[e] = deff[e];
        out.support_width[e] = std::max(1e-9, whi[e] - wlo[e]);
    }
    return out;
}

std::vector<ProjVec> select_projection_vectors(const Network& net) {
    std::vector<ProjVec> f;
    int ne = net.num_entries();
    f.reserve(ne + net.zones.size() * net.periods);
    for (int e = 0; e < ne; ++e) f.push_back({{{e, 1.0}}});
    for (size_t z = 0; z < net.zones.size(); ++z)
        for (int t = 0; t < net.periods; ++t) {
            ProjVec v;
            for (int c = 0; c < net.num_components(); ++c)
                if (net.comp_zone(c) == static_cast<int>(z)) v.entries.push_back({net.entry(c, t), 1.0});
            if (!v.entries.empty()) f.push_back(std::move(v));
        }
    return f;
}

QuantileMaps quantile_bounds(const MeanMap& mu, const SecondMomentMap& q, double gamma1) {
    if (gamma1 < 0) fail_model("quantile_bounds: gamma1 must be >= 0");
    QuantileMaps out;
    int ne = static_cast<int>(mu.mu.size());
    out.lo.resize(ne);
    out.hi.resize(ne);
    for (int e = 0; e < ne; ++e) {
        double r0 = std::sqrt(std::max(0.0, gamma1 * q.q_diag(e, false)));
        double r1 = std::sqrt(std::max(0.0, gamma1 * q.q_diag(e, true)));
        double lo0 = clamp01(mu.value(e, false) - r0), lo1 = clamp01(mu.value(e, true) - r1);
        double hi0 = clamp01(mu.value(e, false) + r0), hi1 = clamp01(mu.value(e, true) + r1);
        out.lo[e] = {lo0, lo1 - lo0, mu.mu[e].comp};
        out.hi[e] = {hi0, hi1 - hi0, mu.mu[e].comp};
    }
    return out;
}

double Lpcas::lift_value(int i, const std::vector<std::uint8_t>& a,
                         const std::vector<int>& x) const {
    double s = 0.0;
    for (auto [e, c] : proj[i].entries) s += c * (static_cast<double>(a[e]) - mu.value(e, x));
    return s * s;
}

Lpcas build_lpcas(const Network& net, const MeanMap& mu, const SecondMomentMap& q, double gamma1,
                  double gamma2, int n_l, bool lifted) {
    if (n_l < 1) fail_model("build_lpcas: failure cap N^L must be >= 1");
    if (gamma2 < gamma1 || gamma1 < 0) fail_model("build_lpcas: need 0 <= gamma1 <= gamma2");
    Lpcas s;
    s.mu = mu;
    s.q = q;
    s.gamma1 = gamma1;
    s.gamma2 = gamma2;
    s.n_l = n_l;
    s.lifted = lifted;
    s.bounds = quantile_bounds(mu, q, gamma1);
    s.proj = select_projection_vectors(net);
    if (s.proj.empty()) fail_model("build_lpcas: empty projection family");

    s.delta.reserve(s.proj.size());
    for (const auto& f : s.proj) {
        BinaryQuad d;
        std::map<int, double> lin;
        std::map<std::pair<int, int>, double> quad;
        for (auto [e1, c1] : f.entries)
            for (auto [e2, c2] : f.entries) {
                double w = gamma2 * c1 * c2 * q.sigma_eff(e1, e2);
                if (w == 0.0) continue;
                int ca = q.comp[e1], cb = q.comp[e2];
                double k0a = q.k0[e1], k1a = q.k1[e1];
                double k0b = q.k0[e2], k1b = q.k1[e2];
                if (ca == cb) {
                    // x binary: k(x)k'(x) = k0 k0' (1-x) + k1 k1' x
                    d.constant += w * k0a * k0b;
                    lin[ca] += w * (k1a * k1b - k0a * k0b);
                } else {
                    d.constant += w * k0a * k0b;
                    lin[ca] += w * (k1a - k0a) * k0b;
                    lin[cb] += w * k0a * (k1b - k0b);
                    auto key = std::minmax(ca, cb);
                    quad[{key.first, key.second}] += w * (k1a - k0a) * (k1b - k0b);
                }
            }
        for (auto [c, v] : lin)
            if (v != 0.0) d.lin.push_back({c, v});
        for (auto [k, v] : quad)
            if (v != 0.0) d.quad.push_back({k.first, k.second, v});
        s.delta.push_back(std::move(d));
    }

    // structural sanity at the all-corners of interest
    std::vector<int> x0(net.num_components(), 0), x1(net.num_components(), 1);
    for (size_t i = 0; i < s.delta.size(); ++i) {
        if (s.delta[i].eval(x0) < -1e-9 || s.delta[i].eval(x1) < -1e-9)
            fail_model("build_lpcas: delta_{} negative at a hardening corner", i);
    }
    return s;
}

double required_gamma2(const MeanMap& mu, const SecondMomentMap& q, double gamma1,
                       const std::vector<std::uint8_t>* entry_mask) {
    int ne = static_cast<int>(mu.mu.size());
    double need = 1.0;
    for (int e = 0; e < ne; ++e) {
        if (entry_mask && !(*entry_mask)[e]) continue;
        for (int hard = 0; hard < 2; ++hard) {
            double m0 = mu.value(e, hard == 1);
            double qd = q.q_diag(e, hard == 1);
            double radius = std::sqrt(std::max(0.0, gamma1 * qd));
            double lo = clamp01(m0 - radius), hi = clamp01(m0 + radius);
            // min over m in [lo,hi] of m(1-m)+(m-m0)^2 = m(1-2 m0)+m0^2
            double m_star = m0 <= 0.5 ? lo : hi;
            double numer = m_star * (1 - 2 * m0) + m0 * m0;
            if (numer <= 1e-18) continue;
            if (qd <= 1e-18) return kInf;
            need = std::max(need, numer / qd);
        }
    }
    return need;
}

GammaSuggestion suggest_feasible_gammas(const MeanMap& mu, const SecondMomentMap& q,
                                        double safety,
                                        const std::vector<std::uint8_t>* entry_mask) {
    GammaSuggestion best;
    double best_g2 = kInf;
    for (double g1 : {0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0,
                      5.0, 8.0, 12.0, 20.0, 30.0, 45.0, 60.0, 90.0}) {
        double need = required_gamma2(mu, q, g1, entry_mask);
        if (need < best_g2) {
            best_g2 = need;
            best.gamma1 = g1;
        }
    }
    if (!std::isfinite(best_g2))
        fail_model("no gamma pair keeps the lifted set nonempty; some failure entry has a "
                   "positive mean with zero linearized variance");
    best.gamma2 = std::max(best_g2 * safety, std::max(1.0, best.gamma1));
    return best;
}

int default_failure_cap(const QuantileMaps& bounds, double eps) {
    // Poisson-binomial tail by direct DP, truncated once past the needed cap.
    std::vector<double> probs;
    for (const auto& e : bounds.hi) {
        double p = clamp01(e.at01(false));
        if (p > 0) probs.push_back(p);
    }
    int max_n = static_cast<int>(probs.size());
    for (int cap = 1; cap <= max_n; ++cap) {
        // P(count <= cap)
        std::vector<double> dp(cap + 1, 0.0);
        dp[0] = 1.0;
        double overflow = 0.0;
        for (double p : probs) {
            for (int k = cap; k >= 0; --k) {
                double stay = dp[k] * (1 - p);
                double up = dp[k] * p;
                if (k == cap)
                    overflow += up;
                else
                    dp[k + 1] += up;
                dp[k] = stay;
            }
        }
        (void)overflow;
        double tail = 1.0;
        for (double v : dp) tail -= v;
        if (tail < eps) return cap;
    }
    return std::max(1, max_n);
}

namespace detail {

Eigen::MatrixXd sample_intensity_matrix(const IntensityAmbiguity& amb, int n,
                                        std::uint64_t seed) {
    int dim = amb.index.size();
    Eigen::MatrixXd out(n, dim);
    Eigen::LLT<Eigen::MatrixXd> llt(amb.qd +
                                    1e-12 * Eigen::MatrixXd::Identity(dim, dim));
    Eigen::MatrixXd l = llt.matrixL();
    for (int s = 0; s < n; ++s) {
        auto rng = make_rng(seed, static_cast<std::uint64_t>(s));
        std::normal_distribution<double> nd(0.0, 1.0);
        Eigen::VectorXd d;
        bool ok = false;
        for (int tries = 0; tries < 100 && !ok; ++tries) {
            Eigen::VectorXd z(dim);
            for (int i = 0; i < dim; ++i) z[i] = nd(rng);
            d = amb.dbar + l * z;
            ok = true;
            for (int i = 0; i < dim; ++i)
                if (d[i] < amb.lo[i] || d[i] > amb.hi[i]) {
                    ok = false;
                    break;
                }
        }
        if (!ok)  // heavy truncation: clip the last draw onto the support
            for (int i = 0; i < dim; ++i) d[i] = std::clamp(d[i], amb.lo[i], amb.hi[i]);
        out.row(s) = d.transpose();
    }
    return out;
}

}  // namespace detail

GammaCalibration calibrate_gammas(const Network& net, const FragilityParams& params,
                                  const IntensityAmbiguity& amb, const MeanMap& mu,
                                  const SecondMomentMap& q,
                                  const std::vector<double>& gamma1_grid,
                                  const std::vector<double>& gamma2_grid, int num_samples,
                                  std::uint64_t seed, int folds, bool include_indicator_noise) {
    if (gamma1_grid.empty() || gamma2_grid.empty()) fail_data("calibrate_gammas: empty grid");
    if (num_samples < 100) fail_data("calibrate_gammas: need at least 100 samples");
    if (folds < 2) fail_data("calibrate_gammas: need at least 2 folds");

    Eigen::MatrixXd draws = detail::sample_intensity_matrix(amb, num_samples, seed);
    int ne = net.num_entries();
    auto proj = select_projection_vectors(net);

    // exact conditional failure probabilities per sample, both corners
    std::vector<Eigen::MatrixXd> pex(2, Eigen::MatrixXd(num_samples, ne));
    for (int s = 0; s < num_samples; ++s)
        for (int c = 0; c < net.num_components(); ++c) {
            int z = net.comp_zone(c);
            double cum_rain = 0.0;
            for (int t = 0; t < net.periods; ++t) {
                int e = net.entry(c, t);
                if (net.comp_kind(c) == CompKind::Line) {
                    double v = draws(s, amb.index.at(z, t, 0));
                    pex[0](s, e) = line_failure_prob(v, false, net.lines[c], params.lines[c]);
                    pex[1](s, e) = line_failure_prob(v, true, net.lines[c], params.lines[c]);
                } else {
                    cum_rain += draws(s, amb.index.at(z, t, 1));
                    int pi = net.comp_pipe(c);
                    pex[0](s, e) = pipeline_failure_from_cumulative(cum_rain, false,
                                                                    net.pipes[pi], params.pipes[pi]);
                    pex[1](s, e) = pipeline_failure_from_cumulative(cum_rain, true, net.pipes[pi],
                                                                    params.pipes[pi]);
                }
            }
        }

    // per-fold requirement on gamma1 (mean deviation) and gamma2 (projected
    // second moment, indicator noise included)
    std::vector<double> need1, need2;
    int per_fold = num_samples / folds;
    for (int fold = 0; fold < folds; ++fold) {
        int s0 = fold * per_fold;
        int s1 = (fold == folds - 1) ? num_samples : s0 + per_fold;
        for (int corner = 0; corner < 2; ++corner) {
            bool hardened = corner == 1;
            double g1 = 0.0, g2 = 0.0;
            Eigen::VectorXd mean = pex[corner].middleRows(s0, s1 - s0).colwise().mean();
            for (int e = 0; e < ne; ++e) {
                double diff = mean[e] - mu.value(e, hardened);
                double qd = q.q_diag(e, hardened);
                if (qd > 1e-14)
                    g1 = std::max(g1, diff * diff / qd);
                else if (std::fabs(diff) > 1e-6)
                    g1 = std::max(g1, 1e12);  // unrepresentable deviation
            }
            for (const auto& f : proj) {
                double qf = 0.0;
                for (auto [e1, c1] : f.entries)
                    for (auto [e2, c2] : f.entries)
                        qf += c1 * c2 * q.k(e1, hardened) * q.k(e2, hardened) *
                              q.sigma_eff(e1, e2);
                double emp = 0.0;
                for (int s = s0; s < s1; ++s) {
                    double dot = 0.0, noise = 0.0;
                    for (auto [e, cf] : f.entries) {
                        double p = pex[corner](s, e);
                        dot += cf * (p - mu.value(e, hardened));
                        if (include_indicator_noise) noise += cf * cf * p * (1 - p);
                    }
                    emp += dot * dot + noise;
                }
                emp /= (s1 - s0);
                if (qf > 1e-14)
                    g2 = std::max(g2, emp / qf);
                else if (emp > 1e-9)
                    g2 = std::max(g2, 1e12);
            }
            need1.push_back(g1);
            need2.push_back(g2);
        }
    }

    auto pick = [&](const std::vector<double>& grid, std::vector<double> need) {
        std::sort(need.begin(), need.end());
        // value that covers >= 95% of folds
        size_t idx = static_cast<size_t>(std::ceil(0.95 * need.size())) - 1;
        double target = need[std::min(idx, need.size() - 1)];
        for (double g : grid)
            if (g >= target) return std::pair<double, bool>{g, true};
        return std::pair<double, bool>{grid.back(), false};
    };
    auto [g1, ok1] = pick(gamma1_grid, need1);
    auto [g2, ok2] = pick(gamma2_grid, need2);
    return {g1, std::max(g2, g1), ok1 && ok2};
}

}  // namespace ehdn
