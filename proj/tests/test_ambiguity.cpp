#include <doctest.h>

#include <cmath>
#include <random>

#include "ehdn/ambiguity.hpp"
#include "ehdn/instance_io.hpp"
#include "test_support.hpp"

using namespace ehdn;

namespace {

struct Setup {
    Network net;
    FragilityParams fp;
    IntensityAmbiguity amb;
    EntryIntensity ei;
    std::vector<LinearizedCurve> lin;
    MeanMap mu;
    SecondMomentMap q;
};

Setup make_setup(int n_lines, int n_pipes, int n_zones, int periods, double zone_corr = 0.6) {
    Setup s;
    s.net = test::make_synthetic_net(n_lines, n_pipes, n_zones, periods);
    LineFragility lf;
    lf.pole[0] = {2e-5, 0.18};
    lf.pole[1] = {4e-6, 0.12};
    s.fp.lines.assign(n_lines, lf);
    PipeFragility pf;
    pf.seg[0] = {0.012, 0.5};
    pf.seg[1] = {0.003, 0.5};
    s.fp.pipes.assign(n_pipes, pf);
    Forecast fc;
    fc.wind_peak.assign(n_zones, 45);
    fc.rain_peak.assign(n_zones, 16);
    fc.profile.assign(periods, 1.0);
    for (int t = 0; t < periods; ++t)
        fc.profile[t] = periods == 1 ? 1.0 : 0.5 + 0.5 * std::min(t, periods - 1 - t) /
                                                       std::max(1.0, (periods - 1) / 2.0);
    fc.wind_var = 4;
    fc.rain_var = 9;
    fc.zone_corr = zone_corr;
    fc.period_corr = 0.5;
    fc.gamma1 = 0.05;
    fc.gamma2 = 10;
    s.amb = build_intensity_set(s.net, fc);
    s.ei = map_intensity_to_entries(s.net, s.amb);
    s.lin = linearize_all(s.net, s.fp, s.ei.dbar_eff, s.ei.support_width);
    s.mu = failure_mean_map(s.net, s.lin, s.ei.dbar_eff);
    s.q = failure_second_moment_map(s.net, s.lin, s.ei.sigma_eff);
    return s;
}

}  // namespace

TEST_CASE("intensity set carries the configured variances and ramp means") {
    Network net = parse_instance(test::data_path("toy3.instance"));
    Forecast fc = parse_forecast(test::data_path("toy3.forecast"), net);
    auto amb = build_intensity_set(net, fc);
    int iw = amb.index.at(0, 0, 0);
    CHECK(amb.qd(iw, iw) == doctest::Approx(4.0));
    int ir = amb.index.at(1, 1, 1);
    CHECK(amb.qd(ir, ir) == doctest::Approx(9.0));
    CHECK(amb.dbar[amb.index.at(0, 0, 0)] == doctest::Approx(31.5));  // 42 * 0.75
    CHECK(amb.dbar[amb.index.at(0, 1, 0)] == doctest::Approx(42.0));

    // zero covariance degenerates but is accepted
    Forecast det = fc;
    det.wind_var = 0;
    det.rain_var = 0;
    CHECK_NOTHROW(build_intensity_set(net, det));

    // means outside the support are rejected
    Forecast bad = fc;
    bad.wind_peak[0] = 100;  // support max is 70
    CHECK_THROWS_AS(build_intensity_set(net, bad), ModelError);
}

TEST_CASE("entry mapping accumulates rain and keeps wind per-period") {
    auto s = make_setup(1, 1, 1, 3);
    // line entries read zone wind at t
    CHECK(s.ei.dbar_eff[s.net.entry(0, 1)] ==
          doctest::Approx(s.amb.dbar[s.amb.index.at(0, 1, 0)]));
    // pipe entries read accumulated rain
    double acc = s.amb.dbar[s.amb.index.at(0, 0, 1)] + s.amb.dbar[s.amb.index.at(0, 1, 1)];
    CHECK(s.ei.dbar_eff[s.net.entry(1, 1)] == doctest::Approx(acc));
    // accumulated-rain variance grows with t
    int p0 = s.net.entry(1, 0), p2 = s.net.entry(1, 2);
    CHECK(s.ei.sigma_eff(p2, p2) > s.ei.sigma_eff(p0, p0));
}

TEST_CASE("quantile bounds are symmetric radii around the mean, clamped") {
    Network net = test::make_synthetic_net(1, 0, 1, 1);
    std::vector<LinearizedCurve> lin(1);
    lin[0].k0 = 0.2;
    lin[0].k1 = 0.1;
    lin[0].b0 = 0.3 - 0.2 * 1.0;
    lin[0].b1 = 0.2 - 0.1 * 1.0;
    MeanMap mu = failure_mean_map(net, lin, {1.0});
    Eigen::MatrixXd qd(1, 1);
    qd << 1.0;
    auto q = failure_second_moment_map(net, lin, qd);
    // mu=0.3, Q_ii = 0.04, gamma1=0.25 -> radius 0.1
    auto b = quantile_bounds(mu, q, 0.25);
    CHECK(b.lo[0].at01(false) == doctest::Approx(0.2));
    CHECK(b.hi[0].at01(false) == doctest::Approx(0.4));

    auto tight = quantile_bounds(mu, q, 0.0);
    CHECK(tight.lo[0].at01(false) == doctest::Approx(0.3));
    CHECK(tight.hi[0].at01(false) == doctest::Approx(0.3));

    // clamped at zero when the radius overshoots
    lin[0].b0 = 0.02 - 0.2;
    mu = failure_mean_map(net, lin, {1.0});
    auto c = quantile_bounds(mu, q, 0.25);
    CHECK(c.lo[0].at01(false) == doctest::Approx(0.0));
}

TEST_CASE("projection family is basis plus zone-period aggregates") {
    {
        Network net = test::make_synthetic_net(2, 0, 1, 1);
        auto f = select_projection_vectors(net);
        REQUIRE(f.size() == 3);
        CHECK(f[0].entries == std::vector<std::pair<int, double>>{{0, 1.0}});
        CHECK(f[1].entries == std::vector<std::pair<int, double>>{{1, 1.0}});
        CHECK(f[2].entries.size() == 2);
    }
    {
        // six components over three zones: K = 6T + 3T
        int T = 2;
        Network net = test::make_synthetic_net(3, 3, 3, T);
        auto f = select_projection_vectors(net);
        CHECK(static_cast<int>(f.size()) == 6 * T + 3 * T);
        for (const auto& v : f) CHECK_FALSE(v.entries.empty());
    }
}

TEST_CASE("lpcas delta matches direct recomputation on all corners") {
    auto s = make_setup(3, 2, 2, 2);
    auto set = build_lpcas(s.net, s.mu, s.q, 0.05, 10.0, 2);
    int nc = s.net.num_components();
    REQUIRE(nc == 5);
    for (int mask = 0; mask < (1 << nc); ++mask) {
        std::vector<int> x(nc);
        for (int c = 0; c < nc; ++c) x[c] = (mask >> c) & 1;
        for (size_t i = 0; i < set.proj.size(); ++i) {
            double direct = 0.0;
            for (auto [e1, c1] : set.proj[i].entries)
                for (auto [e2, c2] : set.proj[i].entries)
                    direct += 10.0 * c1 * c2 * s.q.q(e1, e2, x);
            CHECK(set.delta[i].eval(x) == doctest::Approx(direct).epsilon(1e-10));
            CHECK(set.delta[i].eval(x) >= -1e-12);
        }
        // quantile maps bracket the mean map at every corner
        for (int e = 0; e < s.net.num_entries(); ++e) {
            double lo = set.bounds.lo[e].at(x[s.mu.mu[e].comp]);
            double hi = set.bounds.hi[e].at(x[s.mu.mu[e].comp]);
            double mid = s.mu.value(e, x);
            CHECK(lo <= mid + 1e-12);
            CHECK(mid <= hi + 1e-12);
        }
    }
}

TEST_CASE("scalar lpcas delta example") {
    Network net = test::make_synthetic_net(1, 0, 1, 1);
    std::vector<LinearizedCurve> lin(1);
    lin[0].k0 = 0.02;
    lin[0].k1 = 0.004;
    lin[0].b0 = 0.1;
    lin[0].b1 = 0.05;
    MeanMap mu = failure_mean_map(net, lin, {0.0});
    Eigen::MatrixXd qd(1, 1);
    qd << 4.0;
    auto q = failure_second_moment_map(net, lin, qd);
    auto set = build_lpcas(net, mu, q, 0.0, 1.0, 1);
    std::vector<int> x0{0};
    CHECK(set.delta[0].eval(x0) == doctest::Approx(1.6e-3));
    CHECK_THROWS_AS(build_lpcas(net, mu, q, 0.0, 1.0, 0), ModelError);
}

TEST_CASE("independent bernoulli family with matched moments satisfies the lpcas rows") {
    auto s = make_setup(2, 1, 1, 1);
    // choose gamma2 just large enough that diag(mu(1-mu)) <= gamma2 * Q~ along
    // every projection, then verify the expanded rows hold exactly
    std::vector<int> x(s.net.num_components(), 0);
    auto proj = select_projection_vectors(s.net);
    double needed = 1.0;
    for (const auto& f : proj) {
        double noise = 0.0, qf = 0.0;
        for (auto [e, c] : f.entries) {
            double m = s.mu.value(e, false);
            noise += c * c * m * (1 - m);
        }
        for (auto [e1, c1] : f.entries)
            for (auto [e2, c2] : f.entries) qf += c1 * c2 * s.q.q(e1, e2, x);
        if (qf > 1e-14) needed = std::max(needed, noise / qf);
    }
    auto set = build_lpcas(s.net, s.mu, s.q, 0.01, needed * 1.0001, 2);
    // under independent Bernoulli(mu~(x)): E[a]=mu~ and
    // E[(f'(a-mu~))^2] = sum f_e^2 mu_e (1-mu_e)
    for (size_t i = 0; i < set.proj.size(); ++i) {
        double ew = 0.0;
        for (auto [e, c] : set.proj[i].entries) {
            double m = s.mu.value(e, false);
            ew += c * c * m * (1 - m);
        }
        CHECK(ew <= set.delta[i].eval(x) + 1e-12);
    }
    for (int e = 0; e < s.net.num_entries(); ++e) {
        CHECK(set.bounds.lo[e].at01(false) <= s.mu.value(e, false) + 1e-12);
        CHECK(s.mu.value(e, false) <= set.bounds.hi[e].at01(false) + 1e-12);
    }
}

TEST_CASE("default failure cap shrinks with safer systems") {
    auto s = make_setup(4, 2, 2, 2);
    auto tight = quantile_bounds(s.mu, s.q, 0.01);
    int cap = default_failure_cap(tight, 1e-3);
    CHECK(cap >= 1);
    int cap_loose = default_failure_cap(tight, 1e-6);
    CHECK(cap_loose >= cap);
}

TEST_CASE("gamma calibration on exactly-linear data returns small ratios") {
    // fragility that IS linear over the support: one wire segment carrying a
    // linear table, poles negligible; the linearized model then has no error
    Network net = test::make_synthetic_net(3, 0, 1, 2);
    for (auto& l : net.lines) {
        l.poles = 1;
        l.wire_segments = 1;
    }
    FragilityParams fp;
    LineFragility lf;
    lf.pole[0] = {1e-12, 1e-6};
    lf.pole[1] = {1e-12, 1e-6};
    WireCurves w0;
    w0.chi = 0.0;
    w0.direct = {{0.0, 70.0}, {0.0, 0.35}};  // f(v) = 0.005 v
    w0.indirect = {{0.0, 70.0}, {0.0, 0.0}};
    WireCurves w1 = w0;
    w1.direct = {{0.0, 70.0}, {0.0, 0.14}};  // hardened: 0.002 v
    lf.wire[0] = w0;
    lf.wire[1] = w1;
    fp.lines.assign(3, lf);

    Forecast fc;
    fc.wind_peak = {40};
    fc.rain_peak = {14};
    fc.profile = {0.75, 1.0};
    fc.wind_var = 4;
    fc.rain_var = 9;
    fc.zone_corr = 0.5;
    fc.period_corr = 0.5;
    fc.gamma1 = 0.05;
    fc.gamma2 = 10;
    auto amb = build_intensity_set(net, fc);
    auto ei = map_intensity_to_entries(net, amb);
    auto lin = linearize_all(net, fp, ei.dbar_eff, ei.support_width);
    auto mu = failure_mean_map(net, lin, ei.dbar_eff);
    auto q = failure_second_moment_map(net, lin, ei.sigma_eff);

    std::vector<double> g1{0.001, 0.01, 0.05, 0.1, 0.5, 1.0};
    std::vector<double> g2{0.5, 0.8, 1.0, 1.3, 1.6, 2.0, 5.0, 20.0};
    auto cal = calibrate_gammas(net, fp, amb, mu, q, g1, g2, 600, 7, 4,
                                /*include_indicator_noise=*/false);
    CHECK(cal.all_folds_passed);
    CHECK(cal.gamma1 <= 0.1);
    CHECK(cal.gamma2 <= 1.6);

    // injected linearization error inflates the needed ratios
    MeanMap biased = mu;
    for (auto& e : biased.mu) e.base = clamp01(e.base + 0.05);
    auto cal2 = calibrate_gammas(net, fp, amb, biased, q, g1, g2, 600, 7, 4, false);
    CHECK(cal2.gamma1 > cal.gamma1);

    CHECK_THROWS_AS(calibrate_gammas(net, fp, amb, mu, q, {}, g2, 600, 7, 4, false), DataError);
}

TEST_CASE("intensity samples respect support and concentrate near the mean") {
    Network net = parse_instance(test::data_path("toy3.instance"));
    Forecast fc = parse_forecast(test::data_path("toy3.forecast"), net);
    auto amb = build_intensity_set(net, fc);
    auto draws = detail::sample_intensity_matrix(amb, 2000, 42);
    for (int s = 0; s < draws.rows(); ++s)
        for (int i = 0; i < draws.cols(); ++i) {
            CHECK(draws(s, i) >= amb.lo[i] - 1e-12);
            CHECK(draws(s, i) <= amb.hi[i] + 1e-12);
        }
    Eigen::VectorXd mean = draws.colwise().mean();
    for (int i = 0; i < mean.size(); ++i) CHECK(std::fabs(mean[i] - amb.dbar[i]) < 0.5);

    // degenerate support pins the samples
    Network net2 = net;
    for (auto& z : net2.zones)
        for (int t = 0; t < net2.periods; ++t) {
            z.wind_min[t] = z.wind_max[t] = 10.0;
            z.rain_min[t] = z.rain_max[t] = 5.0;
        }
    Forecast fc2 = fc;
    fc2.wind_peak = {10.0 / 0.5, 10.0 / 0.5};  // profile 0.5, 1.0 -> means hit 10 only at t=1
    // simpler: zero variance with means on the degenerate support
    fc2.wind_var = 0;
    fc2.rain_var = 0;
    fc2.wind_peak = {20, 20};
    fc2.rain_peak = {10, 10};
    Network net3 = net2;
    for (auto& z : net3.zones)
        for (int t = 0; t < net3.periods; ++t) {
            z.wind_min[t] = 0;
            z.wind_max[t] = 70;
            z.rain_min[t] = 0;
            z.rain_max[t] = 50;
        }
    auto amb3 = build_intensity_set(net3, fc2);
    auto d3 = detail::sample_intensity_matrix(amb3, 10, 1);
    for (int s = 0; s < d3.rows(); ++s)
        for (int i = 0; i < d3.cols(); ++i) CHECK(d3(s, i) == doctest::Approx(amb3.dbar[i]));
}
