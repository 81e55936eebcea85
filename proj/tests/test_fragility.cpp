#include <doctest.h>

#include <cmath>
#include <random>

#include "ehdn/ambiguity.hpp"
#include "ehdn/fragility.hpp"
#include "ehdn/instance_io.hpp"
#include "test_support.hpp"

using namespace ehdn;

namespace {

LineFragility pole_only(double a0, double b0, double a1 = 0, double b1 = 0) {
    LineFragility f;
    f.pole[0] = {a0, b0};
    f.pole[1] = {a1 > 0 ? a1 : a0, b1 > 0 ? b1 : b0};
    return f;
}

PiecewiseCurve flat(double p) { return {{0.0, 100.0}, {p, p}}; }

GridLine line_with(int poles, int segs) {
    GridLine l;
    l.id = "l";
    l.poles = poles;
    l.wire_segments = segs;
    return l;
}

Pipeline pipe_with(int segs) {
    Pipeline p;
    p.id = "p";
    p.segments = segs;
    return p;
}

}  // namespace

TEST_CASE("pole fragility matches scalar evaluation") {
    auto f = pole_only(1e-4, 0.18);
    CHECK(pole_fragility(40, false, f) == doctest::Approx(0.13394).epsilon(1e-4));
    CHECK(pole_fragility(0, false, f) == doctest::Approx(1e-4));
    auto clamped = pole_only(0.5, 0.1);
    CHECK(pole_fragility(60, false, clamped) == doctest::Approx(1.0));
}

TEST_CASE("wire fragility is the max of direct and scaled indirect") {
    LineFragility f = pole_only(1e-9, 0.01);
    WireCurves w;
    w.chi = 1.0;
    w.direct = flat(0.05);
    w.indirect = flat(0.12);
    f.wire[0] = w;
    CHECK(wire_fragility(10, false, f) == doctest::Approx(0.12));

    w.chi = 0.0;
    w.direct = flat(0.2);
    f.wire[0] = w;
    CHECK(wire_fragility(10, false, f) == doctest::Approx(0.2));

    w.chi = 1.0;
    w.direct = {{0.0, 50.0}, {0.0, 0.5}};
    w.indirect = {{0.0, 50.0}, {0.0, 0.4}};
    f.wire[0] = w;
    CHECK(wire_fragility(0, false, f) == doctest::Approx(0.0));
    // absent wire curves contribute nothing
    LineFragility bare = pole_only(1e-4, 0.18);
    CHECK(wire_fragility(50, false, bare) == doctest::Approx(0.0));
}

TEST_CASE("line failure probability accumulates over poles and segments") {
    // one pole at 0.2, one segment at 0.1 -> 1 - 0.8*0.9 = 0.28
    LineFragility f = pole_only(0.2, 1e-9);
    WireCurves w;
    w.chi = 0.0;
    w.direct = flat(0.1);
    w.indirect = flat(0.0);
    f.wire[0] = w;
    CHECK(line_failure_prob(0, false, line_with(1, 1), f) == doctest::Approx(0.28));

    LineFragility zero = pole_only(1e-12, 1e-9);
    CHECK(line_failure_prob(0, false, line_with(5, 5), zero) == doctest::Approx(0.0).epsilon(1e-9));

    LineFragility ten = pole_only(0.05, 1e-12);
    CHECK(line_failure_prob(0, false, line_with(10, 10), ten) ==
          doctest::Approx(0.40126).epsilon(1e-4));
}

TEST_CASE("pipeline fragility uses accumulated rainfall through the lognormal cdf") {
    PipeFragility f;
    f.seg[0] = {0.1, 1.0};
    f.seg[1] = {0.1, 1.0};
    std::vector<double> rain{10.0};  // z * sum = 1
    CHECK(pipeline_failure_prob(rain, false, pipe_with(1), f) == doctest::Approx(0.5));

    f.seg[0] = {0.01, 1.0};
    CHECK(pipeline_failure_prob(rain, false, pipe_with(1), f) ==
          doctest::Approx(0.01072).epsilon(1e-3));

    f.seg[0] = {0.1, 1.0};
    CHECK(pipeline_failure_prob(rain, false, pipe_with(2), f) == doctest::Approx(0.75));

    std::vector<double> zero{0.0, 0.0};
    CHECK(pipeline_failure_prob(zero, false, pipe_with(2), f) == doctest::Approx(0.0));

    // monotone nondecreasing in t for a fixed rainfall path
    std::vector<double> path{3.0, 5.0, 0.0, 7.0};
    double prev = 0.0;
    for (size_t t = 1; t <= path.size(); ++t) {
        double p = pipeline_failure_prob(std::span(path.data(), t), false, pipe_with(3), f);
        CHECK(p >= prev - 1e-15);
        prev = p;
    }
}

TEST_CASE("linearization matches the analytic slope at the expansion point") {
    // one-pole line reduces to the bare exponential curve
    GridLine l = line_with(1, 1);
    auto f = pole_only(1e-4, 0.18, 2e-5, 0.12);
    auto lc = linearize_line(l, f, 40.0, 70.0);
    double fv = 1e-4 * std::exp(0.18 * 40);
    CHECK(lc.k0 == doctest::Approx(0.18 * fv).epsilon(1e-9));
    CHECK(lc.b0 == doctest::Approx(fv - lc.k0 * 40).epsilon(1e-9));
    CHECK(lc.value(false) == doctest::Approx(fv));
    CHECK(lc.k0 == doctest::Approx(0.024109).epsilon(1e-4));

    // central finite difference as an independent slope oracle
    double h = 1e-5;
    auto eval = [&](double v) { return line_failure_prob(v, false, l, f); };
    double fd = (eval(40 + h) - eval(40 - h)) / (2 * h);
    CHECK(lc.k0 == doctest::Approx(fd).epsilon(1e-6));

    // hardened slope is flatter
    CHECK(lc.k1 <= lc.k0);

    // clamped region degenerates to (0, 1)
    auto sat = pole_only(0.5, 0.2);
    auto lc2 = linearize_line(l, sat, 60.0, 70.0);
    CHECK(lc2.k0 == doctest::Approx(0.0));
    CHECK(lc2.b0 == doctest::Approx(1.0));
}

TEST_CASE("pipe linearization slope checks against finite differences") {
    Pipeline p = pipe_with(3);
    PipeFragility f;
    f.seg[0] = {0.012, 0.5};
    f.seg[1] = {0.003, 0.5};
    double r = 40.0;
    auto lc = linearize_pipe(p, f, r, 50.0);
    auto eval = [&](double rr) { return pipeline_failure_from_cumulative(rr, false, p, f); };
    double h = 1e-4;
    double fd = (eval(r + h) - eval(r - h)) / (2 * h);
    CHECK(lc.k0 == doctest::Approx(fd).epsilon(1e-6));
    CHECK(lc.value(false) == doctest::Approx(eval(r)).epsilon(1e-12));
    CHECK(lc.k1 <= lc.k0 + 1e-12);
}

TEST_CASE("hardened curves sit below unhardened curves across the support") {
    Network net = parse_instance(test::data_path("toy3.instance"));
    FragilityParams fp = parse_fragility(test::data_path("toy3.fragility"), net);
    for (double v = 0; v <= 70; v += 3.5)
        for (size_t i = 0; i < net.lines.size(); ++i)
            CHECK(line_failure_prob(v, true, net.lines[i], fp.lines[i]) <=
                  line_failure_prob(v, false, net.lines[i], fp.lines[i]) + 1e-12);
    for (double r = 0; r <= 100; r += 5)
        for (size_t i = 0; i < net.pipes.size(); ++i)
            CHECK(pipeline_failure_from_cumulative(r, true, net.pipes[i], fp.pipes[i]) <=
                  pipeline_failure_from_cumulative(r, false, net.pipes[i], fp.pipes[i]) + 1e-12);
}

TEST_CASE("cumulative failure is bounded by max and sum of segment probabilities") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 0.2);
    for (int trial = 0; trial < 50; ++trial) {
        double fp = U(rng), fw = U(rng);
        int np = 1 + static_cast<int>(U(rng) * 40), nw = np;
        LineFragility f = pole_only(std::max(fp, 1e-12), 1e-9);
        WireCurves w;
        w.chi = 0;
        w.direct = flat(fw);
        w.indirect = flat(0);
        f.wire[0] = w;
        double p = line_failure_prob(0, false, line_with(np, nw), f);
        CHECK(p >= std::max(fp, fw) - 1e-12);
        CHECK(p <= np * fp + nw * fw + 1e-12);
    }
}

TEST_CASE("failure mean map is affine with the documented coefficients") {
    Network net = test::make_synthetic_net(1, 0, 1, 1);
    std::vector<LinearizedCurve> lin(1);
    lin[0].k0 = 0.02;
    lin[0].b0 = -0.5;
    lin[0].k1 = 0.004;
    lin[0].b1 = -0.1;
    lin[0].expansion = 40.0;
    MeanMap m = failure_mean_map(net, lin, {40.0});
    CHECK(m.mu[0].base == doctest::Approx(0.3));
    CHECK(m.mu[0].coef == doctest::Approx(-0.24));
    CHECK(m.value(0, false) == doctest::Approx(0.3));
    CHECK(m.value(0, true) == doctest::Approx(0.06));

    // values outside [0,1] raise a model error naming the component
    lin[0].b0 = -2.0;
    CHECK_THROWS_WITH_AS(failure_mean_map(net, lin, {40.0}), doctest::Contains("l0"), ModelError);
}

TEST_CASE("second moment map takes element-wise products with the intensity covariance") {
    Network net = test::make_synthetic_net(2, 0, 1, 1);
    std::vector<LinearizedCurve> lin(2);
    lin[0].k0 = 0.01;
    lin[1].k0 = 0.02;
    lin[0].k1 = 0.0;
    lin[1].k1 = 0.0;
    Eigen::MatrixXd qd(2, 2);
    qd << 4, 1, 1, 9;
    auto q = failure_second_moment_map(net, lin, qd);
    std::vector<int> x0{0, 0};
    CHECK(q.q(0, 0, x0) == doctest::Approx(4e-4));
    CHECK(q.q(0, 1, x0) == doctest::Approx(2e-4));
    CHECK(q.q(1, 1, x0) == doctest::Approx(3.6e-3));
    // hardening with k1 = 0 zeroes the row and column
    std::vector<int> x1{1, 0};
    CHECK(q.q(0, 0, x1) == doctest::Approx(0.0));
    CHECK(q.q(0, 1, x1) == doctest::Approx(0.0));

    // non-PSD covariance rejected with an eigenvalue report
    Eigen::MatrixXd bad(2, 2);
    bad << 1, 2, 2, 1;
    CHECK_THROWS_WITH_AS(failure_second_moment_map(net, lin, bad), doctest::Contains("eigenvalue"),
                         ModelError);
}

TEST_CASE("q~(x) stays psd at random binary hardening vectors") {
    Network net = test::make_synthetic_net(4, 2, 2, 2);
    FragilityParams fp;
    fp.lines.assign(4, pole_only(2e-5, 0.18, 4e-6, 0.12));
    PipeFragility pf;
    pf.seg[0] = {0.012, 0.5};
    pf.seg[1] = {0.003, 0.5};
    fp.pipes.assign(2, pf);

    Forecast fc;
    fc.wind_peak = {45, 42};
    fc.rain_peak = {16, 15};
    fc.profile = {0.5, 1.0};
    fc.wind_var = 4;
    fc.rain_var = 9;
    fc.zone_corr = 0.6;
    fc.period_corr = 0.5;
    fc.gamma1 = 0.05;
    fc.gamma2 = 10;
    auto amb = build_intensity_set(net, fc);
    auto ei = map_intensity_to_entries(net, amb);
    auto lin = linearize_all(net, fp, ei.dbar_eff, ei.support_width);
    auto q = failure_second_moment_map(net, lin, ei.sigma_eff);

    std::mt19937_64 rng(17);
    int ne = net.num_entries();
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<int> x(net.num_components());
        for (auto& v : x) v = static_cast<int>(rng() & 1);
        Eigen::MatrixXd qt(ne, ne);
        for (int e = 0; e < ne; ++e)
            for (int f2 = 0; f2 < ne; ++f2) qt(e, f2) = q.q(e, f2, x);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qt);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    }
}
