#include <doctest.h>

#include <cmath>
#include <random>

#include "ehdn/hlcc.hpp"
#include "ehdn/instance_io.hpp"
#include "test_support.hpp"

using namespace ehdn;

namespace {

/// Grid-search oracle over the (mu, sigma) moment region of the worst-case
/// probability; relies only on the bound being decreasing in sigma, so sigma
/// sits on the circle mu^2 + sigma^2 = gamma2 q.
double grid_oracle(double mu_s, double q, double g1, double g2, double k_cc, double res = 1e-3) {
    double kprime = k_cc - mu_s;
    if (q <= 0 || g2 <= 0) return kprime >= 0 ? 1.0 : 0.0;
    double m1 = std::sqrt(g1 * q), radius = std::sqrt(g2 * q);
    double best = 1.0;
    double lo = -std::min(m1, radius), hi = std::min(m1, radius);
    int steps = static_cast<int>(std::ceil((hi - lo) / (res * std::max(1.0, radius)))) + 1;
    for (int i = 0; i <= steps; ++i) {
        double mu = lo + (hi - lo) * i / steps;
        double smax = std::sqrt(std::max(0.0, radius * radius - mu * mu));
        best = std::min(best, cantelli_inf(mu, smax, kprime));
    }
    return best;
}

}  // namespace

TEST_CASE("cantelli bound basics") {
    CHECK(cantelli_inf(0, 1, 1) == doctest::Approx(0.5));
    CHECK(cantelli_inf(2, 1, 1) == doctest::Approx(0.0));  // kprime < mu
    CHECK(cantelli_inf(0.2, 0.6, 1) == doctest::Approx(0.64));
}

TEST_CASE("worst-case probability against the grid-search oracle") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        double g1 = 0.5 * U(rng);
        double g2 = g1 + 2.0 * U(rng) + 1e-6;
        double q = 0.5 * U(rng) + 1e-4;
        double mu_s = U(rng);
        double k_cc = mu_s + 2.0 * U(rng);  // keep solvable
        double closed = worst_case_prob(mu_s, q, g1, g2, k_cc);
        double grid = grid_oracle(mu_s, q, g1, g2, k_cc);
        CHECK(std::fabs(closed - grid) < 2e-3);
        ++checked;
    }
    CHECK(checked == 300);

    // deterministic family: probability one
    CHECK(worst_case_prob(0.4, 0.1, 0, 0, 1.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(worst_case_prob(2.0, 0.1, 0.1, 1.0, 1.0), ModelError);
}

TEST_CASE("soc branch coefficients match hand arithmetic") {
    // gamma1/gamma2 <= eps branch
    CHECK(hlcc_coefficient(0.01, 1.0, 0.05) == doctest::Approx(4.4367).epsilon(1e-4));
    // ratio 0.25 > eps: second branch sqrt(0.16/0.05)
    CHECK(hlcc_coefficient(0.04, 0.16, 0.05) == doctest::Approx(1.78885).epsilon(1e-5));
    // boundary gamma1 = eps*gamma2: both branches coincide
    double eps = 0.07, g2 = 0.9, g1 = eps * g2;
    double a = std::sqrt(g1) + std::sqrt((1 - eps) / eps * (g2 - g1));
    CHECK(a == doctest::Approx(std::sqrt(g2 / eps)).epsilon(1e-12));
    CHECK(hlcc_coefficient(g1, g2, eps) == doctest::Approx(std::sqrt(g2 / eps)).epsilon(1e-12));
}

TEST_CASE("deterministic equivalent iff worst-case probability reaches 1-eps") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        double g1 = 0.4 * U(rng);
        double g2 = g1 + 1.5 * U(rng) + 1e-6;
        double eps = 0.02 + 0.3 * U(rng);
        double q = U(rng) + 1e-5;
        double mu_s = 0.5 * U(rng);
        double k_cc = mu_s + 3.0 * U(rng) + 1e-6;
        double lhs = mu_s + hlcc_coefficient(g1, g2, eps) * std::sqrt(q);
        bool soc_holds = lhs <= k_cc;
        double p = worst_case_prob(mu_s, q, g1, g2, k_cc);
        // skip razor-edge ties at the tolerance of the closed form
        if (std::fabs(p - (1 - eps)) < 1e-3 || std::fabs(lhs - k_cc) < 1e-9) continue;
        CHECK(soc_holds == (p >= 1 - eps));
    }
}

TEST_CASE("hlcc lhs is monotone nonincreasing under hardening") {
    Network net = parse_instance(test::data_path("toy3.instance"));
    FragilityParams fp = parse_fragility(test::data_path("toy3.fragility"), net);
    Forecast fc = parse_forecast(test::data_path("toy3.forecast"), net);
    auto amb = build_intensity_set(net, fc);
    auto ei = map_intensity_to_entries(net, amb);
    auto lin = linearize_all(net, fp, ei.dbar_eff, ei.support_width);
    auto mu = failure_mean_map(net, lin, ei.dbar_eff);
    auto q = failure_second_moment_map(net, lin, ei.sigma_eff);
    HlccSpec spec = make_ssa_hlcc(net, 1.0, 0.05, fc.gamma1, fc.gamma2);

    int nc = net.num_components();
    for (int mask = 0; mask < (1 << nc); ++mask) {
        std::vector<int> x(nc);
        for (int c = 0; c < nc; ++c) x[c] = (mask >> c) & 1;
        double base = hlcc_lhs(spec, mu, q, x);
        for (int c = 0; c < nc; ++c) {
            if (x[c]) continue;
            auto y = x;
            y[c] = 1;
            CHECK(hlcc_lhs(spec, mu, q, y) <= base + 1e-9);
        }
    }
}

TEST_CASE("emitted cone matches the closed-form left side at binary points") {
    Network net = parse_instance(test::data_path("toy3.instance"));
    FragilityParams fp = parse_fragility(test::data_path("toy3.fragility"), net);
    Forecast fc = parse_forecast(test::data_path("toy3.forecast"), net);
    auto amb = build_intensity_set(net, fc);
    auto ei = map_intensity_to_entries(net, amb);
    auto lin = linearize_all(net, fp, ei.dbar_eff, ei.support_width);
    auto mu = failure_mean_map(net, lin, ei.dbar_eff);
    auto q = failure_second_moment_map(net, lin, ei.sigma_eff);
    HlccSpec spec = make_ssa_hlcc(net, 1.0, 0.05, fc.gamma1, fc.gamma2);

    ModelIR m;
    std::vector<int> xs;
    for (int c = 0; c < net.num_components(); ++c) xs.push_back(m.add_binary("x"));
    emit_hlcc_soc(m, xs, spec, mu, q);
    REQUIRE(m.num_socs() == 1);
    const auto& soc = m.socs()[0];
    for (int mask = 0; mask < (1 << net.num_components()); ++mask) {
        std::vector<double> x(net.num_components());
        std::vector<int> xi(net.num_components());
        for (int c = 0; c < net.num_components(); ++c) {
            xi[c] = (mask >> c) & 1;
            x[c] = xi[c];
        }
        double nrm = 0;
        for (const auto& comp : soc.vec) {
            double v = comp.eval(x);
            nrm += v * v;
        }
        nrm = std::sqrt(nrm);
        double lhs_model = nrm - soc.rhs.eval(x);          // <= 0 iff constraint holds
        double lhs_closed = hlcc_lhs(spec, mu, q, xi) - spec.k_cc;
        CHECK(lhs_model == doctest::Approx(lhs_closed).epsilon(1e-9));
    }
}

TEST_CASE("min budget on a single-pipeline toy hardens exactly that pipeline") {
    // one SSA pipeline whose unhardened mean violates the constraint and
    // whose hardened mean satisfies it: the optimum buys that hardening
    Network net = test::make_synthetic_net(0, 1, 1, 1);
    net.pipes[0].in_ssa = true;
    net.pipes[0].harden_cost = 12345;
    std::vector<LinearizedCurve> lin(1);
    lin[0].k0 = 0.01;
    lin[0].b0 = 0.6 - 0.01 * 30;  // unhardened mean 0.6
    lin[0].k1 = 0.002;
    lin[0].b1 = 0.05 - 0.002 * 30;  // hardened mean 0.05
    MeanMap mu = failure_mean_map(net, lin, {30.0});
    Eigen::MatrixXd qd(1, 1);
    qd << 9.0;
    auto q = failure_second_moment_map(net, lin, qd);
    HlccSpec spec = make_ssa_hlcc(net, 0.5, 0.05, 0.04, 1.0);

    REQUIRE(hlcc_lhs(spec, mu, q, {0}) > 0.5);
    REQUIRE(hlcc_lhs(spec, mu, q, {1}) <= 0.5);
    auto res = min_budget(net, spec, mu, q);
    REQUIRE(res.feasible);
    CHECK(res.budget == doctest::Approx(12345.0));
    CHECK(res.hardening[0] == 1);
    CHECK(res.worst_case_probability >= 0.95);

    // an easy risk target costs nothing
    HlccSpec easy = make_ssa_hlcc(net, 5.0, 0.05, 0.04, 1.0);
    auto res2 = min_budget(net, easy, mu, q);
    REQUIRE(res2.feasible);
    CHECK(res2.budget == doctest::Approx(0.0));

    // an impossible target reports the achievable probability
    HlccSpec hard = make_ssa_hlcc(net, 0.01, 0.05, 0.04, 1.0);
    auto res3 = min_budget(net, hard, mu, q);
    CHECK_FALSE(res3.feasible);
}

TEST_CASE("min budget minimality: removing any chosen hardening breaks the constraint") {
    Network net = test::make_synthetic_net(0, 3, 1, 1);
    for (auto& p : net.pipes) p.in_ssa = true;
    net.pipes[0].harden_cost = 100;
    net.pipes[1].harden_cost = 150;
    net.pipes[2].harden_cost = 120;
    std::vector<LinearizedCurve> lin(3);
    for (int i = 0; i < 3; ++i) {
        lin[i].k0 = 0.01;
        lin[i].b0 = 0.35 - 0.01 * 30;
        lin[i].k1 = 0.001;
        lin[i].b1 = 0.02 - 0.001 * 30;
    }
    MeanMap mu = failure_mean_map(net, lin, {30.0, 30.0, 30.0});
    Eigen::MatrixXd qd = Eigen::MatrixXd::Identity(3, 3) * 4.0;
    auto q = failure_second_moment_map(net, lin, qd);
    HlccSpec spec = make_ssa_hlcc(net, 0.8, 0.1, 0.02, 0.5);
    auto res = min_budget(net, spec, mu, q);
    REQUIRE(res.feasible);
    CHECK(hlcc_lhs(spec, mu, q, res.hardening) <= spec.k_cc + 1e-9);
    for (int c = 0; c < 3; ++c) {
        if (!res.hardening[c]) continue;
        auto x = res.hardening;
        x[c] = 0;
        CHECK(hlcc_lhs(spec, mu, q, x) > spec.k_cc);
    }
}
