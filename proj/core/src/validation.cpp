#include "ehdn/validation.hpp"

#include <algorithm>
#include <cmath>

#include "ehdn/parallel.hpp"
#include "ehdn/rng.hpp"

namespace ehdn {

Eigen::MatrixXd sample_intensity(const IntensityAmbiguity& amb, int n, std::uint64_t seed) {
    if (n < 1) fail_data("sample_intensity: need at least one sample");
    Eigen::MatrixXd draws = detail::sample_intensity_matrix(amb, n, seed);
    // the empirical mean must stay inside the declared mean ball
    Eigen::VectorXd mean = draws.colwise().mean();
    Eigen::VectorXd diff = mean - amb.dbar;
    Eigen::MatrixXd qd = amb.qd + 1e-9 * Eigen::MatrixXd::Identity(amb.qd.rows(), amb.qd.cols());
    double maha = diff.transpose() * qd.ldlt().solve(diff);
    double tol_budget = amb.gamma_d1 + 10.0 / std::sqrt(static_cast<double>(n));
    if (n >= 100 && maha > std::max(1e-6, tol_budget))
        fail_model("sampled intensity mean drifted outside the gamma_d1 ball ({:.4g} > {:.4g})",
                   maha, tol_budget);
    return draws;
}

ScenarioRealization sample_failures(const Network& net, const FragilityParams& params,
                                    const std::vector<int>& hardening,
                                    const Eigen::VectorXd& intensity, const IntensityIndex& index,
                                    std::uint64_t seed, bool linearized,
                                    const std::vector<LinearizedCurve>* lin) {
    if (linearized && !lin)
        fail_model("sample_failures: linearized mode needs the linearized curves");
    auto a = ScenarioRealization::none(net);
    auto rng = make_rng(seed, 0xfa11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int c = 0; c < net.num_components(); ++c) {
        bool hardened = hardening[c] != 0;
        int z = net.comp_zone(c);
        double cum_rain = 0.0;
        double prev_cdf = 0.0;  // pipelines: cumulative failure curve
        bool alive = true;
        for (int t = 0; t < net.periods; ++t) {
            double hazard = 0.0;
            if (net.comp_kind(c) == CompKind::Line) {
                double v = intensity[index.at(z, t, 0)];
                hazard = linearized
                             ? clamp01((*lin)[net.entry(c, t)].k(hardened) * v +
                                       (hardened ? (*lin)[net.entry(c, t)].b1
                                                 : (*lin)[net.entry(c, t)].b0))
                             : line_failure_prob(v, hardened, net.lines[c], params.lines[c]);
            } else {
                cum_rain += intensity[index.at(z, t, 1)];
                int p = net.comp_pipe(c);
                double cdf;
                if (linearized) {
                    const auto& lc = (*lin)[net.entry(c, t)];
                    cdf = clamp01(lc.k(hardened) * cum_rain + (hardened ? lc.b1 : lc.b0));
                } else {
                    cdf = pipeline_failure_from_cumulative(cum_rain, hardened, net.pipes[p],
                                                           params.pipes[p]);
                }
                cdf = std::max(cdf, prev_cdf);
                hazard = prev_cdf < 1.0 ? (cdf - prev_cdf) / (1.0 - prev_cdf) : 0.0;
                prev_cdf = cdf;
            }
            double u = U(rng);  // one draw per (component, period), dead or alive
            if (alive && u < hazard) {
                a.a[net.entry(c, t)] = 1;
                alive = false;
            }
        }
    }
    return a;
}

namespace {

struct SampleStats {
    std::vector<double> costs;
    std::vector<int> ssa_counts;
    std::vector<int> total_counts;
};

SampleStats run_samples(const Network& net, const FragilityParams& params,
                        const IntensityAmbiguity& amb, const HardeningPlan& plan,
                        const ValidationOptions& opt, bool with_dispatch) {
    SampleStats st;
    st.costs.assign(with_dispatch ? opt.samples : 0, 0.0);
    st.ssa_counts.assign(opt.samples, 0);
    st.total_counts.assign(opt.samples, 0);
    auto ssa = net.ssa_pipe_comps();

    std::vector<LinearizedCurve> lin;
    const std::vector<LinearizedCurve>* lin_ptr = nullptr;
    if (opt.linearized_curves) {
        auto ei = map_intensity_to_entries(net, amb);
        lin = linearize_all(net, params, ei.dbar_eff, ei.support_width);
        lin_ptr = &lin;
    }

    Eigen::MatrixXd draws = detail::sample_intensity_matrix(amb, opt.samples, opt.seed);
    parallel_for(opt.samples, opt.threads, [&](int s) {
        Eigen::VectorXd path = draws.row(s).transpose();
        auto a = sample_failures(net, params, plan.hardening, path, amb.index,
                                 derive_seed(opt.seed, 1000003ULL + s), opt.linearized_curves,
                                 lin_ptr);
        int cnt = 0;
        for (int c : ssa)
            for (int t = 0; t < net.periods; ++t) cnt += a.a[net.entry(c, t)];
        st.ssa_counts[s] = cnt;
        st.total_counts[s] = a.total();
        if (with_dispatch) st.costs[s] = solve_dispatch(net, plan.storage_alloc, a).objective;
    });
    return st;
}

ValidationReport summarize(const SampleStats& st, const ValidationOptions& opt) {
    ValidationReport r;
    r.samples = opt.samples;
    r.seed = opt.seed;
    r.quantile = opt.quantile;
    if (!st.costs.empty()) {
        double mean = 0.0;
        for (double v : st.costs) mean += v;
        mean /= st.costs.size();
        double var = 0.0;
        for (double v : st.costs) var += (v - mean) * (v - mean);
        var /= std::max<size_t>(1, st.costs.size() - 1);
        r.mean_shed_cost = mean;
        r.shed_cost_half_width = 1.96 * std::sqrt(var / st.costs.size());
    }
    auto counts = st.ssa_counts;
    std::sort(counts.begin(), counts.end());
    size_t idx = static_cast<size_t>(std::ceil(opt.quantile * counts.size()));
    idx = std::min(counts.size() - 1, std::max<size_t>(1, idx) - 1);
    r.var_ssa = counts.empty() ? 0.0 : counts[idx];
    double ms = 0.0, mt = 0.0;
    for (int v : st.ssa_counts) ms += v;
    for (int v : st.total_counts) mt += v;
    r.mean_ssa_failures = st.ssa_counts.empty() ? 0.0 : ms / st.ssa_counts.size();
    r.mean_failures = st.total_counts.empty() ? 0.0 : mt / st.total_counts.size();
    return r;
}

}  // namespace

ValidationReport estimate_welsc(const Network& net, const FragilityParams& params,
                                const IntensityAmbiguity& amb, const HardeningPlan& plan,
                                const ValidationOptions& opt) {
    if (opt.samples < 1) fail_data("estimate_welsc: need at least one sample");
    return summarize(run_samples(net, params, amb, plan, opt, true), opt);
}

ValidationReport var_ssa(const Network& net, const FragilityParams& params,
                         const IntensityAmbiguity& amb, const HardeningPlan& plan,
                         const ValidationOptions& opt) {
    if (opt.quantile <= 0 || opt.quantile >= 1) fail_data("var_ssa: quantile must be in (0,1)");
    return summarize(run_samples(net, params, amb, plan, opt, false), opt);
}

VolaResult vola(const Network& net, const Lpcas& lifted_set, const HardeningPlan& plan_fmas,
                const HardeningPlan& plan_lpcas, const CcgOptions& opt) {
    VolaResult r;
    r.f_lpcas_at_fmas = evaluate_worst_case(net, lifted_set, plan_fmas, opt);
    r.f_lpcas_at_lpcas = evaluate_worst_case(net, lifted_set, plan_lpcas, opt);
    if (std::fabs(r.f_lpcas_at_lpcas) < 1e-9) {
        r.defined = false;
        r.vola = 0.0;
        return r;
    }
    r.vola = (r.f_lpcas_at_fmas - r.f_lpcas_at_lpcas) / r.f_lpcas_at_lpcas;
    return r;
}

}  // namespace ehdn
