#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ehdn/ambiguity.hpp"
#include "ehdn/ccg.hpp"
#include "ehdn/hlcc.hpp"
#include "ehdn/instance_io.hpp"
#include "ehdn/reporting.hpp"
#include "ehdn/validation.hpp"

using namespace ehdn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Cli {
    std::string instance, fragility, forecast, plan_path, results_dir, out_dir = "out";
    std::string label = "run";
    double eps = 0.05;
    double k_cc = 1.0;
    int n_l = 0;  // 0: derive from the reliability rule
    double gamma1 = -1.0, gamma2 = -1.0;
    bool auto_gammas = false;
    double tol = 1e-3;
    int max_iter = 60;
    double mip_gap = 1e-6;
    std::uint64_t seed = 0;
    int samples = 1000;
    double quantile = 0.95;
    int threads = 1;
    double time_limit = 0.0;  // seconds; 0 = none
    bool no_hlcc = false;
    bool fmas = false;
    bool linearized = false;
    bool skip_welsc = false;
};

struct Problem {
    Network net;
    FragilityParams params;
    Forecast fc;
    IntensityAmbiguity amb;
    EntryIntensity ei;
    std::vector<LinearizedCurve> lin;
    MeanMap mu;
    SecondMomentMap q;
    double gamma1 = 0, gamma2 = 1;
    double hlcc_gamma1 = 0, hlcc_gamma2 = 1;
    int n_l = 1;
};

Problem load_problem(const Cli& cli) {
    Problem p;
    p.net = parse_instance(cli.instance);
    p.params = parse_fragility(cli.fragility, p.net);
    p.fc = parse_forecast(cli.forecast, p.net);
    p.amb = build_intensity_set(p.net, p.fc);
    p.ei = map_intensity_to_entries(p.net, p.amb);
    p.lin = linearize_all(p.net, p.params, p.ei.dbar_eff, p.ei.support_width);
    p.mu = failure_mean_map(p.net, p.lin, p.ei.dbar_eff);
    p.q = failure_second_moment_map(p.net, p.lin, p.ei.sigma_eff);
    p.gamma1 = cli.gamma1 >= 0 ? cli.gamma1 : p.fc.gamma1;
    p.gamma2 = cli.gamma2 >= 0 ? cli.gamma2 : p.fc.gamma2;
    if (cli.auto_gammas) {
        auto g = suggest_feasible_gammas(p.mu, p.q);
        p.gamma1 = g.gamma1;
        p.gamma2 = g.gamma2;
    }
    // the chance constraint works on its own projection; calibrate its
    // ratios on the selected entries when the forecast does not pin them
    p.hlcc_gamma1 = p.fc.hlcc_gamma1 >= 0 ? p.fc.hlcc_gamma1 : p.gamma1;
    p.hlcc_gamma2 = p.fc.hlcc_gamma2 >= 0 ? p.fc.hlcc_gamma2 : p.gamma2;
    if (cli.auto_gammas && !p.net.ssa_pipe_comps().empty()) {
        std::vector<std::uint8_t> mask(p.net.num_entries(), 0);
        for (int c : p.net.ssa_pipe_comps())
            for (int t = 0; t < p.net.periods; ++t) mask[p.net.entry(c, t)] = 1;
        auto g = suggest_feasible_gammas(p.mu, p.q, 1.5, &mask);
        p.hlcc_gamma1 = g.gamma1;
        p.hlcc_gamma2 = g.gamma2;
    }
    if (cli.n_l > 0) {
        p.n_l = cli.n_l;
    } else {
        auto bounds = quantile_bounds(p.mu, p.q, p.gamma1);
        p.n_l = default_failure_cap(bounds);
    }
    return p;
}

double effective_time_limit(const Cli& cli) {
    if (cli.time_limit > 0) return cli.time_limit;
    if (const char* env = std::getenv("EHDN_TIME_LIMIT")) {
        double v = std::atof(env);
        if (v > 0) return v;
    }
    return kInf;
}

json manifest_json(const Cli& cli, const std::string& sub, const Problem* p) {
    json m;
    m["tool_version"] = "0.1.0";
    m["subcommand"] = sub;
    m["label"] = cli.label;
    m["instance"] = cli.instance;
    m["fragility"] = cli.fragility;
    m["forecast"] = cli.forecast;
    m["seed"] = cli.seed;
    m["threads"] = cli.threads;
    if (sub == "harden" || sub == "min-budget" || sub == "evaluate") {
        m["eps"] = cli.eps;
        m["k_cc"] = cli.k_cc;
        m["tol"] = cli.tol;
        m["max_iter"] = cli.max_iter;
        m["mip_gap"] = cli.mip_gap;
        m["no_hlcc"] = cli.no_hlcc;
        m["fmas"] = cli.fmas;
        if (p) {
            m["gamma1"] = p->gamma1;
            m["gamma2"] = p->gamma2;
            m["n_l"] = p->n_l;
        }
    }
    if (sub == "validate") {
        m["samples"] = cli.samples;
        m["quantile"] = cli.quantile;
        m["linearized"] = cli.linearized;
    }
    return m;
}

void write_summary(const fs::path& out, const json& extra, const std::string& status) {
    json j = extra;
    j["status"] = status;
    reporting::write_file(out / "summary.json", j.dump(2) + "\n");
}

HardeningPlan read_plan(const std::string& path, const Network& net) {
    std::ifstream in(path);
    if (!in) fail_data("cannot open plan file '{}'", path);
    json j;
    in >> j;
    HardeningPlan plan;
    plan.hardening = j.at("hardening_vector").get<std::vector<int>>();
    if (static_cast<int>(plan.hardening.size()) != net.num_components())
        fail_data("plan '{}': hardening vector length {} != component count {}", path,
                  plan.hardening.size(), net.num_components());
    plan.storage_alloc.assign(net.stations.size(), 0.0);
    const auto& alloc = j.at("storage_allocation");
    for (size_t s = 0; s < net.stations.size(); ++s)
        plan.storage_alloc[s] = alloc.value(net.stations[s].id, 0.0);
    plan.welsc = j.value("welsc", 0.0);
    return plan;
}

CcgOptions ccg_options(const Cli& cli) {
    CcgOptions opt;
    opt.tol = cli.tol;
    opt.max_iter = cli.max_iter;
    opt.mip_gap = cli.mip_gap;
    opt.time_limit_s = effective_time_limit(cli);
    return opt;
}

int cmd_harden(const Cli& cli) {
    Problem p = load_problem(cli);
    Lpcas set = build_lpcas(p.net, p.mu, p.q, p.gamma1, p.gamma2, p.n_l, !cli.fmas);
    std::optional<HlccSpec> hlcc;
    if (!cli.no_hlcc)
        hlcc = make_ssa_hlcc(p.net, cli.k_cc, cli.eps, p.hlcc_gamma1, p.hlcc_gamma2);
    CcgOptions opt = ccg_options(cli);

    auto res = run_ccg(p.net, set, hlcc ? &*hlcc : nullptr, opt);

    fs::path out(cli.out_dir);
    reporting::write_file(out / "manifest.json", manifest_json(cli, "harden", &p).dump(2) + "\n");
    reporting::write_file(out / "plan.json", reporting::plan_json(p.net, res));
    reporting::write_file(out / "trace.json", reporting::trace_json(res.trace));
    json s;
    s["welsc"] = res.plan.welsc;
    s["converged"] = res.plan.converged;
    s["hn_total"] = res.plan.hn_total;
    s["hn_ssa"] = res.plan.hn_ssa;
    s["iterations"] = res.trace.iters.size();
    write_summary(out, s, res.plan.converged ? "ok" : "not-converged");
    fmt::print("welsc {:.6g} $ ({}), hardened {} components ({} in SSA), {} iterations\n",
               res.plan.welsc, res.plan.converged ? "converged" : "NOT converged",
               res.plan.hn_total, res.plan.hn_ssa, res.trace.iters.size());
    return 0;
}

int cmd_min_budget(const Cli& cli) {
    Problem p = load_problem(cli);
    HlccSpec spec = make_ssa_hlcc(p.net, cli.k_cc, cli.eps, p.hlcc_gamma1, p.hlcc_gamma2);
    auto res = min_budget(p.net, spec, p.mu, p.q);
    fs::path out(cli.out_dir);
    reporting::write_file(out / "manifest.json",
                          manifest_json(cli, "min-budget", &p).dump(2) + "\n");
    reporting::write_file(out / "min_budget.json", reporting::min_budget_json(p.net, spec, res));
    json s;
    s["feasible"] = res.feasible;
    s["budget"] = res.budget;
    write_summary(out, s, res.feasible ? "ok" : "infeasible");
    if (!res.feasible) {
        fmt::print("risk target unattainable even fully hardened (achievable probability "
                   "{:.4f})\n",
                   res.achievable_probability);
        fail_model("minimum-budget model infeasible for eps={} k_cc={}", cli.eps, cli.k_cc);
    }
    fmt::print("minimum hardening budget {:.6g} $, worst-case probability {:.4f}\n", res.budget,
               res.worst_case_probability);
    return 0;
}

int cmd_validate(const Cli& cli) {
    Problem p = load_problem(cli);
    HardeningPlan plan = read_plan(cli.plan_path, p.net);
    ValidationOptions vo;
    vo.samples = cli.samples;
    vo.quantile = cli.quantile;
    vo.seed = cli.seed;
    vo.threads = cli.threads;
    vo.linearized_curves = cli.linearized;

    // both paths fill the failure-count statistics; the dispatch-based mean
    // is skipped in counting-only mode
    ValidationReport rep = cli.skip_welsc ? var_ssa(p.net, p.params, p.amb, plan, vo)
                                          : estimate_welsc(p.net, p.params, p.amb, plan, vo);
    fs::path out(cli.out_dir);
    reporting::write_file(out / "manifest.json",
                          manifest_json(cli, "validate", nullptr).dump(2) + "\n");
    reporting::write_file(out / "validation.json", reporting::validation_json(rep));
    json s;
    s["mean_shed_cost"] = rep.mean_shed_cost;
    s["var_ssa"] = rep.var_ssa;
    write_summary(out, s, "ok");
    fmt::print("validation over {} samples: mean shed cost {:.6g} $ (+-{:.3g}), VaR-SSA({:.0f}%) "
               "= {:.0f}\n",
               rep.samples, rep.mean_shed_cost, rep.shed_cost_half_width, 100 * rep.quantile,
               rep.var_ssa);
    return 0;
}

int cmd_evaluate(const Cli& cli) {
    Problem p = load_problem(cli);
    HardeningPlan plan = read_plan(cli.plan_path, p.net);
    Lpcas set = build_lpcas(p.net, p.mu, p.q, p.gamma1, p.gamma2, p.n_l, !cli.fmas);
    CcgOptions opt = ccg_options(cli);
    double value = evaluate_worst_case(p.net, set, plan, opt);

    json j;
    j["worst_case_cost"] = value;
    if (!cli.no_hlcc) {
        HlccSpec spec = make_ssa_hlcc(p.net, cli.k_cc, cli.eps, p.hlcc_gamma1, p.hlcc_gamma2);
        double lhs = hlcc_lhs(spec, p.mu, p.q, plan.hardening);
        j["hlcc_lhs"] = lhs;
        j["hlcc_k_cc"] = spec.k_cc;
        j["hlcc_satisfied"] = lhs <= spec.k_cc + 1e-9;
    }
    fs::path out(cli.out_dir);
    reporting::write_file(out / "manifest.json",
                          manifest_json(cli, "evaluate", &p).dump(2) + "\n");
    reporting::write_file(out / "evaluate.json", j.dump(2) + "\n");
    write_summary(out, j, "ok");
    fmt::print("worst-case expected cost of the plan: {:.6g} $\n", value);
    return 0;
}

int cmd_report(const Cli& cli) {
    fs::path out = cli.out_dir.empty() ? fs::path(cli.results_dir) / "tables" : fs::path(cli.out_dir);
    reporting::write_report_tables(cli.results_dir, out);
    fmt::print("tables written to {}\n", out.string());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pre-disaster hardening and hydrogen-storage planning for coupled "
                 "electricity-hydrogen distribution networks under extreme weather"};
    app.require_subcommand(1);
    Cli cli;

    auto add_common = [&](CLI::App* cmd, bool needs_inputs) {
        if (needs_inputs) {
            cmd->add_option("--instance", cli.instance, "network instance file")->required();
            cmd->add_option("--fragility", cli.fragility, "fragility parameter file")->required();
            cmd->add_option("--forecast", cli.forecast, "intensity forecast file")->required();
        }
        cmd->add_option("--out", cli.out_dir, "output directory");
        cmd->add_option("--label", cli.label, "run label used by the report tables");
        cmd->add_option("--seed", cli.seed, "master random seed");
        cmd->add_option("--threads", cli.threads, "worker threads for sampling");
    };
    auto add_model = [&](CLI::App* cmd) {
        cmd->add_option("--eps", cli.eps, "chance-constraint risk level in (0,1)");
        cmd->add_option("--kcc", cli.k_cc, "max tolerable SSA failures");
        cmd->add_option("--nl", cli.n_l, "failure-count cap of the lifted support (0: derive)");
        cmd->add_option("--gamma1", cli.gamma1, "override mean-error ratio");
        cmd->add_option("--gamma2", cli.gamma2, "override second-moment ratio");
        cmd->add_flag("--auto-gammas", cli.auto_gammas,
                      "derive the smallest ratios keeping the lifted set nonempty");
        cmd->add_option("--tol", cli.tol, "relative UB-LB stopping gap");
        cmd->add_option("--max-iter", cli.max_iter, "scenario-generation iteration cap");
        cmd->add_option("--mip-gap", cli.mip_gap, "inner MILP relative gap");
        cmd->add_option("--time-limit", cli.time_limit,
                        "overall seconds budget (or EHDN_TIME_LIMIT)");
    };

    auto* harden = app.add_subcommand("harden", "two-stage robust hardening plan");
    add_common(harden, true);
    add_model(harden);
    harden->add_flag("--no-hlcc", cli.no_hlcc, "drop the hydrogen-leakage chance constraint");
    harden->add_flag("--fmas", cli.fmas, "first-order-moment ambiguity set baseline");

    auto* minb = app.add_subcommand("min-budget", "cheapest hardening meeting the HLCC alone");
    add_common(minb, true);
    add_model(minb);

    auto* val = app.add_subcommand("validate", "Monte-Carlo validation of a plan");
    add_common(val, true);
    val->add_option("--plan", cli.plan_path, "plan.json from a harden run")->required();
    val->add_option("--samples", cli.samples, "Monte-Carlo sample count");
    val->add_option("--quantile", cli.quantile, "VaR quantile in (0,1)");
    val->add_flag("--linearized", cli.linearized, "sample with the linearized curves");
    val->add_flag("--skip-welsc", cli.skip_welsc, "skip dispatch solves, count failures only");

    auto* eval = app.add_subcommand("evaluate", "worst-case expected cost of a fixed plan");
    add_common(eval, true);
    add_model(eval);
    eval->add_option("--plan", cli.plan_path, "plan.json to evaluate")->required();
    eval->add_flag("--no-hlcc", cli.no_hlcc, "skip the closed-form HLCC check");
    eval->add_flag("--fmas", cli.fmas, "evaluate under the first-order-moment set");

    auto* rep = app.add_subcommand("report", "aggregate run outputs into plot-ready tables");
    rep->add_option("--results", cli.results_dir, "run directory or parent of run directories")
        ->required();
    rep->add_option("--out", cli.out_dir, "table output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(harden)) return cmd_harden(cli);
        if (app.got_subcommand(minb)) return cmd_min_budget(cli);
        if (app.got_subcommand(val)) return cmd_validate(cli);
        if (app.got_subcommand(eval)) return cmd_evaluate(cli);
        if (app.got_subcommand(rep)) return cmd_report(cli);
    } catch (const DataError& e) {
        fmt::print(stderr, "input error: {}\n", e.what());
        return 2;
    } catch (const ModelError& e) {
        fmt::print(stderr, "model infeasible: {}\n", e.what());
        return 3;
    } catch (const SolverError& e) {
        fmt::print(stderr, "solver failure: {}\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 4;
    }
    return 2;
}
