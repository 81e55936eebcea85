#include "ehdn/reporting.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

namespace ehdn::reporting {

using nlohmann::json;

std::string plan_json(const Network& net, const CcgResult& res) {
    json j;
    j["welsc"] = res.plan.welsc;
    j["lower_bound"] = res.lb;
    j["converged"] = res.plan.converged;
    j["hlcc_enforced"] = res.plan.hlcc_enforced;
    if (res.plan.hlcc_enforced)
        j["hlcc_worst_case_probability"] = res.hlcc_worst_case_probability;
    j["hardening_cost"] = res.plan.hardening_cost;
    j["hn_total"] = res.plan.hn_total;
    j["hn_ssa"] = res.plan.hn_ssa;
    j["hardening_vector"] = res.plan.hardening;
    json ids = json::array();
    for (int c = 0; c < net.num_components(); ++c)
        if (res.plan.hardening[c]) ids.push_back(net.comp_id(c));
    j["hardened_components"] = ids;
    json alloc = json::object();
    for (size_t s = 0; s < net.stations.size(); ++s)
        alloc[net.stations[s].id] = res.plan.storage_alloc[s];
    j["storage_allocation"] = alloc;
    j["cut_count"] = res.cuts.size();
    return j.dump(2) + "\n";
}

std::string trace_json(const CcgTrace& trace) {
    json j;
    j["converged"] = trace.converged;
    j["stop_reason"] = trace.stop_reason;
    json rows = json::array();
    for (const auto& it : trace.iters) {
        rows.push_back({{"iter", it.iter},
                        {"lb", it.lb},
                        {"ub", it.ub},
                        {"sp_obj", it.sp_obj},
                        {"scenario_failures", it.scenario_failures},
                        {"seconds", it.seconds}});
    }
    j["iterations"] = rows;
    return j.dump(2) + "\n";
}

std::string validation_json(const ValidationReport& rep) {
    json j;
    j["samples"] = rep.samples;
    j["seed"] = rep.seed;
    j["quantile"] = rep.quantile;
    j["mean_shed_cost"] = rep.mean_shed_cost;
    j["shed_cost_half_width"] = rep.shed_cost_half_width;
    j["var_ssa"] = rep.var_ssa;
    j["mean_ssa_failures"] = rep.mean_ssa_failures;
    j["mean_failures"] = rep.mean_failures;
    return j.dump(2) + "\n";
}

std::string min_budget_json(const Network& net, const HlccSpec& spec,
                            const MinBudgetResult& res) {
    json j;
    j["feasible"] = res.feasible;
    j["budget"] = res.budget;
    j["k_cc"] = spec.k_cc;
    j["eps"] = spec.eps;
    j["worst_case_probability"] = res.worst_case_probability;
    j["achievable_probability_fully_hardened"] = res.achievable_probability;
    json ids = json::array();
    for (int c = 0; c < net.num_components(); ++c)
        if (!res.hardening.empty() && res.hardening[c]) ids.push_back(net.comp_id(c));
    j["hardened_components"] = ids;
    return j.dump(2) + "\n";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path);
    if (!out) fail_data("cannot write '{}'", path.string());
    out << content;
}

namespace {

json read_json(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) fail_data("report: cannot open '{}'", p.string());
    json j;
    in >> j;
    return j;
}

struct RunDir {
    std::string label;
    std::filesystem::path dir;
};

std::vector<RunDir> discover_runs(const std::filesystem::path& results) {
    std::vector<RunDir> runs;
    auto is_run = [](const std::filesystem::path& d) {
        return std::filesystem::exists(d / "manifest.json");
    };
    if (is_run(results)) {
        runs.push_back({results.filename().string(), results});
    } else if (std::filesystem::is_directory(results)) {
        for (const auto& e : std::filesystem::directory_iterator(results))
            if (e.is_directory() && is_run(e.path()))
                runs.push_back({e.path().filename().string(), e.path()});
    }
    std::sort(runs.begin(), runs.end(),
              [](const RunDir& a, const RunDir& b) { return a.label < b.label; });
    if (runs.empty()) fail_data("report: no run directories under '{}'", results.string());
    return runs;
}

}  // namespace

void write_report_tables(const std::filesystem::path& results, const std::filesystem::path& out) {
    auto runs = discover_runs(results);
    std::filesystem::create_directories(out);

    std::string welsc_tab = "label\twelsc\thardening_cost\thn_total\thn_ssa\tconverged\n";
    std::string var_tab = "label\tvar_ssa\tmean_ssa_failures\tmean_shed_cost\tsamples\n";
    bool any_var = false;

    for (const auto& run : runs) {
        json manifest = read_json(run.dir / "manifest.json");
        std::string label = manifest.value("label", run.label);

        if (std::filesystem::exists(run.dir / "plan.json")) {
            json plan = read_json(run.dir / "plan.json");
            welsc_tab += fmt::format("{}\t{:.6g}\t{:.6g}\t{}\t{}\t{}\n", label,
                                     plan.value("welsc", 0.0), plan.value("hardening_cost", 0.0),
                                     plan.value("hn_total", 0), plan.value("hn_ssa", 0),
                                     plan.value("converged", false) ? 1 : 0);
            std::string edges = "component\n";
            for (const auto& id : plan["hardened_components"])
                edges += id.get<std::string>() + "\n";
            write_file(out / fmt::format("hardening_{}.tsv", label), edges);
        }
        if (std::filesystem::exists(run.dir / "trace.json")) {
            json trace = read_json(run.dir / "trace.json");
            std::string t = "iter\tlb\tub\tsp_obj\tscenario_failures\tseconds\n";
            for (const auto& row : trace["iterations"])
                t += fmt::format("{}\t{:.8g}\t{:.8g}\t{:.8g}\t{}\t{:.3f}\n", row["iter"].get<int>(),
                                 row["lb"].get<double>(), row["ub"].get<double>(),
                                 row["sp_obj"].get<double>(), row["scenario_failures"].get<int>(),
                                 row["seconds"].get<double>());
            write_file(out / fmt::format("convergence_{}.tsv", label), t);
        }
        if (std::filesystem::exists(run.dir / "validation.json")) {
            json v = read_json(run.dir / "validation.json");
            var_tab += fmt::format("{}\t{:.6g}\t{:.6g}\t{:.6g}\t{}\n", label,
                                   v.value("var_ssa", 0.0), v.value("mean_ssa_failures", 0.0),
                                   v.value("mean_shed_cost", 0.0), v.value("samples", 0));
            any_var = true;
        }
    }
    write_file(out / "welsc_by_label.tsv", welsc_tab);
    if (any_var) write_file(out / "var_by_label.tsv", var_tab);
}

}  // namespace ehdn::reporting
