#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ehdn/ambiguity.hpp"
#include "ehdn/dispatch.hpp"
#include "ehdn/hlcc.hpp"
#include "ehdn/model_ir.hpp"
#include "ehdn/network.hpp"
#include "ehdn/solver.hpp"

namespace ehdn {

/// x_sqr = x_i * x_j for binary x via the standard four-inequality envelope;
/// returns one auxiliary variable per requested pair.
std::vector<int> linearize_products(ModelIR& m, const std::vector<int>& x,
                                    const std::vector<std::pair<int, int>>& pairs,
                                    const std::string& prefix = "xsqr");

/// One generated scenario column: the failure realization and the lift
/// values frozen when the cut was created.
struct Cut {
    ScenarioRealization a;
    std::vector<double> w;
};

struct CcgIterate {
    int iter = 0;
    double lb = 0.0;
    double ub = kInf;
    double mp_obj = 0.0;
    double sp_obj = 0.0;
    int scenario_failures = 0;
    double seconds = 0.0;
};

struct CcgTrace {
    std::vector<CcgIterate> iters;
    bool converged = false;
    std::string stop_reason;
};

struct HardeningPlan {
    std::vector<int> hardening;         // per component
    std::vector<double> storage_alloc;  // per station
    double welsc = kInf;
    double hardening_cost = 0.0;
    int hn_total = 0;
    int hn_ssa = 0;
    bool hlcc_enforced = false;
    bool converged = false;
};

struct CcgOptions {
    double tol = 1e-3;
    int max_iter = 60;
    double mip_gap = 1e-6;
    long max_nodes = 500000;
    double time_limit_s = kInf;
    bool use_hlcc = true;
    bool verbose = false;
    /// deterministic tie-breaking: tiny graded cost on x, largest on the
    /// lowest component index so equal-cost optima prefer the
    /// lexicographically smallest hardening vector
    double lex_epsilon_scale = 1e-12;
    /// dual-variable cap for the bilinear-product envelopes; doubled and
    /// re-solved automatically if it ever binds
    double dual_cap = 0.0;  // 0: derived from instance data
};

struct MasterBuild {
    ModelIR model;
    std::vector<int> x_vars;      // per component
    std::vector<int> xe0_vars;    // per station
    std::vector<int> alpha_vars;  // per entry
    std::vector<int> beta_vars;   // per entry
    std::vector<int> gam_vars;    // per projection vector (lifted only)
    int l_var = -1;
    std::vector<DispatchBuild> blocks;  // one per cut
};

MasterBuild build_master(const Network& net, const Lpcas& set, const HlccSpec* hlcc,
                         const std::vector<Cut>& cuts, const CcgOptions& opt);

struct MasterSolution {
    double objective = 0.0;
    std::vector<int> x;
    std::vector<double> xe0;
    std::vector<double> alpha, beta, gam;
    double l_value = 0.0;
};

struct SubproblemBuild {
    ModelIR model;                // max sense
    std::vector<int> a_vars;      // per entry
    std::vector<int> w_vars;      // per projection vector (lifted only)
    double lambda_cap = 0.0;
    std::vector<int> lambda_like; // all dual variables, for the cap check
};

/// Dualized single-level max form of the worst-scenario search at a fixed
/// first stage: strong duality on the dispatch LP, dual-times-binary products
/// by big-M envelopes, lifted w tied to a by integer tangent cuts (exact on
/// the binary support).
SubproblemBuild build_subproblem(const Network& net, const Lpcas& set, const MasterSolution& ms,
                                 double lambda_cap);

struct CcgResult {
    HardeningPlan plan;
    CcgTrace trace;
    std::vector<Cut> cuts;
    double lb = 0.0;
    double hlcc_worst_case_probability = 1.0;
};

/// Column-and-constraint generation over the lifted ambiguity set. When
/// `fixed_plan` is given, the first stage is pinned and the loop evaluates
/// the worst-case expected cost of that plan (max-only mode).
CcgResult run_ccg(const Network& net, const Lpcas& set, const HlccSpec* hlcc,
                  const CcgOptions& opt, const HardeningPlan* fixed_plan = nullptr);

/// Worst-case expected load-shedding cost of a fixed plan under the set.
double evaluate_worst_case(const Network& net, const Lpcas& set, const HardeningPlan& plan,
                           const CcgOptions& opt);

/// Value of the dispatch LP through the explicit dual (strong-duality check).
double dispatch_dual_value(const Network& net, const std::vector<double>& xe0,
                           const ScenarioRealization& a);

}  // namespace ehdn
