#pragma once

#include <vector>

#include "ehdn/model_ir.hpp"
#include "ehdn/simplex.hpp"

namespace ehdn {

enum class SolveStatus { Optimal, Feasible, Infeasible, Unbounded, NodeLimit, TimeLimit, Error };

struct SolveOptions {
    double rel_gap = 1e-6;
    double abs_gap = 1e-9;
    long max_nodes = 500000;
    double time_limit_s = kInf;
    double soc_tol = 1e-8;
    int max_oa_rounds = 60;
    bool verbose = false;
    lp::LpOptions lp;
    /// Optional warm values; binary entries are rounded and probed for an
    /// initial incumbent before branching starts.
    const std::vector<double>* start = nullptr;
};

struct SolveResult {
    SolveStatus status = SolveStatus::Error;
    double obj = 0.0;
    double best_bound = 0.0;
    std::vector<double> x;
    long nodes = 0;
    long lp_iters = 0;
    double seconds = 0.0;

    bool feasible() const {
        return status == SolveStatus::Optimal || status == SolveStatus::Feasible;
    }
};

/// Global solve of a mixed-binary program with linear and second-order-cone
/// rows: branch-and-bound over the binaries on top of the simplex, cones
/// enforced by lazily refined polyhedral outer approximation. Deterministic
/// given fixed options (time limits excepted).
SolveResult solve_model(const ModelIR& m, const SolveOptions& opt = {});

}  // namespace ehdn
