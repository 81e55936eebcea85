#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace ehdn::lp {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit, NumericalFailure };

struct LpOptions {
    double feas_tol = 1e-7;
    double opt_tol = 1e-7;
    double pivot_tol = 1e-9;
    long max_iters = 500000;
    int refactor_every = 100;
    bool scale = true;
};

/// Column-major sparse matrix, append-only.
struct SparseCols {
    int nrows = 0;
    std::vector<int> ptr{0};
    std::vector<int> idx;
    std::vector<double> val;

    int ncols() const { return static_cast<int>(ptr.size()) - 1; }
    void add_col(const std::vector<std::pair<int, double>>& entries) {
        for (const auto& [r, v] : entries) {
            if (v != 0.0) {
                idx.push_back(r);
                val.push_back(v);
            }
        }
        ptr.push_back(static_cast<int>(idx.size()));
    }
};

/// minimize c.x subject to rlo <= A x <= rup and lb <= x <= ub.
/// Equality rows have rlo == rup; one-sided rows use +-inf.
struct LpProblem {
    SparseCols a;
    std::vector<double> c, lb, ub;
    std::vector<double> rlo, rup;

    int nrows() const { return a.nrows; }
    int ncols() const { return a.ncols(); }
};

enum class ColStat : std::uint8_t { AtLower = 0, AtUpper = 1, Basic = 2, FreeZero = 3 };

struct LpResult {
    LpStatus status = LpStatus::NumericalFailure;
    double obj = 0.0;
    std::vector<double> x;            // structural solution
    std::vector<double> row_value;    // A x
    std::vector<double> y;            // row duals (minimize convention)
    std::vector<ColStat> basis;       // size ncols + nrows, reusable as warm start
    long iters = 0;
};

/// Bounded-variable two-phase primal revised simplex with a sparse-LU basis
/// and product-form updates. Deterministic given identical input.
LpResult solve_lp(const LpProblem& p, const LpOptions& opt = {},
                  const std::vector<ColStat>* warm = nullptr);

}  // namespace ehdn::lp
