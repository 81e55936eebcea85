#include "ehdn/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <queue>

namespace ehdn {
namespace {

using lp::ColStat;
using lp::LpProblem;
using lp::LpResult;
using lp::LpStatus;

struct Node {
    double bound;
    int depth;
    long seq;
    std::vector<std::pair<int, int>> fixings;  // (var, 0/1)
    std::vector<ColStat> basis;                // parent basis (may be stale in row count)
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;  // min-bound first
        if (a.depth != b.depth) return a.depth < b.depth;  // deeper first on ties
        return a.seq > b.seq;
    }
};

class BranchAndBound {
public:
    BranchAndBound(const ModelIR& m, const SolveOptions& opt) : m_(m), opt_(opt) {
        sign_ = m.minimize() ? 1.0 : -1.0;
        build_base();
    }

    SolveResult run();

private:
    const ModelIR& m_;
    SolveOptions opt_;
    double sign_;

    LpProblem base_;                  // bounds mutated per node; rows grow with cuts
    std::vector<double> root_lb_, root_ub_;
    std::vector<int> binaries_;
    int ncols_ = 0;
    long lp_iters_ = 0;
    std::chrono::steady_clock::time_point t0_;

    void build_base();
    void append_row(const LinExpr& e, RowSense s, double rhs);
    int separate_socs(const std::vector<double>& x, double tol);
    LpResult solve_node_lp(std::vector<ColStat>* basis);
    static std::vector<ColStat> extend_basis(const std::vector<ColStat>& b, int ncols, int nrows);
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }
};

void BranchAndBound::build_base() {
    ncols_ = m_.num_vars();
    base_.c.assign(ncols_, 0.0);
    base_.lb.resize(ncols_);
    base_.ub.resize(ncols_);
    for (int j = 0; j < ncols_; ++j) {
        const auto& v = m_.var(j);
        base_.lb[j] = v.lb;
        base_.ub[j] = v.ub;
        if (v.kind == VarKind::Binary) {
            base_.lb[j] = std::max(base_.lb[j], 0.0);
            base_.ub[j] = std::min(base_.ub[j], 1.0);
            binaries_.push_back(j);
        }
    }
    LinExpr obj = m_.objective();
    obj.compress();
    for (const auto& t : obj.terms) base_.c[t.var] = sign_ * t.coef;

    // rows, column-major
    std::vector<std::vector<std::pair<int, double>>> cols(ncols_);
    std::vector<double> rlo, rup;
    auto push_row = [&](const LinExpr& raw, RowSense s, double rhs) {
        LinExpr e = raw;
        e.compress();
        int r = static_cast<int>(rlo.size());
        for (const auto& t : e.terms) cols[t.var].emplace_back(r, t.coef);
        double b = rhs - e.constant;
        rlo.push_back(s == RowSense::LE ? -kInf : b);
        rup.push_back(s == RowSense::GE ? kInf : b);
    };
    for (const auto& r : m_.rows()) push_row(r.expr, r.sense, r.rhs);
    // each cone implies a nonnegative right-hand side
    for (const auto& s : m_.socs()) push_row(s.rhs, RowSense::GE, 0.0);

    base_.a.nrows = static_cast<int>(rlo.size());
    for (int j = 0; j < ncols_; ++j) base_.a.add_col(cols[j]);
    base_.rlo = std::move(rlo);
    base_.rup = std::move(rup);

    root_lb_ = base_.lb;
    root_ub_ = base_.ub;
}

void BranchAndBound::append_row(const LinExpr& raw, RowSense s, double rhs) {
    LinExpr e = raw;
    e.compress();
    // rebuild column storage with the extra row
    std::vector<std::vector<std::pair<int, double>>> extra(ncols_);
    int r = base_.a.nrows;
    for (const auto& t : e.terms) extra[t.var].emplace_back(r, t.coef);
    lp::SparseCols na;
    na.nrows = r + 1;
    std::vector<std::pair<int, double>> col;
    for (int j = 0; j < ncols_; ++j) {
        col.clear();
        for (int k = base_.a.ptr[j]; k < base_.a.ptr[j + 1]; ++k)
            col.emplace_back(base_.a.idx[k], base_.a.val[k]);
        for (const auto& kv : extra[j]) col.push_back(kv);
        na.add_col(col);
    }
    base_.a = std::move(na);
    double b = rhs - e.constant;
    base_.rlo.push_back(s == RowSense::LE ? -kInf : b);
    base_.rup.push_back(s == RowSense::GE ? kInf : b);
}

/// Add one supporting-hyperplane cut per violated cone at x; returns #cuts.
int BranchAndBound::separate_socs(const std::vector<double>& x, double tol) {
    int added = 0;
    for (const auto& s : m_.socs()) {
        double rhsv = s.rhs.eval(x);
        std::vector<double> g(s.vec.size());
        double nrm = 0.0;
        for (size_t k = 0; k < s.vec.size(); ++k) {
            g[k] = s.vec[k].eval(x);
            nrm += g[k] * g[k];
        }
        nrm = std::sqrt(nrm);
        if (nrm <= rhsv + tol * (1.0 + std::fabs(rhsv))) continue;
        if (nrm < 1e-14) continue;  // only rhs < 0 possible; handled by the rhs>=0 row
        // u.vec(x) <= rhs(x) with u = g/|g| is valid for the cone and cuts x off
        LinExpr cut;
        for (size_t k = 0; k < s.vec.size(); ++k) {
            double u = g[k] / nrm;
            if (u == 0.0) continue;
            cut.constant += u * s.vec[k].constant;
            for (const auto& t : s.vec[k].terms) cut.add(t.var, u * t.coef);
        }
        cut.constant -= s.rhs.constant;
        for (const auto& t : s.rhs.terms) cut.add(t.var, -t.coef);
        append_row(cut, RowSense::LE, 0.0);
        ++added;
    }
    return added;
}

std::vector<ColStat> BranchAndBound::extend_basis(const std::vector<ColStat>& b, int ncols,
                                                  int nrows) {
    // basis layout is [structural cols | slack cols]; new cut slacks start basic
    std::vector<ColStat> out;
    out.reserve(ncols + nrows);
    int have = static_cast<int>(b.size()) - ncols;  // old row count
    if (have < 0) return out;                       // unusable
    out.insert(out.end(), b.begin(), b.begin() + ncols);
    out.insert(out.end(), b.begin() + ncols, b.end());
    for (int i = have; i < nrows; ++i) out.push_back(ColStat::Basic);
    return out;
}

LpResult BranchAndBound::solve_node_lp(std::vector<ColStat>* basis) {
    const std::vector<ColStat>* warm = nullptr;
    std::vector<ColStat> ext;
    if (basis && !basis->empty()) {
        ext = extend_basis(*basis, ncols_, base_.nrows());
        if (static_cast<int>(ext.size()) == ncols_ + base_.nrows()) warm = &ext;
    }
    LpResult r = lp::solve_lp(base_, opt_.lp, warm);
    lp_iters_ += r.iters;
    return r;
}

SolveResult BranchAndBound::run() {
    t0_ = std::chrono::steady_clock::now();
    SolveResult res;
    double incumbent = kInf;
    std::vector<double> inc_x;
    double best_open = -kInf;

    auto cutoff_ok = [&](double bound) {
        if (!std::isfinite(incumbent)) return true;
        double slack = std::max(opt_.abs_gap, opt_.rel_gap * std::fabs(incumbent));
        return bound < incumbent - slack;
    };

    // Optional start: fix binaries to the rounded hint and probe.
    if (opt_.start && static_cast<int>(opt_.start->size()) == ncols_ && !binaries_.empty()) {
        for (int j : binaries_) {
            double v = (*opt_.start)[j] >= 0.5 ? 1.0 : 0.0;
            base_.lb[j] = v;
            base_.ub[j] = v;
        }
        for (int round = 0; round <= opt_.max_oa_rounds; ++round) {
            LpResult r = solve_node_lp(nullptr);
            if (r.status != LpStatus::Optimal) break;
            std::vector<double> x = r.x;
            if (separate_socs(x, opt_.soc_tol) == 0) {
                double obj = 0.0;
                for (int j = 0; j < ncols_; ++j) obj += base_.c[j] * x[j];
                incumbent = obj;
                inc_x = x;
                break;
            }
        }
        for (int j : binaries_) {
            base_.lb[j] = root_lb_[j];
            base_.ub[j] = root_ub_[j];
        }
    }

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    long seq = 0;
    open.push({-kInf, 0, seq++, {}, {}});

    SolveStatus exhaust_status = SolveStatus::Optimal;
    bool any_feasible_node = std::isfinite(incumbent);

    while (!open.empty()) {
        if (res.nodes >= opt_.max_nodes) {
            exhaust_status = SolveStatus::NodeLimit;
            best_open = std::max(best_open, -kInf);
            break;
        }
        if (elapsed() > opt_.time_limit_s) {
            exhaust_status = SolveStatus::TimeLimit;
            break;
        }
        Node node = open.top();
        open.pop();
        if (!cutoff_ok(node.bound)) continue;
        best_open = node.bound;
        ++res.nodes;

        // apply fixings
        for (const auto& [j, v] : node.fixings) {
            base_.lb[j] = v;
            base_.ub[j] = v;
        }

        LpResult r;
        bool node_done = false;
        std::vector<ColStat> basis = node.basis;
        for (int round = 0;; ++round) {
            r = solve_node_lp(&basis);
            if (r.status == LpStatus::Infeasible) {
                node_done = true;
                break;
            }
            if (r.status == LpStatus::Unbounded) {
                // restore and report: relaxation unbounded at root means model bug
                for (const auto& [j, v] : node.fixings) {
                    base_.lb[j] = root_lb_[j];
                    base_.ub[j] = root_ub_[j];
                }
                res.status = SolveStatus::Unbounded;
                res.best_bound = -kInf * sign_;
                return res;
            }
            if (r.status != LpStatus::Optimal) {
                node_done = true;  // numerical failure: drop node conservatively
                break;
            }
            basis = r.basis;
            double node_bound = r.obj;
            if (!cutoff_ok(node_bound)) {
                node_done = true;
                break;
            }
            // integral?
            int frac = -1;
            double frac_score = -1.0;
            for (int j : binaries_) {
                double f = r.x[j] - std::floor(r.x[j]);
                double score = std::min(f, 1.0 - f);
                if (score > 1e-6 && score > frac_score) {
                    frac_score = score;
                    frac = j;
                }
            }
            if (frac < 0) {
                if (round < opt_.max_oa_rounds && separate_socs(r.x, opt_.soc_tol) > 0) continue;
                // integral and cone-feasible: incumbent candidate
                std::vector<double> x = r.x;
                for (int j : binaries_) x[j] = std::round(x[j]);
                if (r.obj < incumbent) {
                    incumbent = r.obj;
                    inc_x = x;
                    any_feasible_node = true;
                }
                node_done = true;
                break;
            }
            // fractional: refine cones a little before branching
            if (round < opt_.max_oa_rounds && separate_socs(r.x, 1e-4) > 0) continue;
            // branch
            Node up{node_bound, node.depth + 1, seq++, node.fixings, basis};
            up.fixings.emplace_back(frac, 1);
            Node down{node_bound, node.depth + 1, seq++, node.fixings, basis};
            down.fixings.emplace_back(frac, 0);
            if (r.x[frac] >= 0.5) {
                open.push(std::move(up));
                open.push(std::move(down));
            } else {
                open.push(std::move(down));
                open.push(std::move(up));
            }
            node_done = true;
            break;
        }
        (void)node_done;

        // restore bounds
        for (const auto& [j, v] : node.fixings) {
            base_.lb[j] = root_lb_[j];
            base_.ub[j] = root_ub_[j];
        }
    }

    res.lp_iters = lp_iters_;
    res.seconds = elapsed();
    double lb = open.empty() ? incumbent : std::min(incumbent, open.top().bound);
    if (exhaust_status != SolveStatus::Optimal && !open.empty())
        lb = std::min(lb, std::max(best_open, open.top().bound));

    if (std::isfinite(incumbent)) {
        res.obj = sign_ * incumbent;
        res.best_bound = sign_ * lb;
        res.x = inc_x;
        res.status = (exhaust_status == SolveStatus::Optimal) ? SolveStatus::Optimal
                                                              : SolveStatus::Feasible;
        if (exhaust_status == SolveStatus::TimeLimit && res.status == SolveStatus::Feasible)
            res.status = SolveStatus::Feasible;
    } else {
        res.status = (exhaust_status == SolveStatus::Optimal)
                         ? SolveStatus::Infeasible
                         : (any_feasible_node ? SolveStatus::Error : exhaust_status);
        res.obj = sign_ * kInf;
        res.best_bound = sign_ * lb;
    }
    return res;
}

}  // namespace

SolveResult solve_model(const ModelIR& m, const SolveOptions& opt) {
    BranchAndBound bb(m, opt);
    return bb.run();
}

}  // namespace ehdn
