#include "ehdn/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace ehdn::lp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Eta {
    int pos;                                  // basis position replaced
    std::vector<std::pair<int, double>> w;    // sparse pivot column B^-1 a_q
    double wr;                                // pivot element w[pos]
};

class Simplex {
public:
    Simplex(const LpProblem& p, const LpOptions& opt) : p_(p), opt_(opt) {
        n_ = p.ncols();
        m_ = p.nrows();
        ncols_ = n_ + m_;
        build_scaled();
    }

    LpResult run(const std::vector<ColStat>* warm);

private:
    // -- data ---------------------------------------------------------------
    const LpProblem& p_;
    LpOptions opt_;
    int n_ = 0, m_ = 0, ncols_ = 0;

    std::vector<double> cs_;          // scaled structural costs (size n_)
    std::vector<double> lb_, ub_;     // scaled bounds, size ncols_ (slacks last)
    std::vector<double> colscale_, rowscale_;
    SparseCols as_;                   // scaled structural columns

    std::vector<ColStat> stat_;
    std::vector<int> basic_;          // column at each basis position
    std::vector<int> pos_of_;         // basis position per column, -1 if nonbasic

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    std::vector<Eta> etas_;
    bool factor_ok_ = false;

    std::vector<double> xb_;          // basic values, indexed by basis position
    long iters_ = 0;
    int degen_streak_ = 0;
    bool bland_ = false;

    // -- helpers ------------------------------------------------------------
    double cost_of(int j) const { return j < n_ ? cs_[j] : 0.0; }

    template <typename F>
    void for_col(int j, F&& f) const {
        if (j < n_) {
            for (int k = as_.ptr[j]; k < as_.ptr[j + 1]; ++k) f(as_.idx[k], as_.val[k]);
        } else {
            f(j - n_, -1.0);
        }
    }

    double nonbasic_value(int j) const {
        switch (stat_[j]) {
            case ColStat::AtLower: return lb_[j];
            case ColStat::AtUpper: return ub_[j];
            default: return 0.0;
        }
    }

    void build_scaled();
    bool factorize();
    void ftran(std::vector<double>& v) const;
    void btran(std::vector<double>& v);
    void compute_basic_values();
    double infeasibility() const;
    bool refactor_and_check();
    void set_default_basis();
    bool adopt_warm(const std::vector<ColStat>& warm);
    LpResult finish(LpStatus st);
};

void Simplex::build_scaled() {
    colscale_.assign(n_, 1.0);
    rowscale_.assign(m_, 1.0);
    if (opt_.scale && m_ > 0) {
        // two rounds of max-norm equilibration, rounded to powers of two
        for (int round = 0; round < 2; ++round) {
            std::vector<double> rmax(m_, 0.0);
            for (int j = 0; j < n_; ++j)
                for (int k = p_.a.ptr[j]; k < p_.a.ptr[j + 1]; ++k) {
                    double v = std::fabs(p_.a.val[k]) * colscale_[j] * rowscale_[p_.a.idx[k]];
                    rmax[p_.a.idx[k]] = std::max(rmax[p_.a.idx[k]], v);
                }
            for (int i = 0; i < m_; ++i)
                if (rmax[i] > 0) rowscale_[i] *= std::exp2(-std::round(std::log2(rmax[i])));
            std::vector<double> cmax(n_, 0.0);
            for (int j = 0; j < n_; ++j)
                for (int k = p_.a.ptr[j]; k < p_.a.ptr[j + 1]; ++k) {
                    double v = std::fabs(p_.a.val[k]) * colscale_[j] * rowscale_[p_.a.idx[k]];
                    cmax[j] = std::max(cmax[j], v);
                }
            for (int j = 0; j < n_; ++j)
                if (cmax[j] > 0) colscale_[j] *= std::exp2(-std::round(std::log2(cmax[j])));
        }
    }

    as_.nrows = m_;
    as_.ptr.assign(1, 0);
    as_.idx.clear();
    as_.val.clear();
    std::vector<std::pair<int, double>> col;
    for (int j = 0; j < n_; ++j) {
        col.clear();
        for (int k = p_.a.ptr[j]; k < p_.a.ptr[j + 1]; ++k)
            col.emplace_back(p_.a.idx[k], p_.a.val[k] * colscale_[j] * rowscale_[p_.a.idx[k]]);
        as_.add_col(col);
    }

    cs_.resize(n_);
    lb_.resize(ncols_);
    ub_.resize(ncols_);
    for (int j = 0; j < n_; ++j) {
        cs_[j] = p_.c[j] * colscale_[j];
        lb_[j] = p_.lb[j] / colscale_[j];
        ub_[j] = p_.ub[j] / colscale_[j];
    }
    for (int i = 0; i < m_; ++i) {
        lb_[n_ + i] = p_.rlo[i] * rowscale_[i];
        ub_[n_ + i] = p_.rup[i] * rowscale_[i];
    }
}

void Simplex::set_default_basis() {
    stat_.assign(ncols_, ColStat::AtLower);
    for (int j = 0; j < n_; ++j) {
        if (std::isfinite(lb_[j]))
            stat_[j] = ColStat::AtLower;
        else if (std::isfinite(ub_[j]))
            stat_[j] = ColStat::AtUpper;
        else
            stat_[j] = ColStat::FreeZero;
    }
    for (int i = 0; i < m_; ++i) stat_[n_ + i] = ColStat::Basic;
}

bool Simplex::adopt_warm(const std::vector<ColStat>& warm) {
    if (static_cast<int>(warm.size()) != ncols_) return false;
    int nb = 0;
    for (auto s : warm)
        if (s == ColStat::Basic) ++nb;
    if (nb != m_) return false;
    stat_ = warm;
    // nonbasic statuses must be representable
    for (int j = 0; j < ncols_; ++j) {
        if (stat_[j] == ColStat::Basic) continue;
        if (stat_[j] == ColStat::AtLower && !std::isfinite(lb_[j]))
            stat_[j] = std::isfinite(ub_[j]) ? ColStat::AtUpper : ColStat::FreeZero;
        else if (stat_[j] == ColStat::AtUpper && !std::isfinite(ub_[j]))
            stat_[j] = std::isfinite(lb_[j]) ? ColStat::AtLower : ColStat::FreeZero;
    }
    return true;
}

bool Simplex::factorize() {
    basic_.clear();
    pos_of_.assign(ncols_, -1);
    for (int j = 0; j < ncols_; ++j)
        if (stat_[j] == ColStat::Basic) {
            pos_of_[j] = static_cast<int>(basic_.size());
            basic_.push_back(j);
        }
    if (static_cast<int>(basic_.size()) != m_) return false;

    Eigen::SparseMatrix<double> b(m_, m_);
    std::vector<Eigen::Triplet<double>> trips;
    for (int k = 0; k < m_; ++k)
        for_col(basic_[k], [&](int i, double v) { trips.emplace_back(i, k, v); });
    b.setFromTriplets(trips.begin(), trips.end());
    lu_.compute(b);
    etas_.clear();
    factor_ok_ = (lu_.info() == Eigen::Success);
    return factor_ok_;
}

void Simplex::ftran(std::vector<double>& v) const {
    Eigen::Map<Eigen::VectorXd> mv(v.data(), m_);
    Eigen::VectorXd s = lu_.solve(mv);
    mv = s;
    for (const auto& e : etas_) {
        double t = v[e.pos] / e.wr;
        if (t != 0.0) {
            for (const auto& [i, wi] : e.w) v[i] -= wi * t;
        }
        v[e.pos] = t;
    }
}

void Simplex::btran(std::vector<double>& v) {
    // B_k^{-T} = B_0^{-T} E_1^T ... E_k^T: eta transposes newest-first, then LU^T
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        double dot = 0.0;
        for (const auto& [i, wi] : it->w) dot += wi * v[i];
        v[it->pos] = (v[it->pos] - dot) / it->wr;
    }
    Eigen::Map<Eigen::VectorXd> mv(v.data(), m_);
    Eigen::VectorXd s = lu_.transpose().solve(mv);
    mv = s;
}

void Simplex::compute_basic_values() {
    std::vector<double> rhs(m_, 0.0);
    for (int j = 0; j < ncols_; ++j) {
        if (stat_[j] == ColStat::Basic) continue;
        double xv = nonbasic_value(j);
        if (xv != 0.0) for_col(j, [&](int i, double v) { rhs[i] -= v * xv; });
    }
    ftran(rhs);
    xb_ = std::move(rhs);
}

double Simplex::infeasibility() const {
    double worst = 0.0;
    for (int k = 0; k < m_; ++k) {
        int j = basic_[k];
        if (xb_[k] < lb_[j]) worst = std::max(worst, lb_[j] - xb_[k]);
        if (xb_[k] > ub_[j]) worst = std::max(worst, xb_[k] - ub_[j]);
    }
    return worst;
}

bool Simplex::refactor_and_check() {
    if (!factorize()) {
        set_default_basis();
        if (!factorize()) return false;
    }
    compute_basic_values();
    return true;
}

LpResult Simplex::finish(LpStatus st) {
    LpResult r;
    r.status = st;
    r.iters = iters_;
    if (static_cast<int>(stat_.size()) != ncols_) set_default_basis();
    r.basis = stat_;
    r.x.assign(n_, 0.0);
    r.row_value.assign(m_, 0.0);
    r.y.assign(m_, 0.0);

    std::vector<double> full(ncols_, 0.0);
    for (int j = 0; j < ncols_; ++j)
        if (stat_[j] != ColStat::Basic) full[j] = nonbasic_value(j);
    for (size_t k = 0; k < basic_.size() && k < xb_.size(); ++k) full[basic_[k]] = xb_[k];

    double obj = 0.0;
    for (int j = 0; j < n_; ++j) {
        r.x[j] = full[j] * colscale_[j];
        obj += p_.c[j] * r.x[j];
    }
    for (int i = 0; i < m_; ++i) r.row_value[i] = full[n_ + i] / rowscale_[i];
    r.obj = obj;

    if (factor_ok_ && m_ > 0 && static_cast<int>(basic_.size()) == m_) {
        std::vector<double> cb(m_);
        for (int k = 0; k < m_; ++k) cb[k] = cost_of(basic_[k]);
        btran(cb);
        for (int i = 0; i < m_; ++i) r.y[i] = cb[i] * rowscale_[i];
    }
    return r;
}

LpResult Simplex::run(const std::vector<ColStat>* warm) {
    if (m_ == 0) {
        // pure bound minimization
        stat_.assign(ncols_, ColStat::AtLower);
        basic_.clear();
        xb_.clear();
        factor_ok_ = false;
        for (int j = 0; j < n_; ++j) {
            if (cs_[j] > 0) {
                if (!std::isfinite(lb_[j])) return finish(LpStatus::Unbounded);
                stat_[j] = ColStat::AtLower;
            } else if (cs_[j] < 0) {
                if (!std::isfinite(ub_[j])) return finish(LpStatus::Unbounded);
                stat_[j] = ColStat::AtUpper;
            } else {
                stat_[j] = std::isfinite(lb_[j])
                               ? ColStat::AtLower
                               : (std::isfinite(ub_[j]) ? ColStat::AtUpper : ColStat::FreeZero);
            }
            if (lb_[j] > ub_[j]) return finish(LpStatus::Infeasible);
        }
        return finish(LpStatus::Optimal);
    }

    set_default_basis();
    for (int j = 0; j < ncols_; ++j)
        if (lb_[j] > ub_[j] + opt_.feas_tol) return finish(LpStatus::Infeasible);

    if (warm) adopt_warm(*warm);
    if (!refactor_and_check()) return finish(LpStatus::NumericalFailure);

    const double ftol = opt_.feas_tol;
    int confirmations = 0;

    std::vector<double> y(m_), w(m_);
    while (iters_ < opt_.max_iters) {
        if (static_cast<int>(etas_.size()) >= opt_.refactor_every) {
            if (!refactor_and_check()) return finish(LpStatus::NumericalFailure);
        }

        double infeas = infeasibility();
        bool phase1 = infeas > 10.0 * ftol;

        // phase costs: phase 1 drives violated basics toward their bounds
        std::vector<double> cb(m_, 0.0);
        for (int k = 0; k < m_; ++k) {
            int j = basic_[k];
            if (phase1) {
                if (xb_[k] < lb_[j] - ftol)
                    cb[k] = -1.0;
                else if (xb_[k] > ub_[j] + ftol)
                    cb[k] = 1.0;
            } else {
                cb[k] = cost_of(j);
            }
        }
        y = cb;
        btran(y);

        // pricing
        int q = -1;
        int dir = 0;
        double best = 0.0;
        for (int j = 0; j < ncols_; ++j) {
            if (stat_[j] == ColStat::Basic) continue;
            if (ub_[j] - lb_[j] < 1e-14 && stat_[j] != ColStat::FreeZero) continue;  // fixed
            double cj = phase1 ? 0.0 : cost_of(j);
            double d = cj;
            for_col(j, [&](int i, double v) { d -= y[i] * v; });
            double tol = opt_.opt_tol * (1.0 + std::fabs(cj));
            int cand_dir = 0;
            if (stat_[j] == ColStat::AtLower && d < -tol)
                cand_dir = +1;
            else if (stat_[j] == ColStat::AtUpper && d > tol)
                cand_dir = -1;
            else if (stat_[j] == ColStat::FreeZero && std::fabs(d) > tol)
                cand_dir = d > 0 ? -1 : +1;
            if (cand_dir == 0) continue;
            if (bland_) {
                q = j;
                dir = cand_dir;
                break;
            }
            if (std::fabs(d) > best + 1e-15) {
                best = std::fabs(d);
                q = j;
                dir = cand_dir;
            }
        }

        if (q < 0) {
            // no eligible entering column: confirm on a fresh factorization
            if (confirmations < 3 && !etas_.empty()) {
                ++confirmations;
                if (!refactor_and_check()) return finish(LpStatus::NumericalFailure);
                continue;
            }
            return finish(phase1 ? LpStatus::Infeasible : LpStatus::Optimal);
        }
        confirmations = 0;

        // direction column
        std::fill(w.begin(), w.end(), 0.0);
        for_col(q, [&](int i, double v) { w[i] = v; });
        ftran(w);

        // ratio test; entering moves by theta*dir, basic k changes by -theta*dir*w[k]
        double theta = kInf;
        int leave_pos = -1;
        double leave_bound = 0.0;
        bool leave_at_upper = false;
        double best_piv = 0.0;
        for (int k = 0; k < m_; ++k) {
            double delta = dir * w[k];
            if (std::fabs(delta) <= opt_.pivot_tol) continue;
            int j = basic_[k];
            double bound;
            bool at_up;
            if (delta > 0) {
                // basic decreases; blocks at the nearest bound below its value
                if (xb_[k] > ub_[j] + ftol) {
                    bound = ub_[j];
                    at_up = true;
                } else {
                    bound = lb_[j];
                    at_up = false;
                }
            } else {
                // basic increases
                if (xb_[k] < lb_[j] - ftol) {
                    bound = lb_[j];
                    at_up = false;
                } else {
                    bound = ub_[j];
                    at_up = true;
                }
            }
            if (!std::isfinite(bound)) continue;
            double t = (xb_[k] - bound) / delta;
            if (t < 0) t = 0;
            double piv = std::fabs(delta);
            if (t < theta - 1e-10 || (t < theta + 1e-10 && piv > best_piv)) {
                theta = t;
                leave_pos = k;
                leave_bound = bound;
                leave_at_upper = at_up;
                best_piv = piv;
            }
        }

        double flip = ub_[q] - lb_[q];  // entering var's own range
        bool do_flip = false;
        if (stat_[q] != ColStat::FreeZero && std::isfinite(flip) && flip < theta) {
            theta = flip;
            do_flip = true;
        }

        if (!std::isfinite(theta)) {
            return finish(phase1 ? LpStatus::NumericalFailure : LpStatus::Unbounded);
        }

        ++iters_;
        if (theta <= 1e-12) {
            if (++degen_streak_ > 300) bland_ = true;
        } else {
            degen_streak_ = 0;
            bland_ = false;
        }

        if (do_flip) {
            stat_[q] = (stat_[q] == ColStat::AtLower) ? ColStat::AtUpper : ColStat::AtLower;
            compute_basic_values();
            continue;
        }

        // pivot
        int lv = basic_[leave_pos];
        double wr = w[leave_pos];
        Eta e;
        e.pos = leave_pos;
        e.wr = wr;
        for (int i = 0; i < m_; ++i)
            if (i != leave_pos && std::fabs(w[i]) > 1e-13) e.w.emplace_back(i, w[i]);
        etas_.push_back(std::move(e));

        stat_[lv] = leave_at_upper ? ColStat::AtUpper : ColStat::AtLower;
        if (!std::isfinite(leave_bound)) stat_[lv] = ColStat::FreeZero;
        stat_[q] = ColStat::Basic;
        pos_of_[lv] = -1;
        pos_of_[q] = leave_pos;
        basic_[leave_pos] = q;
        compute_basic_values();
    }
    return finish(LpStatus::IterLimit);
}

}  // namespace

LpResult solve_lp(const LpProblem& p, const LpOptions& opt, const std::vector<ColStat>* warm) {
    Simplex s(p, opt);
    return s.run(warm);
}

}  // namespace ehdn::lp
