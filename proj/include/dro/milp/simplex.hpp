#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "dro/error.hpp"
#include "dro/milp/model.hpp"
#include "dro/milp/sparse_lu.hpp"

namespace dro::milp {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit, TimeLimit, Singular };

enum class VarStatus : std::uint8_t { AtLower = 0, AtUpper = 1, Free = 2, Basic = 3 };

/// Bounded-variable revised simplex over the slack form  A x - s = 0  with
/// row senses folded into slack bounds.  Two-phase: a feasibility phase that
/// prices the sum of basic bound violations, then the true objective.  The
/// basis inverse is a sparse LU refreshed periodically, with product-form
/// updates between refactorizations.  Dantzig pricing with a Harris-style
/// two-pass ratio test; falls back to Bland's rule after a degenerate streak.
class Simplex {
public:
    explicit Simplex(const MilpModel& model) {
        model.validate();
        n_ = static_cast<int>(model.vars.size());
        m_ = static_cast<int>(model.rows.size());
        ncols_ = n_ + m_;

        cols_.assign(ncols_, {});
        for (int i = 0; i < m_; ++i) {
            for (const auto& [j, v] : model.rows[i].coeffs)
                if (v != 0.0) cols_[j].push_back({i, v});
            cols_[n_ + i].push_back({i, -1.0});
        }

        // geometric-mean equilibration, rounded to powers of two so scaling
        // introduces no rounding error; the simplex then runs on
        // A'_ij = r_i A_ij c_j with x' = x / c_j and s' = r_i s
        rowscale_.assign(m_, 1.0);
        colscale_.assign(n_, 1.0);
        for (int sweep = 0; sweep < 3; ++sweep) {
            for (int j = 0; j < n_; ++j) {
                double lo = kInf, hi = 0.0;
                for (const auto& e : cols_[j]) {
                    const double a = std::abs(e.val * rowscale_[e.idx] * colscale_[j]);
                    lo = std::min(lo, a);
                    hi = std::max(hi, a);
                }
                if (hi > 0.0) colscale_[j] /= std::sqrt(lo * hi);
            }
            std::vector<double> rlo(m_, kInf), rhi(m_, 0.0);
            for (int j = 0; j < n_; ++j) {
                for (const auto& e : cols_[j]) {
                    const double a = std::abs(e.val * rowscale_[e.idx] * colscale_[j]);
                    rlo[e.idx] = std::min(rlo[e.idx], a);
                    rhi[e.idx] = std::max(rhi[e.idx], a);
                }
            }
            for (int i = 0; i < m_; ++i)
                if (rhi[i] > 0.0) rowscale_[i] /= std::sqrt(rlo[i] * rhi[i]);
        }
        for (auto& s : rowscale_) s = std::exp2(std::round(std::log2(s)));
        for (auto& s : colscale_) s = std::exp2(std::round(std::log2(s)));
        for (int j = 0; j < n_; ++j)
            for (auto& e : cols_[j]) e.val *= rowscale_[e.idx] * colscale_[j];

        lb_.assign(ncols_, 0.0);
        ub_.assign(ncols_, 0.0);
        for (int j = 0; j < n_; ++j) {
            lb_[j] = model.vars[j].lb / colscale_[j];
            ub_[j] = model.vars[j].ub / colscale_[j];
        }
        for (int i = 0; i < m_; ++i) {
            const auto& r = model.rows[i];
            const double rs = rowscale_[i];
            switch (r.sense) {
            case RowSense::LE: lb_[n_ + i] = -kInf; ub_[n_ + i] = r.rhs * rs; break;
            case RowSense::GE: lb_[n_ + i] = r.rhs * rs; ub_[n_ + i] = kInf; break;
            case RowSense::EQ: lb_[n_ + i] = r.rhs * rs; ub_[n_ + i] = r.rhs * rs; break;
            }
        }
        model_lb_ = lb_;
        model_ub_ = ub_;

        cost_.assign(ncols_, 0.0);
        const double sgn = model.obj_sense == ObjSense::Maximize ? -1.0 : 1.0;
        for (const auto& [j, v] : model.objective) cost_[j] += sgn * v * colscale_[j];
        obj_sign_ = sgn;

        vstat_.assign(ncols_, VarStatus::AtLower);
        reset_to_slack_basis();
    }

    int num_structural() const { return n_; }

    /// Bounds are taken in model units and scaled internally.
    void set_bounds(int var, double lo, double hi) {
        lb_[var] = lo / colscale_[var];
        ub_[var] = hi / colscale_[var];
    }
    void restore_model_bounds(int var) {
        lb_[var] = model_lb_[var];
        ub_[var] = model_ub_[var];
    }

    void reset_to_slack_basis() {
        basic_.resize(m_);
        pos_.assign(ncols_, -1);
        for (int j = 0; j < n_; ++j) vstat_[j] = nonbasic_default(j);
        for (int i = 0; i < m_; ++i) {
            const int c = n_ + i;
            vstat_[c] = VarStatus::Basic;
            basic_[i] = c;
            pos_[c] = i;
        }
        factored_ = false;
    }

    std::vector<VarStatus> save_status() const { return vstat_; }

    void load_status(const std::vector<VarStatus>& st) {
        if (static_cast<int>(st.size()) != ncols_) { reset_to_slack_basis(); return; }
        int nb = 0;
        for (int j = 0; j < ncols_; ++j)
            if (st[j] == VarStatus::Basic) ++nb;
        if (nb != m_) { reset_to_slack_basis(); return; }
        vstat_ = st;
        basic_.clear();
        pos_.assign(ncols_, -1);
        for (int j = 0; j < ncols_; ++j) {
            if (vstat_[j] == VarStatus::Basic) {
                pos_[j] = static_cast<int>(basic_.size());
                basic_.push_back(j);
            }
        }
        factored_ = false;
    }

    /// Runs the simplex from the current basis.
    LpStatus solve(std::int64_t max_iters = -1,
                   std::chrono::steady_clock::time_point deadline =
                       std::chrono::steady_clock::time_point::max(),
                   bool bland = false) {
        if (!prepare()) {
            reset_to_slack_basis();
            if (!prepare()) return LpStatus::Singular;
        }
        bland_ = bland;
        degenerate_streak_ = 0;
        phase1_threshold_ = feas_tol_;
        phase1_dual_floor_ = 0.0;

        std::int64_t iters = 0;
        int cleanup_rounds = 0;
        while (true) {
            if (max_iters >= 0 && iters >= max_iters) return LpStatus::IterLimit;
            if ((iters & 255) == 0 && deadline != std::chrono::steady_clock::time_point::max() &&
                std::chrono::steady_clock::now() >= deadline)
                return LpStatus::TimeLimit;

            const bool phase1 = max_basic_violation() > phase1_threshold_;
            compute_duals(phase1);

            const int q = pick_entering(phase1);
            if (q < 0) {
                // Phase optimum.  Refresh the factorization once and confirm;
                // product-form drift can fake optimality.
                if (cleanup_rounds < 3 && eta_.size() > 0) {
                    ++cleanup_rounds;
                    if (!refactor()) return LpStatus::Singular;
                    continue;
                }
                if (phase1) {
                    const double viol = max_basic_violation();
                    if (viol > 1e-7) return LpStatus::Infeasible;
                    // residual infeasibility at roundoff scale: carry on and
                    // optimize the true objective
                    phase1_threshold_ = viol * 1.5 + feas_tol_;
                    continue;
                }
                return LpStatus::Optimal;
            }

            ftran_column(q, w_);

            const double sigma =
                (vstat_[q] == VarStatus::AtLower || (vstat_[q] == VarStatus::Free && d_[q] < 0.0))
                    ? 1.0
                    : -1.0;

            const auto rt = ratio_test(q, sigma, phase1);
            if (rt.theta == kInf) {
                // a ray through stacked eta updates may be drift; confirm on
                // a fresh factorization
                if (!eta_.empty()) {
                    if (!refactor()) return LpStatus::Singular;
                    continue;
                }
                if (phase1) {
                    // candidates whose pull on the violated basics sits below
                    // the ratio-test pivot cut are pricing noise; step over
                    if (std::abs(d_[q]) < 1e-4) {
                        phase1_dual_floor_ =
                            std::max(4.0 * phase1_dual_floor_, 1.01 * std::abs(d_[q]));
                        continue;
                    }
                    throw Error(ErrorCode::NumericalFailure, "phase-1 ray: cannot restore feasibility");
                }
                return LpStatus::Unbounded;
            }

            if (rt.leaving_pos >= 0 && std::abs(w_[rt.leaving_pos]) < 1e-6 && !eta_.empty()) {
                // suspicious pivot magnitude: recompute from a fresh basis
                if (!refactor()) return LpStatus::Singular;
                continue;
            }
            if (!apply_step(q, sigma, rt)) return LpStatus::Singular;
            ++iters;
            ++iterations_total;
            cleanup_rounds = 0;

            if (rt.theta <= 1e-12) {
                if (++degenerate_streak_ > 600) bland_ = true;
            } else {
                degenerate_streak_ = 0;
                if (!bland) bland_ = false;
            }

            if (eta_.size() >= 60) {
                if (!refactor()) return LpStatus::Singular;
            }
        }
    }

    double objective_value() const {
        double v = 0.0;
        for (int j = 0; j < n_; ++j) v += cost_[j] * xval_[j];
        return obj_sign_ * v; // back to the model's sense
    }

    std::vector<double> structural_values() const {
        std::vector<double> out(xval_.begin(), xval_.begin() + n_);
        for (int j = 0; j < n_; ++j) out[std::size_t(j)] *= colscale_[j];
        return out;
    }

    double max_violation_all() const {
        double worst = 0.0;
        for (int j = 0; j < ncols_; ++j) {
            worst = std::max(worst, lb_[j] - xval_[j]);
            worst = std::max(worst, xval_[j] - ub_[j]);
        }
        return worst;
    }

    /// Reduced-cost sign check at the claimed optimum (complementary
    /// slackness for the bounded form).  Returns the worst violation.
    double dual_infeasibility() {
        compute_duals(false);
        double worst = 0.0;
        for (int j = 0; j < ncols_; ++j) {
            if (vstat_[j] == VarStatus::Basic) continue;
            if (vstat_[j] == VarStatus::AtLower && lb_[j] != ub_[j])
                worst = std::max(worst, -d_[j]);
            else if (vstat_[j] == VarStatus::AtUpper && lb_[j] != ub_[j])
                worst = std::max(worst, d_[j]);
            else if (vstat_[j] == VarStatus::Free)
                worst = std::max(worst, std::abs(d_[j]));
        }
        return worst;
    }

    std::int64_t iterations_total = 0;

private:
    struct RatioResult {
        double theta = kInf;
        int leaving_pos = -1;   // basis position; -1 means bound flip
        double leave_at = 0.0;  // bound value the leaving variable hits
        bool leave_upper = false;
    };

    VarStatus nonbasic_default(int j) const {
        if (std::isfinite(model_lb_[j])) return VarStatus::AtLower;
        if (std::isfinite(model_ub_[j])) return VarStatus::AtUpper;
        return VarStatus::Free;
    }

    double nonbasic_value(int j) const {
        switch (vstat_[j]) {
        case VarStatus::AtLower: return std::isfinite(lb_[j]) ? lb_[j] : 0.0;
        case VarStatus::AtUpper: return std::isfinite(ub_[j]) ? ub_[j] : 0.0;
        default: return 0.0;
        }
    }

    bool prepare() {
        if (!refactor()) return false;
        return true;
    }

    bool refactor() {
        std::vector<std::vector<SparseLU::Entry>> bcols(m_);
        for (int i = 0; i < m_; ++i) {
            bcols[i].reserve(cols_[basic_[i]].size());
            for (const auto& e : cols_[basic_[i]]) bcols[i].push_back({e.idx, e.val});
        }
        if (!lu_.factor(m_, bcols)) return false;
        eta_.clear();
        factored_ = true;
        recompute_basics();
        return true;
    }

    void recompute_basics() {
        xval_.resize(ncols_);
        for (int j = 0; j < ncols_; ++j)
            if (vstat_[j] != VarStatus::Basic) xval_[j] = nonbasic_value(j);
        std::vector<double> rhs(m_, 0.0);
        for (int j = 0; j < ncols_; ++j) {
            if (vstat_[j] == VarStatus::Basic) continue;
            const double xj = xval_[j];
            if (xj == 0.0) continue;
            for (const auto& e : cols_[j]) rhs[e.idx] -= e.val * xj;
        }
        lu_.solve(rhs);
        apply_etas(rhs);
        for (int i = 0; i < m_; ++i) xval_[basic_[i]] = rhs[i];
    }

    void apply_etas(std::vector<double>& x) const {
        for (const auto& e : eta_) {
            const double xr = x[e.r] / e.wr;
            for (const auto& [i, wi] : e.entries) x[i] -= wi * xr;
            x[e.r] = xr;
        }
    }

    void apply_etas_transposed(std::vector<double>& x) const {
        for (auto it = eta_.rbegin(); it != eta_.rend(); ++it) {
            double t = x[it->r];
            for (const auto& [i, wi] : it->entries) t -= wi * x[i];
            x[it->r] = t / it->wr;
        }
    }

    // w <- B^{-1} A_q
    void ftran_column(int q, std::vector<double>& w) {
        w.assign(m_, 0.0);
        for (const auto& e : cols_[q]) w[e.idx] = e.val;
        lu_.solve(w);
        apply_etas(w);
    }

    double max_basic_violation() const {
        double worst = 0.0;
        for (int i = 0; i < m_; ++i) {
            const int j = basic_[i];
            worst = std::max(worst, lb_[j] - xval_[j]);
            worst = std::max(worst, xval_[j] - ub_[j]);
        }
        return worst;
    }

    void compute_duals(bool phase1) {
        pi_.assign(m_, 0.0);
        bool any = false;
        for (int i = 0; i < m_; ++i) {
            const int j = basic_[i];
            if (phase1) {
                if (xval_[j] < lb_[j] - feas_tol_) { pi_[i] = -1.0; any = true; }
                else if (xval_[j] > ub_[j] + feas_tol_) { pi_[i] = 1.0; any = true; }
            } else if (cost_[j] != 0.0) {
                pi_[i] = cost_[j];
                any = true;
            }
        }
        d_.assign(ncols_, 0.0);
        if (any) {
            apply_etas_transposed(pi_);
            lu_.solve_transposed(pi_);
        }
        for (int j = 0; j < ncols_; ++j) {
            if (vstat_[j] == VarStatus::Basic) continue;
            double dj = phase1 ? 0.0 : cost_[j];
            if (any)
                for (const auto& e : cols_[j]) dj -= pi_[e.idx] * e.val;
            d_[j] = dj;
        }
    }

    int pick_entering(bool phase1) const {
        int best = -1;
        double best_score = phase1 ? std::max(dual_tol_, phase1_dual_floor_) : dual_tol_;
        for (int j = 0; j < ncols_; ++j) {
            if (vstat_[j] == VarStatus::Basic) continue;
            if (lb_[j] == ub_[j]) continue; // fixed
            double score = 0.0;
            if (vstat_[j] == VarStatus::AtLower) score = -d_[j];
            else if (vstat_[j] == VarStatus::AtUpper) score = d_[j];
            else score = std::abs(d_[j]);
            if (score <= best_score) continue;
            if (bland_) return j; // lowest eligible index
            best_score = score;
            best = j;
        }
        return best;
    }

    RatioResult ratio_test(int q, double sigma, bool phase1) const {
        RatioResult out;
        // bound-to-bound flip length of the entering variable
        double flip = kInf;
        if (std::isfinite(lb_[q]) && std::isfinite(ub_[q])) flip = ub_[q] - lb_[q];

        // Blocking bound of basic i when moving at rate r: a feasible basic
        // blocks at the bound ahead of it; a basic beyond a bound blocks at
        // that bound only while moving back toward it (moving further away
        // is priced by the phase-1 costs, not the ratio test).
        auto block_target = [&](int j, double rate, bool ph1) {
            if (rate > 0.0) {
                if (ph1 && xval_[j] < lb_[j] - feas_tol_) return lb_[j];
                if (ph1 && xval_[j] > ub_[j] + feas_tol_) return kInf;
                return ub_[j];
            }
            if (ph1 && xval_[j] > ub_[j] + feas_tol_) return ub_[j];
            if (ph1 && xval_[j] < lb_[j] - feas_tol_) return -kInf;
            return lb_[j];
        };

        // pass 1: relaxed limit
        double limit = flip;
        for (int i = 0; i < m_; ++i) {
            const double wi = w_[i];
            if (std::abs(wi) < 1e-9) continue;
            const double rate = -sigma * wi;
            const int j = basic_[i];
            const double target = block_target(j, rate, phase1);
            if (!std::isfinite(target)) continue;
            const double slack = target - xval_[j] + (rate > 0.0 ? feas_tol_ : -feas_tol_);
            limit = std::min(limit, std::max(0.0, slack / rate));
        }
        if (limit == kInf) return out; // unbounded direction

        // pass 2: among blockers within the relaxed limit pick the largest
        // pivot.  Any blocker skipped in favor of a better-scaled one is
        // overrun by at most the pass-1 slack, i.e. stays within tolerance.
        int best_i = -1;
        double best_w = 0.0, best_theta = kInf, best_target = 0.0;
        bool best_upper = false;
        for (int pass = 0; pass < 2 && best_i < 0; ++pass) {
        const double wcut = pass == 0 ? 1e-7 : 1e-9;
        for (int i = 0; i < m_; ++i) {
            const double wi = w_[i];
            if (std::abs(wi) < wcut) continue;
            const double rate = -sigma * wi;
            const int j = basic_[i];
            const double target = block_target(j, rate, phase1);
            if (!std::isfinite(target)) continue;
            const bool upper = target == ub_[j] && lb_[j] != ub_[j];
            const double theta = std::max(0.0, (target - xval_[j]) / rate);
            if (theta <= limit + 1e-12) {
                const double aw = std::abs(wi);
                const bool better = bland_
                                        ? (best_i < 0 || theta < best_theta - 1e-12 ||
                                           (theta <= best_theta + 1e-12 && i < best_i))
                                        : (aw > best_w + 1e-12 ||
                                           (aw > best_w - 1e-12 && theta < best_theta));
                if (better) {
                    best_i = i;
                    best_w = aw;
                    best_theta = theta;
                    best_target = target;
                    best_upper = upper;
                }
            }
        }
        }

        if (best_i < 0 || flip <= best_theta) {
            // entering variable flips to its opposite bound
            out.theta = flip;
            out.leaving_pos = -1;
            return out;
        }
        out.theta = best_theta;
        out.leaving_pos = best_i;
        out.leave_at = best_target;
        out.leave_upper = best_upper;
        return out;
    }

    bool apply_step(int q, double sigma, const RatioResult& rt) {
        const double theta = rt.theta;
        if (theta != 0.0) {
            for (int i = 0; i < m_; ++i) {
                if (w_[i] != 0.0) xval_[basic_[i]] -= sigma * theta * w_[i];
            }
        }
        if (rt.leaving_pos < 0) {
            // bound flip
            vstat_[q] = (vstat_[q] == VarStatus::AtLower) ? VarStatus::AtUpper : VarStatus::AtLower;
            xval_[q] = nonbasic_value(q);
            return true;
        }
        const int leave = basic_[rt.leaving_pos];
        xval_[q] = xval_[q] + sigma * theta;
        xval_[leave] = rt.leave_at;
        vstat_[leave] = rt.leave_upper ? VarStatus::AtUpper : VarStatus::AtLower;
        vstat_[q] = VarStatus::Basic;
        basic_[rt.leaving_pos] = q;
        pos_[leave] = -1;
        pos_[q] = rt.leaving_pos;

        Eta e;
        e.r = rt.leaving_pos;
        e.wr = w_[e.r];
        e.entries.reserve(16);
        for (int i = 0; i < m_; ++i)
            if (i != e.r && w_[i] != 0.0) e.entries.emplace_back(i, w_[i]);
        eta_.push_back(std::move(e));
        if (std::abs(eta_.back().wr) < 1e-6) {
            // ill-conditioned update: rebuild rather than let drift stack up
            if (!refactor()) return false;
        }
        return true;
    }

    struct Eta {
        int r;
        double wr;
        std::vector<std::pair<int, double>> entries;
    };

    int n_ = 0, m_ = 0, ncols_ = 0;
    std::vector<std::vector<SparseLU::Entry>> cols_;
    std::vector<double> rowscale_, colscale_;
    std::vector<double> lb_, ub_, model_lb_, model_ub_, cost_;
    double obj_sign_ = 1.0;
    double feas_tol_ = 1e-9;
    double dual_tol_ = 1e-9;

    std::vector<VarStatus> vstat_;
    std::vector<int> basic_, pos_;
    std::vector<double> xval_, w_, pi_, d_;
    SparseLU lu_;
    std::vector<Eta> eta_;
    bool factored_ = false;
    bool bland_ = false;
    int degenerate_streak_ = 0;
    double phase1_threshold_ = 1e-9;
    double phase1_dual_floor_ = 0.0;
};

} // namespace dro::milp
