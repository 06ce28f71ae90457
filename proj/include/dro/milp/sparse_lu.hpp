#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

namespace dro::milp {

/// Sparse LU factorization of a basis matrix, left-looking with partial
/// pivoting.  Columns are eliminated in the order given; pivot positions form
/// a topological order for the triangular structure, so the elimination of a
/// column processes only the pivot positions its fill actually reaches.
class SparseLU {
public:
    struct Entry {
        int idx;
        double val;
    };

    bool factor(int m, const std::vector<std::vector<Entry>>& columns) {
        m_ = m;
        lcol_.assign(m, {});
        ucol_.assign(m, {});
        udiag_.assign(m, 0.0);
        pivot_row_.assign(m, -1);
        row_pos_.assign(m, -1);
        work_.assign(m, 0.0);
        touched_.clear();

        std::priority_queue<int, std::vector<int>, std::greater<int>> pending;
        for (int j = 0; j < m_; ++j) {
            for (const auto& e : columns[j]) {
                work_[e.idx] = e.val;
                touched_.push_back(e.idx);
                if (row_pos_[e.idx] >= 0) pending.push(row_pos_[e.idx]);
            }
            while (!pending.empty()) {
                const int p = pending.top();
                pending.pop();
                while (!pending.empty() && pending.top() == p) pending.pop();
                const double xp = work_[pivot_row_[p]];
                if (xp == 0.0) continue;
                for (const auto& e : lcol_[p]) {
                    if (work_[e.idx] == 0.0) {
                        touched_.push_back(e.idx);
                        if (row_pos_[e.idx] >= 0) pending.push(row_pos_[e.idx]);
                    }
                    work_[e.idx] -= e.val * xp;
                }
            }
            // pivot: largest magnitude among not-yet-pivoted rows
            int prow = -1;
            double pval = 0.0;
            for (int r : touched_) {
                if (row_pos_[r] >= 0) continue;
                const double a = std::abs(work_[r]);
                if (a > pval) {
                    pval = a;
                    prow = r;
                }
            }
            if (prow < 0 || pval < 1e-11) {
                for (int r : touched_) work_[r] = 0.0;
                touched_.clear();
                return false; // numerically singular
            }
            const double piv = work_[prow];
            pivot_row_[j] = prow;
            row_pos_[prow] = j;
            udiag_[j] = piv;
            for (int r : touched_) {
                const double v = work_[r];
                work_[r] = 0.0;
                if (v == 0.0 || r == prow) continue;
                if (row_pos_[r] >= 0 && row_pos_[r] != j)
                    ucol_[j].push_back({row_pos_[r], v});
                else
                    lcol_[j].push_back({r, v / piv});
            }
            touched_.clear();
        }
        return true;
    }

    int size() const { return m_; }

    std::size_t fill() const {
        std::size_t n = 0;
        for (const auto& c : lcol_) n += c.size();
        for (const auto& c : ucol_) n += c.size();
        return n;
    }

    /// x <- B^{-1} b.  b indexed by row, result indexed by basis position.
    void solve(std::vector<double>& x) const {
        for (int p = 0; p < m_; ++p) {
            const double xp = x[pivot_row_[p]];
            if (xp == 0.0) continue;
            for (const auto& e : lcol_[p]) x[e.idx] -= e.val * xp;
        }
        tmp_.assign(m_, 0.0);
        for (int p = 0; p < m_; ++p) tmp_[p] = x[pivot_row_[p]];
        for (int j = m_ - 1; j >= 0; --j) {
            const double xj = tmp_[j] / udiag_[j];
            tmp_[j] = xj;
            if (xj == 0.0) continue;
            for (const auto& e : ucol_[j]) tmp_[e.idx] -= e.val * xj;
        }
        x.swap(tmp_);
    }

    /// x <- B^{-T} c.  c indexed by basis position, result indexed by row.
    void solve_transposed(std::vector<double>& x) const {
        for (int j = 0; j < m_; ++j) {
            double s = x[j];
            for (const auto& e : ucol_[j]) s -= e.val * x[e.idx];
            x[j] = s / udiag_[j];
        }
        for (int p = m_ - 1; p >= 0; --p) {
            double s = x[p];
            for (const auto& e : lcol_[p]) s -= e.val * x[row_pos_[e.idx]];
            x[p] = s;
        }
        tmp_.assign(m_, 0.0);
        for (int p = 0; p < m_; ++p) tmp_[pivot_row_[p]] = x[p];
        x.swap(tmp_);
    }

private:
    int m_ = 0;
    std::vector<std::vector<Entry>> lcol_; // multipliers, row-space indices
    std::vector<std::vector<Entry>> ucol_; // above-diagonal, pivot-space indices
    std::vector<double> udiag_;
    std::vector<int> pivot_row_; // pivot position -> row
    std::vector<int> row_pos_;   // row -> pivot position
    std::vector<double> work_;
    std::vector<int> touched_;
    mutable std::vector<double> tmp_;
};

} // namespace dro::milp
