#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "dro/ambiguity.hpp"
#include "dro/error.hpp"
#include "dro/grid.hpp"
#include "dro/milp/model.hpp"

namespace dro {

enum class RowTag { ObjectiveRow, BaseC, BaseD, StrongPlus, StrongMinus, Encoding, Linkage };

struct TaggedRow {
    RowTag tag;
    std::string name;
    std::vector<std::pair<int, double>> coeffs;
    milp::RowSense sense;
    double rhs;
};

/// Rows over a shared variable index space, tagged by constraint family.
struct BlockRows {
    std::vector<TaggedRow> rows;

    std::size_t count(RowTag tag) const {
        std::size_t n = 0;
        for (const auto& r : rows)
            if (r.tag == tag) ++n;
        return n;
    }
    void append_to(milp::MilpModel& model) const {
        for (const auto& r : rows) model.add_row(r.name, r.coeffs, r.sense, r.rhs);
    }
};

/// Indices of the shared indicator encoding: membership binaries b, up/down
/// jump trackers dm/dp, and the window endpoints.
struct EncodingVars {
    std::vector<int> b;  // b[k] = 1  iff  grid point k lies in [x^-, x^+]
    std::vector<int> dm; // up-jump:   b[k+1] - b[k] = dm[k] - dp[k]
    std::vector<int> dp; // down-jump
    int x_minus = -1;
    int x_plus = -1;
};

/// Indices of one block's dual variables.  y[2..4] are -1 when the block
/// carries no moment rows (those columns are fixed to zero).
struct BlockVars {
    std::array<int, 5> y{-1, -1, -1, -1, -1};
    std::vector<int> z;
    bool has_moments() const { return y[2] >= 0; }
};

/// Height of the indicator term: either a fixed constant folded into the row
/// coefficients, or a bounded decision variable linearized through auxiliary
/// products (one per affected row family).
struct HeightSpec {
    bool is_fixed = true;
    double value = 0.0; // when fixed

    int var = -1;       // when variable
    double lo = 0.0;
    double hi = 0.0;
    std::vector<int> w;  // w[k]  ~ x * b[k]
    std::vector<int> wp; // wp[k] ~ x * (b[k] - dp[k])
    std::vector<int> wm; // wm[k] ~ x * (b[k+1] - dm[k])

    static HeightSpec fixed(double v) {
        HeightSpec h;
        h.is_fixed = true;
        h.value = v;
        return h;
    }
    bool may_be_positive() const { return is_fixed ? value > 0.0 : hi > 0.0; }
};

/// Dual-objective coefficients of one block:
///   y1 - y2 - mu_plus*y3 + mu_minus*y4 + var_rhs*y5 - delta*sum caps[k]*z[k].
inline std::vector<std::pair<int, double>> dual_objective_coeffs(const AmbiguityBlock& block,
                                                                 const BlockVars& bv) {
    std::vector<std::pair<int, double>> c;
    c.reserve(bv.z.size() + 5);
    c.emplace_back(bv.y[0], 1.0);
    c.emplace_back(bv.y[1], -1.0);
    if (bv.has_moments()) {
        const auto& m = *block.moments;
        c.emplace_back(bv.y[2], -m.mu_plus);
        c.emplace_back(bv.y[3], m.mu_minus);
        c.emplace_back(bv.y[4], m.var_rhs);
    }
    const double d = block.grid.delta;
    for (std::size_t k = 0; k < bv.z.size(); ++k) {
        if (block.bin_caps[k] != 0.0) c.emplace_back(bv.z[k], -d * block.bin_caps[k]);
    }
    return c;
}

inline TaggedRow emit_dual_objective_row(const AmbiguityBlock& block, const BlockVars& bv,
                                         double rhs, const std::string& name = "dual_obj") {
    return {RowTag::ObjectiveRow, name, dual_objective_coeffs(block, bv), milp::RowSense::GE, rhs};
}

namespace detail {

// Coefficients of z_k + p_y(t) - y5*delta^2 >= ... shared by every family row.
inline void push_dual_terms(std::vector<std::pair<int, double>>& c, const BlockVars& bv,
                            const AmbiguityBlock& block, std::size_t zk, double t) {
    c.emplace_back(bv.z[zk], 1.0);
    c.emplace_back(bv.y[0], -1.0);
    c.emplace_back(bv.y[1], 1.0);
    if (bv.has_moments()) {
        const double d = block.grid.delta;
        c.emplace_back(bv.y[2], t);
        c.emplace_back(bv.y[3], -t);
        c.emplace_back(bv.y[4], t * t - block.moments->beta * t - d * d);
    }
}

// Product linearization of w ~ x*g for a 0/1 group expression g (given as
// sparse terms): w <= hi*g, w >= lo*g, w <= x - lo*(1-g), w >= x - hi*(1-g).
inline void push_product_linkage(BlockRows& out, const std::string& base, int w, int x, double lo,
                                 double hi, const std::vector<std::pair<int, double>>& group) {
    using milp::RowSense;
    auto with_group = [&](double wc, double gscale, int xvar, double xc) {
        std::vector<std::pair<int, double>> c;
        c.emplace_back(w, wc);
        for (const auto& [j, g] : group) c.emplace_back(j, gscale * g);
        if (xvar >= 0) c.emplace_back(xvar, xc);
        return c;
    };
    out.rows.push_back({RowTag::Linkage, base + "_ub", with_group(1.0, -hi, -1, 0.0), RowSense::LE, 0.0});
    out.rows.push_back({RowTag::Linkage, base + "_lb", with_group(1.0, -lo, -1, 0.0), RowSense::GE, 0.0});
    out.rows.push_back({RowTag::Linkage, base + "_xu", with_group(1.0, -lo, x, -1.0), RowSense::LE, -lo});
    out.rows.push_back({RowTag::Linkage, base + "_xl", with_group(1.0, -hi, x, -1.0), RowSense::GE, -hi});
}

} // namespace detail

/// Emits the dual-side constraint families of the safe MIP for one block.
///
/// Base families (the per-grid-point rows and their shifted twins) are always
/// emitted.  The strengthened families that zero the height term at the jump
/// positions are emitted whenever the height may be positive; they are what
/// certifies the window endpoints, and for heights that are provably
/// nonpositive the base families already imply them.
inline BlockRows emit_families(const AmbiguityBlock& block, const EncodingVars& enc,
                               const BlockVars& bv, const HeightSpec& height,
                               const std::string& prefix = "") {
    require_valid(block);
    if (!height.is_fixed && !(std::isfinite(height.lo) && std::isfinite(height.hi)))
        throw Error(ErrorCode::UnboundedHeight,
                    "variable height needs finite bounds from the polytope P");

    using milp::RowSense;
    const auto& grid = block.grid;
    const std::size_t n = grid.size();
    BlockRows out;

    auto height_term = [&](std::vector<std::pair<int, double>>& c, int bvar) {
        if (height.is_fixed) {
            if (height.value != 0.0) c.emplace_back(bvar, height.value);
        }
    };

    for (std::size_t k = 0; k < n; ++k) {
        std::vector<std::pair<int, double>> c;
        if (!height.is_fixed)
            c.emplace_back(height.w[k], 1.0);
        else
            height_term(c, enc.b[k]);
        detail::push_dual_terms(c, bv, block, k, grid[k]);
        out.rows.push_back({RowTag::BaseC, prefix + "c_" + std::to_string(k), std::move(c),
                            RowSense::GE, 0.0});
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
        std::vector<std::pair<int, double>> c;
        if (!height.is_fixed)
            c.emplace_back(height.w[k + 1], 1.0);
        else
            height_term(c, enc.b[k + 1]);
        detail::push_dual_terms(c, bv, block, k, grid[k + 1]);
        out.rows.push_back({RowTag::BaseD, prefix + "d_" + std::to_string(k), std::move(c),
                            RowSense::GE, 0.0});
    }

    if (height.may_be_positive()) {
        for (std::size_t k = 0; k < n; ++k) {
            std::vector<std::pair<int, double>> c;
            if (!height.is_fixed) {
                c.emplace_back(height.wp[k], 1.0);
            } else if (height.value != 0.0) {
                c.emplace_back(enc.b[k], height.value);
                c.emplace_back(enc.dp[k], -height.value);
            }
            detail::push_dual_terms(c, bv, block, k, grid[k]);
            out.rows.push_back({RowTag::StrongPlus, prefix + "sp_" + std::to_string(k),
                                std::move(c), RowSense::GE, 0.0});
        }
        for (std::size_t k = 0; k + 1 < n; ++k) {
            std::vector<std::pair<int, double>> c;
            if (!height.is_fixed) {
                c.emplace_back(height.wm[k], 1.0);
            } else if (height.value != 0.0) {
                c.emplace_back(enc.b[k + 1], height.value);
                c.emplace_back(enc.dm[k], -height.value);
            }
            detail::push_dual_terms(c, bv, block, k, grid[k + 1]);
            out.rows.push_back({RowTag::StrongMinus, prefix + "sm_" + std::to_string(k),
                                std::move(c), RowSense::GE, 0.0});
        }
    }

    if (!height.is_fixed) {
        for (std::size_t k = 0; k < n; ++k) {
            detail::push_product_linkage(out, prefix + "w" + std::to_string(k), height.w[k],
                                         height.var, height.lo, height.hi, {{enc.b[k], 1.0}});
            if (height.may_be_positive())
                detail::push_product_linkage(out, prefix + "wp" + std::to_string(k), height.wp[k],
                                             height.var, height.lo, height.hi,
                                             {{enc.b[k], 1.0}, {enc.dp[k], -1.0}});
        }
        if (height.may_be_positive()) {
            for (std::size_t k = 0; k + 1 < n; ++k)
                detail::push_product_linkage(out, prefix + "wm" + std::to_string(k), height.wm[k],
                                             height.var, height.lo, height.hi,
                                             {{enc.b[k + 1], 1.0}, {enc.dm[k], -1.0}});
        }
    }
    return out;
}

/// Emits the indicator-encoding rows: the jump budget, the difference
/// recursion (with b == 0 outside the grid), the window-width identity
/// x^+ - x^- = delta*(sum b - 1), and the endpoint recovery rows.
inline BlockRows emit_encoding(const TimeGrid& grid, const EncodingVars& enc) {
    if (grid.size() < 3) throw Error(ErrorCode::GridTooSmall, "encoding needs at least 3 grid points");

    using milp::RowSense;
    const std::size_t n = grid.size();
    const double d = grid.delta;
    BlockRows out;

    std::vector<std::pair<int, double>> budget;
    budget.reserve(2 * n);
    for (std::size_t k = 0; k < n; ++k) budget.emplace_back(enc.dp[k], 1.0);
    for (std::size_t k = 0; k < n; ++k) budget.emplace_back(enc.dm[k], 1.0);
    out.rows.push_back({RowTag::Encoding, "enc_jumps", std::move(budget), RowSense::LE, 2.0});

    for (std::size_t k = 0; k < n; ++k) {
        std::vector<std::pair<int, double>> c;
        if (k + 1 < n) c.emplace_back(enc.b[k + 1], 1.0);
        c.emplace_back(enc.b[k], -1.0);
        c.emplace_back(enc.dm[k], -1.0);
        c.emplace_back(enc.dp[k], 1.0);
        out.rows.push_back({RowTag::Encoding, "enc_diff_" + std::to_string(k), std::move(c),
                            RowSense::EQ, 0.0});
    }

    std::vector<std::pair<int, double>> width;
    width.reserve(n + 2);
    width.emplace_back(enc.x_plus, 1.0);
    width.emplace_back(enc.x_minus, -1.0);
    for (std::size_t k = 0; k < n; ++k) width.emplace_back(enc.b[k], -d);
    out.rows.push_back({RowTag::Encoding, "enc_width", std::move(width), RowSense::EQ, -d});

    std::vector<std::pair<int, double>> xm;
    xm.reserve(n + 1);
    xm.emplace_back(enc.x_minus, 1.0);
    for (std::size_t k = 0; k < n; ++k) xm.emplace_back(enc.dm[k], -(grid[k] + d));
    out.rows.push_back({RowTag::Encoding, "enc_xminus", std::move(xm), RowSense::EQ, 0.0});

    std::vector<std::pair<int, double>> xp;
    xp.reserve(n + 1);
    xp.emplace_back(enc.x_plus, 1.0);
    for (std::size_t k = 0; k < n; ++k) xp.emplace_back(enc.dp[k], -grid[k]);
    out.rows.push_back({RowTag::Encoding, "enc_xplus", std::move(xp), RowSense::EQ, 0.0});

    return out;
}

/// Lower bound on x^- so the up-jump index x^- - delta stays inside the grid.
inline double x_minus_lower_bound(const TimeGrid& grid) { return grid.t0 + grid.delta; }

} // namespace dro
