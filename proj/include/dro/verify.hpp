#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dro/ambiguity.hpp"
#include "dro/milp/branch_bound.hpp"
#include "dro/model_build.hpp"
#include "dro/quad_dual.hpp"

namespace dro {

/// One block of a solved certificate: the indicator height, the window, the
/// five dual multipliers and the per-bin envelope multipliers, together with
/// the ambiguity data they were solved against.
struct CertBlock {
    std::string name;
    double height = 0.0;
    AmbiguityBlock block;
    std::array<double, 5> y{};
    std::vector<double> z;

    double dual_objective() const {
        double v = y[0] - y[1];
        if (block.moments) {
            v += -block.moments->mu_plus * y[2] + block.moments->mu_minus * y[3] +
                 block.moments->var_rhs * y[4];
        }
        double zsum = 0.0;
        for (std::size_t k = 0; k < z.size(); ++k) zsum += block.bin_caps[k] * z[k];
        return v - block.grid.delta * zsum;
    }

    QuadDual quad() const {
        QuadDual q;
        q.y = y;
        q.beta = block.moments ? block.moments->beta : 0.0;
        return q;
    }
};

struct Certificate {
    std::string kind; // chroma | var | generic
    double x_minus = 0.0;
    double x_plus = 0.0;
    double objective = 0.0;
    std::vector<CertBlock> blocks;
};

struct FeasReport {
    bool feasible = false;
    double worst_value = 0.0;
    double witness = 0.0;
    std::size_t checked_points = 0;
};

namespace detail {

inline void cert_block_wellformed(const CertBlock& cb, double x_minus, double x_plus) {
    require_valid(cb.block);
    for (double yi : cb.y)
        if (yi < -1e-9) throw Error(ErrorCode::InvalidModel, "certificate has negative y");
    if (cb.z.size() != cb.block.grid.size())
        throw Error(ErrorCode::InvalidModel, "certificate z length mismatch");
    for (double zi : cb.z)
        if (zi < -1e-9) throw Error(ErrorCode::InvalidModel, "certificate has negative z");
    if (!(x_minus <= x_plus + 1e-12))
        throw Error(ErrorCode::InvalidModel, "certificate window is inverted");
    (void)cb.block.grid.index_of(x_minus);
    (void)cb.block.grid.index_of(x_plus);
}

} // namespace detail

/// Exact infimum over T of f(t) = height*1_[x^-,x^+](t) + z_bin(t) + p_y(t).
///
/// Step terms take their worst one-sided limits at every breakpoint: the z
/// term is the smaller of the two adjacent bins, and the indicator counts on
/// the closed window for positive heights and additionally on the open
/// neighborhood of the window for negative heights (the directions induced
/// by the Urysohn approximator choices).  On each open bin the function is a
/// quadratic plus a constant, so the infimum sits at a bin endpoint limit or
/// at the quadratic's vertex.
inline FeasReport check_sip(const CertBlock& cb, double x_minus, double x_plus) {
    detail::cert_block_wellformed(cb, x_minus, x_plus);
    const auto& grid = cb.block.grid;
    const std::size_t n = grid.size();
    const std::size_t im = grid.index_of(x_minus);
    const std::size_t ip = grid.index_of(x_plus);
    const double h = cb.height;
    const QuadDual q = cb.quad();

    FeasReport rep;
    rep.worst_value = std::numeric_limits<double>::infinity();

    auto consider = [&](double value, double at) {
        ++rep.checked_points;
        if (value < rep.worst_value) {
            rep.worst_value = value;
            rep.witness = at;
        }
    };
    auto win_point = [&](std::size_t k) { return (k >= im && k <= ip) ? h : 0.0; };
    auto win_left = [&](std::size_t k) {
        if (h < 0.0) return (k >= im && k <= ip) ? h : 0.0;
        return (k > im && k <= ip) ? h : 0.0;
    };
    auto win_right = [&](std::size_t k) {
        if (h < 0.0) return (k >= im && k <= ip) ? h : 0.0;
        return (k >= im && k < ip) ? h : 0.0;
    };

    for (std::size_t k = 0; k < n; ++k) {
        const double t = grid[k];
        const double pt = p_eval(q, t);
        consider(win_point(k) + cb.z[k] + pt, t);
        if (k > 0) consider(win_left(k) + cb.z[k - 1] + pt, t);
        if (k + 1 < n) consider(win_right(k) + cb.z[k] + pt, t);
    }
    if (auto v = p_vertex(q)) {
        for (std::size_t k = 0; k + 1 < n; ++k) {
            if (*v > grid[k] && *v < grid[k + 1]) {
                const double win = (im <= k && k + 1 <= ip) ? h : 0.0;
                consider(win + cb.z[k] + p_eval(q, *v), *v);
            }
        }
    }
    rep.feasible = rep.worst_value >= -1e-9;
    return rep;
}

inline FeasReport check_sip(const Certificate& cert) {
    FeasReport agg;
    agg.feasible = true;
    agg.worst_value = std::numeric_limits<double>::infinity();
    for (const auto& cb : cert.blocks) {
        auto r = check_sip(cb, cert.x_minus, cert.x_plus);
        agg.checked_points += r.checked_points;
        if (r.worst_value < agg.worst_value) {
            agg.worst_value = r.worst_value;
            agg.witness = r.witness;
        }
        agg.feasible = agg.feasible && r.feasible;
    }
    return agg;
}

/// Upper bound on the true adversarial value min E(height * 1_[x^-,x^+]) by
/// restricting the ambiguity set to atomic measures on the grid refined by
/// an integer factor (atoms stay aligned with the envelope bins).  Returns
/// nothing when even the atomic restriction is empty, which distinguishes
/// vacuous robustness.
inline std::optional<double> primal_oracle(double height, double x_minus, double x_plus,
                                           const AmbiguityBlock& block, int refine) {
    if (refine < 1) throw Error(ErrorCode::InvalidModel, "refine must be >= 1");
    require_valid(block);
    const auto& grid = block.grid;
    const std::size_t n = grid.size();
    const double step = grid.delta / refine;
    const std::size_t natoms = (n - 1) * std::size_t(refine) + 1;

    const std::size_t im = grid.index_of(x_minus) * std::size_t(refine);
    const std::size_t ip = grid.index_of(x_plus) * std::size_t(refine);

    milp::MilpModel lp;
    lp.obj_sense = milp::ObjSense::Minimize;
    std::vector<int> p(natoms);
    for (std::size_t j = 0; j < natoms; ++j)
        p[j] = lp.add_var("p_" + std::to_string(j), 0.0, milp::kInf);

    std::vector<std::pair<int, double>> norm;
    for (std::size_t j = 0; j < natoms; ++j) norm.emplace_back(p[j], 1.0);
    lp.add_row("norm", norm, milp::RowSense::EQ, 1.0);

    auto atom_t = [&](std::size_t j) { return grid.t0 + double(j) * step; };

    if (block.moments) {
        const auto& m = *block.moments;
        std::vector<std::pair<int, double>> mean, var;
        for (std::size_t j = 0; j < natoms; ++j) {
            const double t = atom_t(j);
            mean.emplace_back(p[j], t);
            var.emplace_back(p[j], -t * t + m.beta * t);
        }
        lp.add_row("mean_lo", mean, milp::RowSense::GE, m.mu_minus);
        lp.add_row("mean_hi", mean, milp::RowSense::LE, m.mu_plus);
        lp.add_row("var", var, milp::RowSense::GE, m.var_rhs);
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<std::pair<int, double>> bin;
        const std::size_t j0 = k * std::size_t(refine);
        const std::size_t j1 = std::min(natoms - 1, (k + 1) * std::size_t(refine) - 1);
        for (std::size_t j = j0; j <= j1; ++j) bin.emplace_back(p[j], 1.0);
        lp.add_row("bin_" + std::to_string(k), bin, milp::RowSense::LE,
                   grid.delta * block.bin_caps[k]);
    }
    for (std::size_t j = im; j <= ip; ++j) lp.objective.emplace_back(p[j], height);

    auto sol = milp::solve_lp(lp);
    if (sol.status == milp::SolveStatus::Infeasible) return std::nullopt;
    if (sol.status != milp::SolveStatus::Optimal)
        throw Error(ErrorCode::NumericalFailure, "primal oracle LP did not solve");
    return sol.objective;
}

struct SandwichReport {
    struct BlockGap {
        std::string name;
        double dual_objective;
        std::optional<double> primal_value;
        double gap; // primal - dual, NaN when the oracle is infeasible
    };
    std::vector<BlockGap> blocks;
    bool all_bounded() const {
        for (const auto& b : blocks)
            if (!b.primal_value) return false;
        return true;
    }
    double max_dual_minus_primal() const {
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& b : blocks)
            if (b.primal_value) worst = std::max(worst, b.dual_objective - *b.primal_value);
        return worst;
    }
};

/// Weak-duality sandwich: every block's dual objective must stay below the
/// atomic-restriction primal value.  A violation beyond 1e-6 signals an
/// implementation bug and throws.
inline SandwichReport sandwich_check(const Certificate& cert, int refine) {
    SandwichReport rep;
    for (const auto& cb : cert.blocks) {
        auto primal = primal_oracle(cb.height, cert.x_minus, cert.x_plus, cb.block, refine);
        SandwichReport::BlockGap g;
        g.name = cb.name;
        g.dual_objective = cb.dual_objective();
        g.primal_value = primal;
        g.gap = primal ? *primal - g.dual_objective : std::nan("");
        rep.blocks.push_back(g);
        if (primal && g.dual_objective > *primal + 1e-6)
            throw Error(ErrorCode::SandwichViolation,
                        "block " + cb.name + ": dual " + std::to_string(g.dual_objective) +
                            " exceeds primal " + std::to_string(*primal));
    }
    return rep;
}

/// Builds the certificate for a solved single- or multi-block model.
inline Certificate extract_certificate(const AssembledModel& am,
                                       const std::vector<AmbiguityBlock>& blocks,
                                       const std::vector<std::string>& names,
                                       const milp::Solution& sol, const std::string& kind) {
    Certificate cert;
    cert.kind = kind;
    cert.objective = sol.objective;
    cert.x_minus = sol.x[std::size_t(am.enc.x_minus)];
    cert.x_plus = sol.x[std::size_t(am.enc.x_plus)];
    for (std::size_t s = 0; s < blocks.size(); ++s) {
        CertBlock cb;
        cb.name = names[s];
        cb.block = blocks[s];
        const auto& h = am.heights[s];
        cb.height = h.is_fixed ? h.value : sol.x[std::size_t(h.var)];
        const auto& bv = am.block_vars[s];
        for (int i = 0; i < 5; ++i)
            cb.y[std::size_t(i)] = bv.y[std::size_t(i)] >= 0 ? sol.x[std::size_t(bv.y[std::size_t(i)])] : 0.0;
        cb.z.reserve(bv.z.size());
        for (int zj : bv.z) cb.z.push_back(sol.x[std::size_t(zj)]);
        cert.blocks.push_back(std::move(cb));
    }
    // snap the window onto exact grid values
    const auto& g0 = blocks.front().grid;
    cert.x_minus = g0[g0.index_of(cert.x_minus)];
    cert.x_plus = g0[g0.index_of(cert.x_plus)];
    return cert;
}

} // namespace dro
