#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dro/ambiguity.hpp"
#include "dro/dual_rows.hpp"
#include "dro/milp/model.hpp"

namespace dro {

/// Bounds of the decision polytope P over (height, x^-, x^+).  NaN entries
/// fall back to the grid-derived defaults.
struct PolytopeBounds {
    double xm_lo = std::nan("");
    double xm_hi = std::nan("");
    double xp_lo = std::nan("");
    double xp_hi = std::nan("");
};

struct AssembledModel {
    milp::MilpModel model;
    EncodingVars enc;
    std::vector<BlockVars> block_vars;
    std::vector<HeightSpec> heights; // per block
};

/// Allocates the shared indicator-encoding variables and appends the
/// encoding rows plus (optionally) the x^- <= x^+ polytope row.  Callers
/// whose objective makes an inverted window either dominated or infeasible
/// may skip the order row.
inline EncodingVars allocate_encoding(milp::MilpModel& model, const TimeGrid& grid,
                                      const PolytopeBounds& P = {},
                                      bool include_order_row = true) {
    const std::size_t n = grid.size();
    EncodingVars enc;
    const double xm_lo = std::isnan(P.xm_lo) ? x_minus_lower_bound(grid)
                                             : std::max(P.xm_lo, x_minus_lower_bound(grid));
    const double xm_hi = std::isnan(P.xm_hi) ? grid.t_max : P.xm_hi;
    const double xp_lo = std::isnan(P.xp_lo) ? x_minus_lower_bound(grid) : P.xp_lo;
    const double xp_hi = std::isnan(P.xp_hi) ? grid.t_max : P.xp_hi;
    enc.x_minus = model.add_var("x_minus", xm_lo, xm_hi);
    enc.x_plus = model.add_var("x_plus", xp_lo, xp_hi);
    enc.b.reserve(n);
    enc.dm.reserve(n);
    enc.dp.reserve(n);
    for (std::size_t k = 0; k < n; ++k) enc.b.push_back(model.add_binary("b_" + std::to_string(k)));
    for (std::size_t k = 0; k < n; ++k) enc.dm.push_back(model.add_binary("dm_" + std::to_string(k)));
    for (std::size_t k = 0; k < n; ++k) enc.dp.push_back(model.add_binary("dp_" + std::to_string(k)));

    emit_encoding(grid, enc).append_to(model);
    if (include_order_row)
        model.add_row("p_order", {{enc.x_minus, 1.0}, {enc.x_plus, -1.0}}, milp::RowSense::LE, 0.0);
    return enc;
}

inline BlockVars allocate_block_vars(milp::MilpModel& model, const AmbiguityBlock& block,
                                     const std::string& prefix) {
    BlockVars bv;
    const int ny = block.moments ? 5 : 2;
    for (int i = 0; i < ny; ++i)
        bv.y[i] = model.add_var(prefix + "y" + std::to_string(i + 1), 0.0, milp::kInf);
    bv.z.reserve(block.grid.size());
    for (std::size_t k = 0; k < block.grid.size(); ++k)
        bv.z.push_back(model.add_var(prefix + "z_" + std::to_string(k), 0.0, milp::kInf));
    return bv;
}

/// Allocates the height variable and its per-row product auxiliaries when the
/// height is a decision variable; fixed heights pass through unchanged.
inline HeightSpec allocate_height(milp::MilpModel& model, const TimeGrid& grid, bool fixed,
                                  double value, double lo, double hi,
                                  const std::string& prefix = "") {
    if (fixed) return HeightSpec::fixed(value);
    if (!(std::isfinite(lo) && std::isfinite(hi)) || lo > hi)
        throw Error(ErrorCode::UnboundedHeight, "variable height needs finite bounds");
    HeightSpec h;
    h.is_fixed = false;
    h.lo = lo;
    h.hi = hi;
    h.var = model.add_var(prefix + "height", lo, hi);
    const std::size_t n = grid.size();
    const double wlo = std::min(0.0, lo), whi = std::max(0.0, hi);
    for (std::size_t k = 0; k < n; ++k)
        h.w.push_back(model.add_var(prefix + "w_" + std::to_string(k), wlo, whi));
    if (h.may_be_positive()) {
        for (std::size_t k = 0; k < n; ++k)
            h.wp.push_back(model.add_var(prefix + "wp_" + std::to_string(k), wlo, whi));
        for (std::size_t k = 0; k + 1 < n; ++k)
            h.wm.push_back(model.add_var(prefix + "wm_" + std::to_string(k), wlo, whi));
    }
    return h;
}

/// Single-block safe model: the dual-objective row with right-hand side b,
/// the constraint families, the shared encoding, and a linear objective over
/// (height, x^-, x^+).
struct GenericSpec {
    AmbiguityBlock block;
    bool height_fixed = true;
    double height_value = 1.0;
    double height_lo = 0.0;
    double height_hi = 0.0;
    double rhs_b = 0.0;
    PolytopeBounds P;
    double c_height = 0.0;
    double c_xm = -1.0;
    double c_xp = 1.0;
    milp::ObjSense sense = milp::ObjSense::Maximize;
};

inline AssembledModel assemble_generic(const GenericSpec& spec) {
    require_valid(spec.block);
    AssembledModel out;
    auto& model = out.model;

    out.enc = allocate_encoding(model, spec.block.grid, spec.P);
    out.heights.push_back(allocate_height(model, spec.block.grid, spec.height_fixed,
                                          spec.height_value, spec.height_lo, spec.height_hi));
    out.block_vars.push_back(allocate_block_vars(model, spec.block, ""));

    const auto& bv = out.block_vars[0];
    const auto& h = out.heights[0];
    model.add_row("dual_obj", dual_objective_coeffs(spec.block, bv), milp::RowSense::GE, spec.rhs_b);
    emit_families(spec.block, out.enc, bv, h).append_to(model);

    model.obj_sense = spec.sense;
    if (spec.c_height != 0.0 && !h.is_fixed) model.objective.emplace_back(h.var, spec.c_height);
    if (spec.c_xm != 0.0) model.objective.emplace_back(out.enc.x_minus, spec.c_xm);
    if (spec.c_xp != 0.0) model.objective.emplace_back(out.enc.x_plus, spec.c_xp);
    return out;
}

} // namespace dro
