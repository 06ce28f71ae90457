#pragma once

#include <optional>
#include <vector>

#include "dro/ambiguity.hpp"
#include "dro/milp/branch_bound.hpp"
#include "dro/model_build.hpp"
#include "dro/verify.hpp"

namespace dro {

/// Robust value-at-risk input: confidence level and the ambiguity block of
/// the loss variable on its compact domain.
struct VarConfig {
    double alpha = 0.5;
    AmbiguityBlock block;
};

struct VarResult {
    double var_bound = 0.0; // lower bound on the robust VaR
    Certificate certificate;
    milp::Solution solution;
};

/// Prepends a phantom grid point with bin cap zero, so the window can start
/// at the original t0 while the up-jump index stays inside the grid.
inline AmbiguityBlock with_phantom_start(const AmbiguityBlock& block) {
    AmbiguityBlock ext;
    ext.grid = build_grid(block.grid.t0 - block.grid.delta, block.grid.t_max, block.grid.delta);
    ext.moments = block.moments;
    ext.bin_caps.reserve(block.bin_caps.size() + 1);
    ext.bin_caps.push_back(0.0);
    ext.bin_caps.insert(ext.bin_caps.end(), block.bin_caps.begin(), block.bin_caps.end());
    return ext;
}

/// Safe lower bound on VaR_{alpha,U}: height fixed to one, x^- pinned to the
/// start of the domain through the phantom bin, dual-objective right-hand
/// side alpha, objective minimize x^+.
inline VarResult solve_var(const VarConfig& cfg, milp::SolverOptions opts = {}) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw Error(ErrorCode::InvalidModel, "alpha must lie in (0,1)");
    require_valid(cfg.block);

    GenericSpec spec;
    spec.block = with_phantom_start(cfg.block);
    spec.height_fixed = true;
    spec.height_value = 1.0;
    spec.rhs_b = cfg.alpha;
    spec.P.xm_lo = cfg.block.grid.t0;
    spec.P.xm_hi = cfg.block.grid.t0; // pinned
    spec.c_xm = 0.0;
    spec.c_xp = 1.0;
    spec.sense = milp::ObjSense::Minimize;

    auto am = assemble_generic(spec);
    if (opts.objective_granularity == 0.0) opts.objective_granularity = cfg.block.grid.delta;
    auto sol = milp::solve_milp(am.model, opts);

    VarResult out;
    out.solution = sol;
    if (sol.status != milp::SolveStatus::Optimal) return out;

    out.certificate = extract_certificate(am, {spec.block}, {"loss"}, sol, "var");
    out.var_bound = out.certificate.x_plus;
    auto rep = check_sip(out.certificate);
    if (!rep.feasible)
        throw Error(ErrorCode::VerificationFailed,
                    "VaR certificate violates the continuum constraint by " +
                        std::to_string(-rep.worst_value));
    return out;
}

} // namespace dro
