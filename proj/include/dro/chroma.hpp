#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dro/ambiguity.hpp"
#include "dro/milp/branch_bound.hpp"
#include "dro/model_build.hpp"
#include "dro/verify.hpp"

namespace dro {

/// One polymerization degree: nominal retention time, retention-time bounds,
/// peak width, and its share of the injected mixture.
struct SpeciesSpec {
    int s = 0;
    double mu = 0.0;
    double mu_minus = 0.0;
    double mu_plus = 0.0;
    double sigma = 0.0; // <= 0: derive from NTP
    double q0 = 0.0;
    bool desired = false;
};

struct GridParams {
    double t0 = 2.80;
    double t_max = 3.749;
    double delta = 0.001;
};

struct ChromaConfig {
    std::vector<SpeciesSpec> species;
    double required_purity = 0.95;
    double eps_sigma = 0.01;
    double ntp = 120000.0;
    GridParams grid;
    bool moment_control = true;
};

/// Peak width from the number of theoretical plates: sigma = mu / sqrt(NTP).
inline double sigma_from_ntp(double mu, double ntp) {
    if (!(mu > 0.0) || !(ntp > 0.0))
        throw Error(ErrorCode::InvalidModel, "sigma_from_ntp needs positive mu and NTP");
    return mu / std::sqrt(ntp);
}

inline double resolved_sigma(const SpeciesSpec& sp, double ntp) {
    return sp.sigma > 0.0 ? sp.sigma : sigma_from_ntp(sp.mu, ntp);
}

/// McCormick second-moment row: beta = mu_- + mu_+ and
/// var_rhs = -eps_sigma*sigma^2 + mu_+*mu_-.  With mu_- = mu_+ = mu this
/// collapses to the generic row (beta = 2 mu, var_rhs = -eps*sigma^2 + mu^2).
inline MomentSpec mccormick_variance_row(const SpeciesSpec& sp, double eps_sigma, double ntp) {
    if (!(sp.mu_minus <= sp.mu && sp.mu <= sp.mu_plus))
        throw Error(ErrorCode::InvalidMoments,
                    "species " + std::to_string(sp.s) + ": need mu_minus <= mu <= mu_plus");
    const double sigma = resolved_sigma(sp, ntp);
    MomentSpec m;
    m.mu_minus = sp.mu_minus;
    m.mu_plus = sp.mu_plus;
    m.beta = sp.mu_minus + sp.mu_plus;
    m.var_rhs = -eps_sigma * sigma * sigma + sp.mu_plus * sp.mu_minus;
    return m;
}

/// Envelope of the uncertain retention-time density: normal left tail at
/// mu_-, flat peak 1/(sigma sqrt(2 pi)) between the mean bounds, normal
/// right tail at mu_+.
inline EnvelopeFn build_envelope(const SpeciesSpec& sp, double ntp) {
    return EnvelopeFn::piecewise_normal(sp.mu_minus, sp.mu_plus, resolved_sigma(sp, ntp));
}

inline void validate_chroma(const ChromaConfig& cfg) {
    if (cfg.species.empty()) throw Error(ErrorCode::InvalidModel, "no species given");
    if (!(cfg.required_purity > 0.0 && cfg.required_purity < 1.0))
        throw Error(ErrorCode::InvalidModel, "required purity must lie in (0,1)");
    bool any_desired = false;
    double qsum = 0.0;
    for (const auto& sp : cfg.species) {
        if (sp.q0 < 0.0) throw Error(ErrorCode::InvalidModel, "q0 must be nonnegative");
        if (!(sp.mu_minus <= sp.mu && sp.mu <= sp.mu_plus))
            throw Error(ErrorCode::InvalidMoments,
                        "species " + std::to_string(sp.s) + ": need mu_minus <= mu <= mu_plus");
        if (resolved_sigma(sp, cfg.ntp) <= 0.0)
            throw Error(ErrorCode::InvalidModel, "peak width must be positive");
        any_desired = any_desired || sp.desired;
        qsum += sp.q0;
    }
    if (!any_desired) throw Error(ErrorCode::InvalidModel, "at least one species must be desired");
    if (!(qsum > 0.0)) throw Error(ErrorCode::InvalidModel, "q0 must carry positive total mass");
}

struct ChromaModel {
    AssembledModel am;
    std::vector<AmbiguityBlock> blocks;
    std::vector<std::string> names;
    std::vector<double> heights;
    TimeGrid grid;
    milp::MilpModel& model() { return am.model; }
    const milp::MilpModel& model() const { return am.model; }
};

/// Assembles the multi-species fractionation MIP: one shared indicator
/// encoding, a dual block per species with fixed height
/// (1_desired - R) * q0(s), and a single aggregated purity row
/// sum_s d_s(y_s, z_s) >= 0.  Desired species carry base plus strengthened
/// families, undesired species base families only.  The window-order
/// constraint is not materialized as a row; an empty window makes the purity
/// row unsatisfiable, so infeasibility is reported by the solver instead.
inline ChromaModel build_chroma_mip(const ChromaConfig& cfg) {
    validate_chroma(cfg);

    ChromaModel cm;
    cm.grid = build_grid(cfg.grid.t0, cfg.grid.t_max, cfg.grid.delta);

    double qsum = 0.0;
    for (const auto& sp : cfg.species) qsum += sp.q0;

    auto& model = cm.am.model;
    cm.am.enc = allocate_encoding(model, cm.grid, {}, /*include_order_row=*/false);

    std::vector<std::pair<int, double>> purity;
    for (const auto& sp : cfg.species) {
        const std::string prefix = "s" + std::to_string(sp.s) + "_";
        std::optional<MomentSpec> moments;
        if (cfg.moment_control) moments = mccormick_variance_row(sp, cfg.eps_sigma, cfg.ntp);
        auto block = make_block(cm.grid, build_envelope(sp, cfg.ntp), moments);
        auto bv = allocate_block_vars(model, block, prefix);
        const double height = ((sp.desired ? 1.0 : 0.0) - cfg.required_purity) * (sp.q0 / qsum);
        emit_families(block, cm.am.enc, bv, HeightSpec::fixed(height), prefix).append_to(model);
        for (auto& term : dual_objective_coeffs(block, bv)) purity.push_back(term);

        cm.blocks.push_back(std::move(block));
        cm.names.push_back("s" + std::to_string(sp.s));
        cm.heights.push_back(height);
        cm.am.block_vars.push_back(bv);
        cm.am.heights.push_back(HeightSpec::fixed(height));
    }
    model.add_row("purity", std::move(purity), milp::RowSense::GE, 0.0);

    model.obj_sense = milp::ObjSense::Maximize;
    model.objective = {{cm.am.enc.x_plus, 1.0}, {cm.am.enc.x_minus, -1.0}};
    return cm;
}

struct FractionationPlan {
    double x_minus = 0.0;
    double x_plus = 0.0;
    double objective = 0.0;
    std::map<int, double> per_species_dual;
    milp::Solution solution;
    Certificate certificate;
};

/// Builds, solves, extracts the plan, and re-verifies every species block on
/// the exact continuum before reporting Optimal.
inline FractionationPlan solve_fractionation(const ChromaConfig& cfg,
                                             milp::SolverOptions opts = {}) {
    auto cm = build_chroma_mip(cfg);
    if (opts.objective_granularity == 0.0) opts.objective_granularity = cfg.grid.delta;
    auto sol = milp::solve_milp(cm.model(), opts);

    FractionationPlan plan;
    plan.solution = sol;
    if (sol.status != milp::SolveStatus::Optimal) return plan;

    plan.certificate = extract_certificate(cm.am, cm.blocks, cm.names, sol, "chroma");
    plan.x_minus = plan.certificate.x_minus;
    plan.x_plus = plan.certificate.x_plus;
    plan.objective = sol.objective;
    if (plan.x_plus < plan.x_minus) {
        // empty-window sentinel: no robust fractionation at this purity
        plan.solution.status = milp::SolveStatus::Infeasible;
        return plan;
    }

    double dual_sum = 0.0;
    for (std::size_t i = 0; i < plan.certificate.blocks.size(); ++i) {
        const auto& cb = plan.certificate.blocks[i];
        auto rep = check_sip(cb, plan.x_minus, plan.x_plus);
        if (!rep.feasible)
            throw Error(ErrorCode::VerificationFailed,
                        "block " + cb.name + " violates the continuum constraint by " +
                            std::to_string(-rep.worst_value) + " at t=" +
                            std::to_string(rep.witness));
        const double d = cb.dual_objective();
        plan.per_species_dual[cfg.species[i].s] = d;
        dual_sum += d;
    }
    if (dual_sum < -1e-9)
        throw Error(ErrorCode::VerificationFailed, "aggregated purity row violated");
    return plan;
}

/// Purity certificate against the discretized adversary: runs the atomic
/// primal oracle per species with the species' own signed height and sums
/// the optima.  Nonnegative (within tolerance) whenever the plan is safe.
inline std::optional<double> purity_oracle(const Certificate& cert, int refine = 2) {
    double total = 0.0;
    for (const auto& cb : cert.blocks) {
        auto v = primal_oracle(cb.height, cert.x_minus, cert.x_plus, cb.block, refine);
        if (!v) return std::nullopt;
        total += *v;
    }
    return total;
}

/// Chromatogram data behind the fractionation plots: per grid point the
/// envelope and the nominal density of every species plus the window flag.
inline std::string chromatogram_csv(const ChromaConfig& cfg, const FractionationPlan& plan) {
    auto grid = build_grid(cfg.grid.t0, cfg.grid.t_max, cfg.grid.delta);
    std::ostringstream out;
    out << "t";
    for (const auto& sp : cfg.species) out << ",rho_bar_" << sp.s;
    for (const auto& sp : cfg.species) out << ",nominal_" << sp.s;
    out << ",window\n";
    std::vector<EnvelopeFn> envs;
    for (const auto& sp : cfg.species) envs.push_back(build_envelope(sp, cfg.ntp));
    char buf[64];
    for (double t : grid.points) {
        out << t;
        for (const auto& env : envs) {
            std::snprintf(buf, sizeof buf, ",%.8g", env.value(t));
            out << buf;
        }
        for (const auto& sp : cfg.species) {
            const double sg = resolved_sigma(sp, cfg.ntp);
            const double u = (t - sp.mu) / sg;
            std::snprintf(buf, sizeof buf, ",%.8g", std::exp(-0.5 * u * u) / (sg * std::sqrt(2.0 * M_PI)));
            out << buf;
        }
        const bool in_window = t >= plan.x_minus - 1e-12 && t <= plan.x_plus + 1e-12;
        out << ',' << (in_window ? 1 : 0) << '\n';
    }
    return out.str();
}

inline void emit_chromatogram_csv(const ChromaConfig& cfg, const FractionationPlan& plan,
                                  const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
    f << chromatogram_csv(cfg, plan);
    if (!f.good()) throw Error(ErrorCode::IoError, "write failed for " + path);
}

} // namespace dro
