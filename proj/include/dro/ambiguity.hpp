#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dro/envelope.hpp"
#include "dro/error.hpp"
#include "dro/grid.hpp"

namespace dro {

/// First/second-moment description of one ambiguity block.
///
/// beta is the coefficient of the linear term in the quadratic dual monomial
/// t^2 - beta*t: 2*mu in the generic setting, mu_minus + mu_plus in the
/// McCormick setting.  var_rhs is the right-hand side of the second-moment
/// row (e.g. -eps_sigma*sigma^2 + mu^2 generically).
struct MomentSpec {
    double mu_minus = 0.0;
    double mu_plus = 0.0;
    double beta = 0.0;
    double var_rhs = 0.0;
};

/// One species' ambiguity description: grid, optional moment bounds, and the
/// per-bin envelope caps rho_bar_plus(tau).  Immutable after construction;
/// safe to share across concurrent solver workers.
struct AmbiguityBlock {
    TimeGrid grid;
    std::optional<MomentSpec> moments;
    std::vector<double> bin_caps; // aligned with grid.points

    double cap_mass() const {
        double s = 0.0;
        for (double c : bin_caps) s += c;
        return grid.delta * s;
    }
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    void fail(std::string msg) {
        ok = false;
        errors.push_back(std::move(msg));
    }
};

/// Checks block invariants plus nonemptiness necessary conditions.  A total
/// cap mass below 1 means no probability measure fits under the envelope.
inline ValidationReport validate_block(const AmbiguityBlock& block) {
    ValidationReport rep;
    if (block.grid.points.size() < 2) rep.fail("InvalidModel: grid needs at least 2 points");
    if (block.bin_caps.size() != block.grid.points.size())
        rep.fail("InvalidModel: bin_caps must cover every grid point");
    for (std::size_t k = 0; k < block.bin_caps.size(); ++k) {
        if (!(block.bin_caps[k] >= 0.0)) {
            rep.fail("InvalidModel: negative bin cap at index " + std::to_string(k));
            break;
        }
    }
    if (block.moments) {
        const auto& m = *block.moments;
        if (!(m.mu_minus <= m.mu_plus)) rep.fail("InvalidMoments: mu_minus > mu_plus");
        if (m.beta < 2.0 * m.mu_minus - 1e-12 || m.beta > 2.0 * m.mu_plus + 1e-12)
            rep.fail("InvalidMoments: beta outside [2*mu_minus, 2*mu_plus]");
        // var_rhs larger than max_t(-t^2 + beta*t) makes the second-moment row
        // unsatisfiable by any probability measure on T; flagged, not fatal.
        double vmax = -std::numeric_limits<double>::infinity();
        for (double t : block.grid.points) vmax = std::max(vmax, -t * t + m.beta * t);
        if (m.var_rhs > vmax + 1e-12)
            rep.warnings.push_back("second-moment rhs exceeds max of -t^2+beta*t on the grid");
    }
    if (rep.ok && block.cap_mass() < 1.0 - 1e-12)
        rep.fail("EmptyAmbiguity: total cap mass " + std::to_string(block.cap_mass()) +
                 " cannot carry a probability measure");
    return rep;
}

inline void require_valid(const AmbiguityBlock& block) {
    auto rep = validate_block(block);
    if (rep.ok) return;
    const std::string& msg = rep.errors.front();
    ErrorCode code = ErrorCode::InvalidModel;
    if (msg.rfind("EmptyAmbiguity", 0) == 0) code = ErrorCode::EmptyAmbiguity;
    if (msg.rfind("InvalidMoments", 0) == 0) code = ErrorCode::InvalidMoments;
    throw Error(code, msg);
}

/// Assembles a block: caps are bin maxima of the envelope, with the last bin
/// overhanging T and the envelope extended constantly by rho_bar(t_max).
inline AmbiguityBlock make_block(TimeGrid grid, const EnvelopeFn& env,
                                 std::optional<MomentSpec> moments) {
    AmbiguityBlock block;
    block.grid = std::move(grid);
    block.moments = std::move(moments);
    block.bin_caps.reserve(block.grid.size());
    for (double tau : block.grid.points)
        block.bin_caps.push_back(bin_cap(env, tau, block.grid.delta, block.grid.t_max));
    return block;
}

} // namespace dro
