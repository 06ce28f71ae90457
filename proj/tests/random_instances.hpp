#pragma once

// Randomized single-block instances with a constructively nonempty ambiguity
// set: a witness atomic measure is sampled first and the moment bounds and
// bin caps are widened to contain it.

#include <optional>
#include <random>
#include <vector>

#include "dro/ambiguity.hpp"
#include "dro/model_build.hpp"

namespace testgen {

struct Instance {
    dro::GenericSpec spec;
    double delta;
};

inline Instance random_instance(std::mt19937& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_int_distribution<int> npts(5, 40);

    const int n = npts(rng);
    const double delta = 0.01 + 0.29 * u01(rng);
    const double t0 = -1.0 + 3.0 * u01(rng);
    const double t_max = t0 + delta * (n - 1);
    auto grid = dro::build_grid(t0, t_max, delta);
    const double span = t_max - t0;

    dro::EnvelopeFn env = [&] {
        if (u01(rng) < 0.5) {
            const double a = t0 + span * u01(rng);
            const double b = a + (t_max - a) * u01(rng);
            const double sigma = delta * (0.5 + 3.0 * u01(rng));
            return dro::EnvelopeFn::piecewise_normal(a, b, sigma);
        }
        std::vector<std::pair<double, double>> pts;
        const int k = 3 + int(u01(rng) * 4);
        for (int i = 0; i <= k; ++i)
            pts.emplace_back(t0 + span * i / k, u01(rng) * 3.0 / span);
        return dro::EnvelopeFn::tabulated(std::move(pts));
    }();

    // witness atomic measure on grid points
    const int natoms = 1 + int(u01(rng) * 3.9);
    std::vector<std::pair<std::size_t, double>> witness;
    double wsum = 0.0;
    for (int a = 0; a < natoms; ++a) {
        const auto idx = std::size_t(u01(rng) * n) % std::size_t(n);
        const double w = 0.1 + u01(rng);
        witness.emplace_back(idx, w);
        wsum += w;
    }
    for (auto& [idx, w] : witness) w /= wsum;

    auto block = dro::make_block(grid, env, std::nullopt);
    std::vector<double> bin_mass(std::size_t(n), 0.0);
    double mean = 0.0;
    for (auto& [idx, w] : witness) {
        bin_mass[idx] += w;
        mean += w * grid[idx];
    }
    for (std::size_t k = 0; k < std::size_t(n); ++k)
        block.bin_caps[k] = std::max(block.bin_caps[k], bin_mass[k] / delta * 1.05);

    if (u01(rng) < 0.7) {
        dro::MomentSpec m;
        const double slack = 0.01 + span * 0.3 * u01(rng);
        m.mu_minus = mean - slack;
        m.mu_plus = mean + slack;
        m.beta = 2.0 * m.mu_minus + (2.0 * m.mu_plus - 2.0 * m.mu_minus) * u01(rng);
        double second = 0.0;
        for (auto& [idx, w] : witness) second += w * (-grid[idx] * grid[idx] + m.beta * grid[idx]);
        m.var_rhs = second - 0.01 - u01(rng);
        block.moments = m;
    }

    Instance inst;
    inst.delta = delta;
    inst.spec.block = std::move(block);

    const double mag = 0.05 + 0.95 * u01(rng);
    const double roll = u01(rng);
    if (roll < 0.45) {
        inst.spec.height_fixed = true;
        inst.spec.height_value = mag;
        inst.spec.rhs_b = (u01(rng) < 0.5) ? -0.1 * u01(rng) : mag * 0.9 * u01(rng);
    } else if (roll < 0.9) {
        inst.spec.height_fixed = true;
        inst.spec.height_value = -mag;
        inst.spec.rhs_b = -mag * (u01(rng) < 0.5 ? 1.5 : 0.4 + 0.5 * u01(rng));
    } else {
        inst.spec.height_fixed = false;
        inst.spec.height_lo = -mag * u01(rng);
        inst.spec.height_hi = mag;
        inst.spec.rhs_b = -0.1 * u01(rng);
    }
    if (u01(rng) < 0.8) {
        inst.spec.c_xm = -1.0;
        inst.spec.c_xp = 1.0;
        inst.spec.sense = dro::milp::ObjSense::Maximize;
    } else {
        inst.spec.c_xm = 0.0;
        inst.spec.c_xp = 1.0;
        inst.spec.sense = dro::milp::ObjSense::Minimize;
    }
    return inst;
}

} // namespace testgen
