#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dro/error.hpp"

namespace dro {

/// Uniform discretization of a compact interval [t0, t_max] with step delta.
/// Grid points are t0 + k*delta for k = 0..n-1; the last point equals t_max
/// up to a 1e-9 relative tolerance on the span/step divisibility.
struct TimeGrid {
    double t0 = 0.0;
    double t_max = 0.0;
    double delta = 0.0;
    std::vector<double> points;

    std::size_t size() const { return points.size(); }
    double operator[](std::size_t k) const { return points[k]; }
    double front() const { return points.front(); }
    double back() const { return points.back(); }

    /// Index of the grid point nearest to t; error if t is off-grid beyond tol.
    std::size_t index_of(double t, double tol = 1e-6) const {
        double k = (t - t0) / delta;
        auto idx = static_cast<long long>(std::llround(k));
        if (idx < 0 || idx >= static_cast<long long>(points.size()) ||
            std::abs(k - static_cast<double>(idx)) > tol) {
            throw Error(ErrorCode::InvalidModel, "time " + std::to_string(t) + " is not a grid point");
        }
        return static_cast<std::size_t>(idx);
    }

    bool contains(double t, double tol = 1e-6) const {
        double k = (t - t0) / delta;
        auto idx = static_cast<long long>(std::llround(k));
        return idx >= 0 && idx < static_cast<long long>(points.size()) &&
               std::abs(k - static_cast<double>(idx)) <= tol;
    }
};

inline TimeGrid build_grid(double t0, double t_max, double delta) {
    if (!(delta > 0.0))
        throw Error(ErrorCode::NonPositiveStep, "step must be positive, got " + std::to_string(delta));
    if (!(t_max > t0))
        throw Error(ErrorCode::NonPositiveStep, "t_max must exceed t0");

    const double ratio = (t_max - t0) / delta;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, std::abs(ratio)))
        throw Error(ErrorCode::NonDivisibleSpan,
                    "span " + std::to_string(t_max - t0) + " is not an integer multiple of " +
                        std::to_string(delta));

    TimeGrid g;
    g.t0 = t0;
    g.t_max = t_max;
    g.delta = delta;
    const auto n = static_cast<std::size_t>(rounded) + 1;
    g.points.resize(n);
    for (std::size_t k = 0; k + 1 < n; ++k)
        g.points[k] = t0 + static_cast<double>(k) * delta;
    g.points[n - 1] = t_max;
    return g;
}

} // namespace dro
