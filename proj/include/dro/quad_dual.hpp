#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "dro/error.hpp"

namespace dro {

/// The quadratic dual monomial p_y(t) = -y1 + y2 + (y3 - y4) t + y5 (t^2 - beta t)
/// built from the five nonnegative dual multipliers of the normalization and
/// moment rows.
struct QuadDual {
    std::array<double, 5> y{};
    double beta = 0.0;
};

inline double p_eval(const QuadDual& q, double t) {
    return -q.y[0] + q.y[1] + (q.y[2] - q.y[3]) * t + q.y[4] * (t * t - q.beta * t);
}

/// Interior minimizer of p_y, or nothing when the quadratic degenerates to an
/// affine function (endpoint checks cover that case).
inline std::optional<double> p_vertex(const QuadDual& q) {
    if (q.y[4] <= 1e-12) return std::nullopt;
    return (q.beta * q.y[4] + q.y[3] - q.y[2]) / (2.0 * q.y[4]);
}

/// Exact drop p_y(p_min - delta) - p_y(p_min) = y5 * delta^2.
inline double vertex_drop(const QuadDual& q, double delta) {
    if (q.y[4] <= 0.0)
        throw Error(ErrorCode::DegenerateQuadratic, "vertex_drop requires y5 > 0");
    return q.y[4] * delta * delta;
}

} // namespace dro
