#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <variant>
#include <vector>

#include "dro/error.hpp"

namespace dro {

/// Density upper bound rho_bar(t) on the uncertain probability density.
///
/// Two families are supported:
///  - piecewise-normal: N(mu_minus, sigma^2) left tail, flat peak
///    1/(sigma*sqrt(2*pi)) on [mu_minus, mu_plus], N(mu_plus, sigma^2)
///    right tail.  Nondecreasing, then constant, then nonincreasing.
///  - tabulated: nonnegative samples, linearly interpolated, constant
///    beyond the first/last sample.
class EnvelopeFn {
public:
    struct PiecewiseNormal {
        double mu_minus;
        double mu_plus;
        double sigma;
    };
    struct Tabulated {
        std::vector<std::pair<double, double>> samples; // (t, value), t strictly increasing
    };

    static EnvelopeFn piecewise_normal(double mu_minus, double mu_plus, double sigma) {
        if (!(sigma > 0.0))
            throw Error(ErrorCode::InvalidMoments, "envelope sigma must be positive");
        if (!(mu_minus <= mu_plus))
            throw Error(ErrorCode::InvalidMoments, "envelope requires mu_minus <= mu_plus");
        return EnvelopeFn(PiecewiseNormal{mu_minus, mu_plus, sigma});
    }

    static EnvelopeFn tabulated(std::vector<std::pair<double, double>> samples) {
        if (samples.size() < 2)
            throw Error(ErrorCode::InvalidModel, "tabulated envelope needs at least 2 samples");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (samples[i].second < 0.0)
                throw Error(ErrorCode::InvalidModel, "tabulated envelope must be nonnegative");
            if (i > 0 && !(samples[i].first > samples[i - 1].first))
                throw Error(ErrorCode::InvalidModel, "tabulated abscissae must be strictly increasing");
        }
        return EnvelopeFn(Tabulated{std::move(samples)});
    }

    double value(double t) const {
        if (const auto* pn = std::get_if<PiecewiseNormal>(&shape_)) {
            if (t <= pn->mu_minus) return normal_pdf(t, pn->mu_minus, pn->sigma);
            if (t >= pn->mu_plus) return normal_pdf(t, pn->mu_plus, pn->sigma);
            return peak(*pn);
        }
        const auto& tab = std::get<Tabulated>(shape_).samples;
        if (t <= tab.front().first) return tab.front().second;
        if (t >= tab.back().first) return tab.back().second;
        auto it = std::upper_bound(tab.begin(), tab.end(), t,
                                   [](double v, const std::pair<double, double>& s) { return v < s.first; });
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double w = (t - lo.first) / (hi.first - lo.first);
        return lo.second + w * (hi.second - lo.second);
    }

    bool is_piecewise_normal() const { return std::holds_alternative<PiecewiseNormal>(shape_); }
    const PiecewiseNormal& piecewise() const { return std::get<PiecewiseNormal>(shape_); }
    const Tabulated& table() const { return std::get<Tabulated>(shape_); }

    /// Per-segment Lipschitz bound, used by the bin-cap convergence property.
    double lipschitz_bound() const {
        if (const auto* pn = std::get_if<PiecewiseNormal>(&shape_)) {
            // max |d/dt pdf| = pdf'(mu ± sigma) = 1/(sigma^2 sqrt(2 pi e))
            return 1.0 / (pn->sigma * pn->sigma * std::sqrt(2.0 * M_PI * std::exp(1.0)));
        }
        const auto& tab = std::get<Tabulated>(shape_).samples;
        double L = 0.0;
        for (std::size_t i = 1; i < tab.size(); ++i)
            L = std::max(L, std::abs(tab[i].second - tab[i - 1].second) /
                                (tab[i].first - tab[i - 1].first));
        return L;
    }

private:
    explicit EnvelopeFn(std::variant<PiecewiseNormal, Tabulated> s) : shape_(std::move(s)) {}

    static double normal_pdf(double t, double mu, double sigma) {
        const double u = (t - mu) / sigma;
        return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * M_PI));
    }
    static double peak(const PiecewiseNormal& pn) { return 1.0 / (pn.sigma * std::sqrt(2.0 * M_PI)); }

    std::variant<PiecewiseNormal, Tabulated> shape_;
};

/// max of rho_bar over the bin [tau, tau+delta].  Past t_cap the envelope is
/// extended constantly by rho_bar(t_cap), so the evaluation interval is
/// clamped to [tau, min(tau+delta, t_cap)].
///
/// Exact for the piecewise-normal family (monotone segments); tabulated
/// envelopes are sampled at 32 equispaced points plus every segment
/// breakpoint inside the bin (exact as well, since the max of a piecewise
/// linear function sits on a breakpoint or an interval endpoint).
inline double bin_cap(const EnvelopeFn& env, double tau, double delta,
                      double t_cap = std::numeric_limits<double>::infinity()) {
    const double lo = std::min(tau, t_cap);
    const double hi = std::min(tau + delta, t_cap);

    if (env.is_piecewise_normal()) {
        const auto& pn = env.piecewise();
        if (hi >= pn.mu_minus && lo <= pn.mu_plus)
            return env.value(0.5 * (pn.mu_minus + pn.mu_plus)); // plateau
        if (hi < pn.mu_minus) return env.value(hi);  // increasing segment
        return env.value(lo);                        // decreasing segment
    }

    double best = std::max(env.value(lo), env.value(hi));
    constexpr int kSamples = 32;
    for (int i = 1; i < kSamples; ++i) {
        const double t = lo + (hi - lo) * static_cast<double>(i) / kSamples;
        best = std::max(best, env.value(t));
    }
    for (const auto& [t, v] : env.table().samples) {
        if (t > lo && t < hi) best = std::max(best, v);
    }
    return best;
}

} // namespace dro
