#pragma once

#include "lqmle/errors.hpp"
#include "lqmle/model_spec.hpp"
#include "lqmle/recursion.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lqmle {

enum class ContrastKind { LaplacianQL, GaussianQL };

inline std::string_view to_string(ContrastKind k) noexcept {
    return k == ContrastKind::LaplacianQL ? "lql" : "gql";
}

inline ContrastKind parse_contrast_kind(std::string_view name) {
    if (name == "lql" || name == "laplacian") return ContrastKind::LaplacianQL;
    if (name == "gql" || name == "gaussian") return ContrastKind::GaussianQL;
    throw InputError("unknown contrast '" + std::string(name) + "' (expected lql or gql)");
}

/// Quasi-likelihood contrast.
///
/// Laplacian: -sum [log M^_t + |X_t - f^_t| / M^_t].
/// Gaussian:  -(1/2) sum [log M'^2 + ((X_t - f^_t) / M')^2] with M' = scale_ratio * M^.
/// The Gaussian contrast needs a unit-variance innovation, so for data whose
/// innovations are normalised by E|zeta| = 1 the ratio is sigma_zeta / E|zeta|.
struct Contrast {
    ContrastKind kind = ContrastKind::LaplacianQL;
    double scale_ratio = 1.0;
    bool include_constant = false; // adds -(1/2) log(2 pi) per Gaussian term

    static Contrast laplacian() { return {ContrastKind::LaplacianQL, 1.0, false}; }
    static Contrast gaussian(double scale_ratio = 1.0) { return {ContrastKind::GaussianQL, scale_ratio, false}; }
};

inline void require_finite_data(std::span<const double> data) {
    for (std::size_t t = 0; t < data.size(); ++t)
        if (!std::isfinite(data[t])) throw InputError("data contains a non-finite value at t = " + std::to_string(t + 1));
}

namespace detail {

// Contrast without input validation; the optimiser calls this in its inner loop.
inline double quasi_loglik_unchecked(const Contrast& c, const ModelSpec& spec, std::span<const double> theta,
                                     std::span<const double> data) {
    Recursion rec(spec, theta, data.size());
    double sum = 0.0;
    if (c.kind == ContrastKind::LaplacianQL) {
        for (double x : data) {
            const Conditional& cond = rec.current();
            sum += cond.log_scale + std::abs(x - cond.location) / cond.scale;
            rec.push(x);
        }
        return -sum;
    }
    const double log_ratio = std::log(c.scale_ratio);
    for (double x : data) {
        const Conditional& cond = rec.current();
        const double u = (x - cond.location) / (c.scale_ratio * cond.scale);
        sum += 2.0 * (cond.log_scale + log_ratio) + u * u;
        rec.push(x);
    }
    double value = -0.5 * sum;
    if (c.include_constant) value -= 0.5 * std::log(2.0 * std::numbers::pi) * static_cast<double>(data.size());
    return value;
}

} // namespace detail

inline double quasi_loglik(const Contrast& c, const ModelSpec& spec, std::span<const double> theta,
                           std::span<const double> data) {
    if (data.empty()) throw InputError("quasi_loglik: empty data");
    require_finite_data(data);
    require_in_box(spec, theta);
    if (!(c.scale_ratio > 0.0)) throw InputError("quasi_loglik: scale ratio must be positive");
    const double value = detail::quasi_loglik_unchecked(c, spec, theta, data);
    if (!std::isfinite(value)) throw NumericError(spec.tag() + ": contrast is not finite");
    return value;
}

/// Standardised residuals zeta^_t = (X_t - f^_t) / M^_t.
inline std::vector<double> residuals(const ModelSpec& spec, std::span<const double> theta,
                                     std::span<const double> data) {
    require_finite_data(data);
    const ConditionalSeries s = conditional_series(spec, theta, data);
    std::vector<double> out(data.size());
    for (std::size_t t = 0; t < data.size(); ++t) out[t] = (data[t] - s.location[t]) / s.scale[t];
    return out;
}

} // namespace lqmle
