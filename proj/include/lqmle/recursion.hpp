#pragma once

// Truncated conditional location/scale (f^_t, M^_t) of an affine causal model.
//
// The unobserved past is replaced by zeros: X_s = e_s = 0 for s <= 0, and the
// volatility state sigma^delta_s for s <= 0 is the value it takes on that
// all-zero past, b0 = omega / (1 - sum beta). The ARMA location is obtained from
// the residual recursion e_t = X_t - f_t, which is exactly the zero-padded
// AR(inf) expansion.

#include "lqmle/errors.hpp"
#include "lqmle/model_spec.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lqmle {

struct Conditional {
    double location = 0.0;  // f^_t
    double scale = 1.0;     // M^_t
    double log_scale = 0.0; // log M^_t
};

/// Incremental evaluator: `current()` is the conditional pair for the next
/// observation; `push(x)` appends that observation and advances.
class Recursion {
public:
    Recursion(const ModelSpec& spec, std::span<const double> theta, std::size_t capacity = 0)
        : kind_(spec.volatility()), truncation_(static_cast<std::size_t>(spec.truncation)) {
        const ParamLayout l = spec.layout();
        if (theta.size() != l.dim)
            throw InputError(spec.tag() + ": parameter vector has dimension " + std::to_string(theta.size()) +
                             ", expected " + std::to_string(l.dim));
        ar_.assign(theta.begin() + l.ar, theta.begin() + l.ar + l.n_ar);
        ma_.assign(theta.begin() + l.ma, theta.begin() + l.ma + l.n_ma);

        switch (kind_) {
        case VolatilityKind::Constant:
            const_scale_ = l.n_scale ? theta[l.scale] : spec.fixed_scale;
            if (!(const_scale_ > 0.0)) throw NumericError(spec.tag() + ": scale must be positive");
            const_log_scale_ = std::log(const_scale_);
            break;
        case VolatilityKind::Garch:
        case VolatilityKind::Aparch: {
            delta_ = l.n_delta ? theta[l.delta] : 2.0;
            omega_ = theta[l.omega];
            beta_.assign(theta.begin() + l.beta, theta.begin() + l.beta + l.n_beta);
            double beta_sum = 0.0;
            for (double b : beta_) beta_sum += b;
            if (!(beta_sum < 1.0))
                throw StationarityError(spec.tag() + ": sum of beta must be < 1 for a finite volatility recursion");
            b0_ = omega_ / (1.0 - beta_sum);
            for (std::size_t i = 0; i < l.n_alpha; ++i) {
                const double a = theta[l.alpha + i];
                const double g = l.n_gamma ? theta[l.gamma + i] : 0.0;
                coef_pos_.push_back(a * std::pow(1.0 - g, delta_));
                coef_neg_.push_back(a * std::pow(1.0 + g, delta_));
            }
            square_ = (delta_ == 2.0);
            break;
        }
        case VolatilityKind::ArchInf: {
            omega_ = theta[l.omega];
            const double scale = theta[l.arch];
            const double decay = theta[l.arch + 1];
            coef_pos_.resize(truncation_);
            for (std::size_t j = 1; j <= truncation_; ++j)
                coef_pos_[j - 1] = scale * std::pow(static_cast<double>(j), -decay);
            square_ = true;
            break;
        }
        }
        x_.reserve(capacity);
        e_.reserve(capacity);
        e_pow_.reserve(capacity);
        state_.reserve(capacity);
        advance();
    }

    const Conditional& current() const noexcept { return current_; }
    std::size_t size() const noexcept { return x_.size(); }

    /// Innovation estimates e^_1..e^_t = X - f^ of everything pushed so far.
    std::span<const double> residuals() const noexcept { return e_; }

    void push(double x) {
        const double e = x - current_.location;
        x_.push_back(x);
        e_.push_back(e);
        state_.push_back(current_state_);
        if (kind_ != VolatilityKind::Constant) e_pow_.push_back(square_ ? e * e : std::pow(std::abs(e), delta_));
        advance();
    }

private:
    void advance() noexcept {
        const std::size_t t = x_.size();
        double f = 0.0;
        for (std::size_t i = 1; i <= ar_.size() && i <= t; ++i) f += ar_[i - 1] * x_[t - i];
        for (std::size_t j = 1; j <= ma_.size() && j <= t; ++j) f += ma_[j - 1] * e_[t - j];
        current_.location = f;

        switch (kind_) {
        case VolatilityKind::Constant:
            current_.scale = const_scale_;
            current_.log_scale = const_log_scale_;
            return;
        case VolatilityKind::Garch:
        case VolatilityKind::Aparch: {
            double s = omega_;
            for (std::size_t i = 1; i <= coef_pos_.size() && i <= t; ++i)
                s += (e_[t - i] >= 0.0 ? coef_pos_[i - 1] : coef_neg_[i - 1]) * e_pow_[t - i];
            for (std::size_t j = 1; j <= beta_.size(); ++j) s += beta_[j - 1] * (j <= t ? state_[t - j] : b0_);
            current_state_ = s;
            if (square_) {
                current_.scale = std::sqrt(s);
                current_.log_scale = 0.5 * std::log(s);
            } else {
                current_.log_scale = std::log(s) / delta_;
                current_.scale = std::exp(current_.log_scale);
            }
            return;
        }
        case VolatilityKind::ArchInf: {
            double s = omega_;
            const std::size_t lags = t < truncation_ ? t : truncation_;
            for (std::size_t i = 1; i <= lags; ++i) s += coef_pos_[i - 1] * e_pow_[t - i];
            current_state_ = s;
            current_.scale = std::sqrt(s);
            current_.log_scale = 0.5 * std::log(s);
            return;
        }
        }
    }

    VolatilityKind kind_;
    std::size_t truncation_;
    std::vector<double> ar_, ma_;
    double const_scale_ = 1.0, const_log_scale_ = 0.0;
    double delta_ = 2.0, omega_ = 0.0, b0_ = 0.0;
    bool square_ = true;
    std::vector<double> beta_;
    std::vector<double> coef_pos_, coef_neg_; // alpha_i (1 -+ gamma_i)^delta, or c_j for ARCH(inf)

    std::vector<double> x_, e_, e_pow_, state_;
    double current_state_ = 0.0;
    Conditional current_;
};

/// Conditional location, scale and log-scale for t = 1..n.
struct ConditionalSeries {
    std::vector<double> location;
    std::vector<double> scale;
    std::vector<double> log_scale;
};

/// Runs the recursion over `data` without a box check (used for finite
/// differences, which may step just outside the box).
inline ConditionalSeries conditional_series_unchecked(const ModelSpec& spec, std::span<const double> theta,
                                                      std::span<const double> data) {
    Recursion rec(spec, theta, data.size());
    ConditionalSeries out;
    out.location.resize(data.size());
    out.scale.resize(data.size());
    out.log_scale.resize(data.size());
    for (std::size_t t = 0; t < data.size(); ++t) {
        const Conditional& c = rec.current();
        out.location[t] = c.location;
        out.scale[t] = c.scale;
        out.log_scale[t] = c.log_scale;
        rec.push(data[t]);
    }
    return out;
}

inline void require_in_box(const ModelSpec& spec, std::span<const double> theta) {
    if (theta.size() != spec.dim())
        throw InputError(spec.tag() + ": parameter vector has dimension " + std::to_string(theta.size()) +
                         ", expected " + std::to_string(spec.dim()));
    if (!spec.box.contains(theta)) {
        const auto names = spec.names();
        for (std::size_t i = 0; i < theta.size(); ++i)
            if (!(theta[i] >= spec.box.lower[i] - 1e-12 && theta[i] <= spec.box.upper[i] + 1e-12))
                throw ConstraintError(spec.tag() + ": " + names[i] + " = " + std::to_string(theta[i]) +
                                      " lies outside [" + std::to_string(spec.box.lower[i]) + ", " +
                                      std::to_string(spec.box.upper[i]) + "]");
    }
}

inline ConditionalSeries conditional_series(const ModelSpec& spec, std::span<const double> theta,
                                            std::span<const double> data) {
    require_in_box(spec, theta);
    return conditional_series_unchecked(spec, theta, data);
}

/// (f^_t, M^_t) for 1 <= t <= history.size() + 1, from X_1..X_{t-1}.
inline Conditional conditional_pair(const ModelSpec& spec, std::span<const double> theta,
                                    std::span<const double> history, std::size_t t) {
    require_in_box(spec, theta);
    if (t < 1 || t > history.size() + 1)
        throw InputError("conditional_pair: t = " + std::to_string(t) + " outside 1.." +
                         std::to_string(history.size() + 1));
    Recursion rec(spec, theta, t - 1);
    for (std::size_t s = 0; s + 1 < t; ++s) rec.push(history[s]);
    const Conditional c = rec.current();
    if (!(c.scale >= spec.scale_floor() * (1.0 - 1e-12)))
        throw NumericError(spec.tag() + ": conditional scale " + std::to_string(c.scale) + " below floor " +
                           std::to_string(spec.scale_floor()) + " at t = " + std::to_string(t));
    return c;
}

} // namespace lqmle
