#pragma once

#include "lqmle/coefficients.hpp"
#include "lqmle/errors.hpp"
#include "lqmle/model_spec.hpp"
#include "lqmle/noise.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>

namespace lqmle {

/// Membership of a parameter point (or a whole box) in the r-order
/// stationarity region Theta(r).
///
/// Two sufficient certificates are evaluated:
///  - direct: 1 - [sum_j alpha_j(f) + (E|zeta|^r)^{1/r} sum_j alpha_j(M)] for
///    the composed model;
///  - inherited (ARMA-composed families only): an ARMA filter that is causal
///    and invertible preserves stationarity and r-th moments of its input, so
///    min(inner volatility margin, 1 - rho(AR), 1 - rho(MA)).
/// `margin` is the larger of the two and `member` is margin > 0.
struct StationarityReport {
    bool member = false;
    double margin = 0.0;
    double direct_margin = 0.0;
    double inherited_margin = -std::numeric_limits<double>::infinity(); // -inf when not applicable
    double sum_f = 0.0;
    double sum_m = 0.0;
    double moment = 1.0;    // (E|zeta|^r)^{1/r}
    double tail_bound = 0.0; // estimated omitted mass beyond the truncation lag
};

inline double moment_root(const NoiseSpec& noise, double r) {
    if (r == 1.0) return 1.0;
    if (r == 2.0) return std::sqrt(variance(noise));
    return std::pow(abs_moment(noise, r), 1.0 / r);
}

inline StationarityReport stationarity_check(const ModelSpec& spec, const ParamBox& box, double r,
                                             const NoiseSpec& noise, int grid_points = 3) {
    if (!(r >= 1.0)) throw InputError("stationarity_check: r must be >= 1");
    const auto lags = static_cast<std::size_t>(spec.truncation);
    const LipschitzBounds bounds = lipschitz_coefficients(spec, box, lags, grid_points);

    StationarityReport rep;
    rep.moment = moment_root(noise, r);
    rep.sum_f = bounds.f.sum_abs();
    rep.sum_m = bounds.m.sum_abs();
    const double tail_f = tail_bound(bounds.f.values);
    const double tail_m = tail_bound(bounds.m.values);
    rep.tail_bound = tail_f + rep.moment * tail_m;
    rep.direct_margin = 1.0 - (rep.sum_f + rep.moment * rep.sum_m);
    if (!std::isfinite(rep.direct_margin)) rep.direct_margin = -std::numeric_limits<double>::infinity();

    if (spec.has_mean()) {
        double inner_sum = 0.0;
        for (double v : bounds.inner_scale) inner_sum += v;
        double rho_ar = 0.0, rho_ma = 0.0;
        for_each_grid_point(box, detail::mean_dims(spec), grid_points, [&](std::span<const double> theta) {
            const auto a = ar_coefficients(spec, theta);
            const auto b = q_coefficients(spec, theta);
            rho_ar = std::max(rho_ar, spectral_radius(a));
            rho_ma = std::max(rho_ma, spectral_radius(b));
        });
        const double inner = 1.0 - rep.moment * inner_sum;
        rep.inherited_margin = std::min({inner, 1.0 - rho_ar, 1.0 - rho_ma});
    }
    rep.margin = std::max(rep.direct_margin, rep.inherited_margin);
    rep.member = rep.margin > 0.0;
    return rep;
}

inline StationarityReport stationarity_check(const ModelSpec& spec, std::span<const double> theta, double r,
                                             const NoiseSpec& noise) {
    if (theta.size() != spec.dim()) throw InputError(spec.tag() + ": parameter vector has the wrong dimension");
    return stationarity_check(spec, ParamBox::point(theta), r, noise, 1);
}

/// E log A for the random coefficient A = alpha (|zeta| - gamma zeta)^delta + beta
/// of a first-order APARCH/GARCH volatility recursion sigma^delta_t = omega + A_{t-1} sigma^delta_{t-1}.
/// Negative values mean a strictly stationary solution exists.
inline double aparch11_lyapunov(double alpha, double gamma, double beta, double delta, const NoiseSpec& noise) {
    using boost::math::quadrature::gauss_kronrod;
    const double kp = alpha * std::pow(1.0 - gamma, delta);
    const double km = alpha * std::pow(1.0 + gamma, delta);
    auto half = [&](double k) {
        auto integrand = [&](double x) {
            const double a = k * std::pow(x, delta) + beta;
            return a > 0.0 ? std::log(a) * density(noise, x) : 0.0;
        };
        return gauss_kronrod<double, 61>::integrate(integrand, 0.0, std::numeric_limits<double>::infinity(), 15,
                                                    1e-12);
    };
    return half(kp) + half(km); // density is symmetric: x>0 uses (1-gamma), x<0 uses (1+gamma)
}

struct SimulationGate {
    bool ok = false;
    std::string certificate; // which condition admitted the parameters
    std::string reason;      // why they were refused
};

/// Decides whether the forward recursion at theta has a stationary solution
/// worth simulating. Admits theta when it lies in Theta(1), or when the
/// ARMA layer is causal and the volatility layer is strictly stationary:
/// exactly via the Lyapunov exponent for first-order recursions, otherwise
/// via the fractional-moment condition
///   sum_i E[(alpha_i (|zeta|-gamma_i zeta)^delta)^s] + sum_j beta_j^s < 1  for some s in (0, 1].
inline SimulationGate simulation_gate(const ModelSpec& spec, std::span<const double> theta, const NoiseSpec& noise) {
    SimulationGate gate;
    const StationarityReport r1 = stationarity_check(spec, theta, 1.0, noise);
    if (r1.member) {
        gate.ok = true;
        gate.certificate = "theta(1)";
        return gate;
    }
    if (spec.has_mean()) {
        const auto a = ar_coefficients(spec, theta);
        const double rho = spectral_radius(a);
        if (rho >= 1.0 - kUnitRootTolerance) {
            gate.reason = "AR polynomial has a root in the closed unit disk (reciprocal root modulus " +
                          std::to_string(rho) + ")";
            return gate;
        }
    }
    const ParamLayout l = spec.layout();
    switch (spec.volatility()) {
    case VolatilityKind::Constant:
        gate.ok = true;
        gate.certificate = "causal-arma";
        return gate;
    case VolatilityKind::Garch:
    case VolatilityKind::Aparch: {
        const AparchParams par = volatility_params(spec, theta);
        double beta_sum = 0.0;
        for (double b : par.beta) beta_sum += b;
        if (!(beta_sum < 1.0)) {
            gate.reason = "sum of beta >= 1";
            return gate;
        }
        if (par.alpha.size() <= 1 && par.beta.size() <= 1) {
            const double alpha = par.alpha.empty() ? 0.0 : par.alpha[0];
            const double gamma = par.gamma.empty() ? 0.0 : par.gamma[0];
            const double beta = par.beta.empty() ? 0.0 : par.beta[0];
            const double lyap = aparch11_lyapunov(alpha, gamma, beta, par.delta, noise);
            if (lyap < 0.0) {
                gate.ok = true;
                gate.certificate = "lyapunov";
            } else {
                gate.reason = "top Lyapunov exponent " + std::to_string(lyap) + " >= 0";
            }
            return gate;
        }
        for (double s : {1.0, 0.5, 0.25, 0.125}) {
            double total = 0.0;
            for (std::size_t i = 0; i < par.alpha.size(); ++i) {
                const double g = par.gamma.empty() ? 0.0 : par.gamma[i];
                const double m = abs_moment(noise, par.delta * s);
                total += std::pow(par.alpha[i], s) * 0.5 * m *
                         (std::pow(1.0 - g, par.delta * s) + std::pow(1.0 + g, par.delta * s));
            }
            for (double b : par.beta) total += std::pow(b, s);
            if (total < 1.0) {
                gate.ok = true;
                gate.certificate = "fractional-moment";
                return gate;
            }
        }
        gate.reason = "no fractional-moment certificate of strict stationarity";
        return gate;
    }
    case VolatilityKind::ArchInf: {
        const double scale = theta[l.arch];
        const double decay = theta[l.arch + 1];
        for (double s : {1.0, 0.5, 0.25}) {
            double total = 0.0;
            for (int j = 1; j <= spec.truncation; ++j) total += std::pow(scale * std::pow(j, -decay), s);
            total *= abs_moment(noise, 2.0 * s);
            if (total < 1.0 && decay * s > 1.0) {
                gate.ok = true;
                gate.certificate = "fractional-moment";
                return gate;
            }
        }
        gate.reason = "no fractional-moment certificate of strict stationarity";
        return gate;
    }
    }
    return gate;
}

} // namespace lqmle
