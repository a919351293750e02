#pragma once

// Series expansions used by the stationarity analysis: the ARMA inverse
// filter psi_j, the APARCH expansion b_j^+/b_j^- and the Lipschitz
// coefficient sequences of f and M.

#include "lqmle/errors.hpp"
#include "lqmle/model_spec.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace lqmle {

enum class CoeffKind { Psi, BPlus, BMinus, LipschitzF, LipschitzM };

struct CoeffSequence {
    CoeffKind kind = CoeffKind::Psi;
    std::vector<double> values; // values[j-1] is the lag-j coefficient

    double sum_abs() const noexcept {
        double s = 0.0;
        for (double v : values) s += std::abs(v);
        return s;
    }
};

/// Largest modulus among the reciprocal roots of 1 - c_1 x - ... - c_k x^k,
/// i.e. the spectral radius of the companion matrix of c.
inline double spectral_radius(std::span<const double> c) {
    std::size_t k = c.size();
    while (k > 0 && c[k - 1] == 0.0) --k;
    if (k == 0) return 0.0;
    if (k == 1) return std::abs(c[0]);
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) companion(0, static_cast<Eigen::Index>(i)) = c[i];
    for (std::size_t i = 1; i < k; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

inline constexpr double kUnitRootTolerance = 1e-8;

namespace detail {

// psi_j from (1 + sum psi_j x^j) Q(x) = P(x), no root check.
inline std::vector<double> psi_recursion(std::span<const double> a, std::span<const double> b, std::size_t lags) {
    std::vector<double> psi(lags + 1, 0.0);
    psi[0] = 1.0;
    for (std::size_t j = 1; j <= lags; ++j) {
        double v = j <= a.size() ? -a[j - 1] : 0.0;
        for (std::size_t k = 1; k <= b.size() && k <= j; ++k) v += b[k - 1] * psi[j - k];
        psi[j] = v;
    }
    return psi;
}

} // namespace detail

/// First `lags` coefficients of P(x)/Q(x) = 1 + sum psi_j x^j with
/// P(x) = 1 - sum a_i x^i and Q(x) = 1 - sum b_i x^i.
/// Throws InputError when Q has a root in the closed unit disk.
inline CoeffSequence arma_psi(std::span<const double> a, std::span<const double> b, std::size_t lags) {
    const double rho = spectral_radius(b);
    if (rho >= 1.0 - kUnitRootTolerance)
        throw InputError("arma_psi: Q(x) has a root in the closed unit disk (reciprocal root modulus " +
                         std::to_string(rho) + "); the ARMA filter is not invertible");
    auto psi = detail::psi_recursion(a, b, lags);
    return {CoeffKind::Psi, std::vector<double>(psi.begin() + 1, psi.end())};
}

struct AparchParams {
    double delta = 2.0;
    double omega = 0.0;
    std::vector<double> alpha;
    std::vector<double> gamma; // empty means all zero (GARCH)
    std::vector<double> beta;
};

struct AparchExpansion {
    double b0 = 0.0;
    CoeffSequence plus{CoeffKind::BPlus, {}};
    CoeffSequence minus{CoeffKind::BMinus, {}};
};

/// sigma^delta_t = b0 + sum_i b_i^+ max(X_{t-i},0)^delta + sum_i b_i^- max(-X_{t-i},0)^delta.
inline AparchExpansion aparch_coefficients(const AparchParams& par, std::size_t lags) {
    double beta_sum = 0.0;
    for (double b : par.beta) beta_sum += b;
    if (!(beta_sum < 1.0))
        throw StationarityError("aparch_coefficients: sum of beta = " + std::to_string(beta_sum) + " must be < 1");
    AparchExpansion out;
    out.b0 = par.omega / (1.0 - beta_sum);
    out.plus.values.assign(lags, 0.0);
    out.minus.values.assign(lags, 0.0);
    auto& bp = out.plus.values;
    auto& bm = out.minus.values;
    for (std::size_t i = 1; i <= lags; ++i) {
        double vp = 0.0, vm = 0.0;
        for (std::size_t k = 1; k <= par.beta.size() && k < i; ++k) {
            vp += par.beta[k - 1] * bp[i - k - 1];
            vm += par.beta[k - 1] * bm[i - k - 1];
        }
        if (i <= par.alpha.size()) {
            const double g = par.gamma.empty() ? 0.0 : par.gamma[i - 1];
            vp += par.alpha[i - 1] * std::pow(1.0 - g, par.delta);
            vm += par.alpha[i - 1] * std::pow(1.0 + g, par.delta);
        }
        bp[i - 1] = vp;
        bm[i - 1] = vm;
    }
    return out;
}

inline AparchParams volatility_params(const ModelSpec& spec, std::span<const double> theta) {
    const ParamLayout l = spec.layout();
    AparchParams par;
    par.delta = l.n_delta ? theta[l.delta] : 2.0;
    par.omega = theta[l.omega];
    par.alpha.assign(theta.begin() + l.alpha, theta.begin() + l.alpha + l.n_alpha);
    par.gamma.assign(theta.begin() + l.gamma, theta.begin() + l.gamma + l.n_gamma);
    par.beta.assign(theta.begin() + l.beta, theta.begin() + l.beta + l.n_beta);
    return par;
}

/// Lipschitz coefficients of the volatility layer alone (as a function of its
/// own innovations), at a single parameter point.
inline std::vector<double> inner_scale_lipschitz(const ModelSpec& spec, std::span<const double> theta,
                                                 std::size_t lags) {
    std::vector<double> out(lags, 0.0);
    switch (spec.volatility()) {
    case VolatilityKind::Constant: break;
    case VolatilityKind::Garch:
    case VolatilityKind::Aparch: {
        const AparchParams par = volatility_params(spec, theta);
        const AparchExpansion ex = aparch_coefficients(par, lags);
        for (std::size_t j = 0; j < lags; ++j)
            out[j] = std::pow(std::max(std::abs(ex.plus.values[j]), std::abs(ex.minus.values[j])), 1.0 / par.delta);
        break;
    }
    case VolatilityKind::ArchInf: {
        const ParamLayout l = spec.layout();
        const double scale = theta[l.arch];
        const double decay = theta[l.arch + 1];
        for (std::size_t j = 1; j <= lags; ++j) out[j - 1] = std::sqrt(scale * std::pow(static_cast<double>(j), -decay));
        break;
    }
    }
    return out;
}

inline std::vector<double> ar_coefficients(const ModelSpec& spec, std::span<const double> theta) {
    const ParamLayout l = spec.layout();
    return {theta.begin() + l.ar, theta.begin() + l.ar + l.n_ar};
}

/// Q-polynomial coefficients b = -ma.
inline std::vector<double> q_coefficients(const ModelSpec& spec, std::span<const double> theta) {
    const ParamLayout l = spec.layout();
    std::vector<double> b(theta.begin() + l.ma, theta.begin() + l.ma + l.n_ma);
    for (double& v : b) v = -v;
    return b;
}

/// Visits a tensor grid over the components `dims` of `box` (all corners plus
/// `points - 2` interior levels per free axis); other components sit at the
/// box centre.
inline void for_each_grid_point(const ParamBox& box, const std::vector<std::size_t>& dims, int points,
                                const std::function<void(std::span<const double>)>& visit) {
    std::vector<double> theta = box.center();
    std::vector<std::vector<double>> levels;
    for (std::size_t d : dims) {
        std::vector<double> lv;
        if (box.lower[d] == box.upper[d] || points < 2) {
            lv.push_back(box.lower[d] == box.upper[d] ? box.lower[d] : theta[d]);
        } else {
            for (int k = 0; k < points; ++k)
                lv.push_back(box.lower[d] + box.width(d) * static_cast<double>(k) / static_cast<double>(points - 1));
        }
        levels.push_back(std::move(lv));
    }
    std::vector<std::size_t> idx(dims.size(), 0);
    while (true) {
        for (std::size_t i = 0; i < dims.size(); ++i) theta[dims[i]] = levels[i][idx[i]];
        visit(theta);
        std::size_t i = 0;
        for (; i < dims.size(); ++i) {
            if (++idx[i] < levels[i].size()) break;
            idx[i] = 0;
        }
        if (i == dims.size()) break;
    }
}

struct LipschitzBounds {
    CoeffSequence f{CoeffKind::LipschitzF, {}};
    CoeffSequence m{CoeffKind::LipschitzM, {}};
    std::vector<double> psi_abs;     // sup |psi_j| over the box (j = 1..lags)
    std::vector<double> inner_scale; // sup of the volatility layer's own coefficients
};

namespace detail {

inline std::vector<std::size_t> mean_dims(const ModelSpec& spec) {
    const ParamLayout l = spec.layout();
    std::vector<std::size_t> d;
    for (std::size_t i = 0; i < l.n_ar; ++i) d.push_back(l.ar + i);
    for (std::size_t i = 0; i < l.n_ma; ++i) d.push_back(l.ma + i);
    return d;
}

inline std::vector<std::size_t> volatility_dims(const ModelSpec& spec) {
    const auto mean = mean_dims(spec);
    std::vector<std::size_t> d;
    for (std::size_t i = 0; i < spec.dim(); ++i)
        if (std::find(mean.begin(), mean.end(), i) == mean.end()) d.push_back(i);
    return d;
}

} // namespace detail

/// Upper bounds on the Lipschitz coefficients alpha_j(f, box) and
/// alpha_j(M, box). The supremum over the box is taken componentwise on a
/// grid that includes every corner (exact for families whose coefficients are
/// monotone in each parameter). ARMA layers compose as
///   alpha_j(f) <= |psi_j|,  alpha_j(M) <= sum_{k=1..j} alpha_k(M_inner) |psi_{j-k}|,  psi_0 = 1.
inline LipschitzBounds lipschitz_coefficients(const ModelSpec& spec, const ParamBox& box, std::size_t lags,
                                              int grid_points = 3) {
    if (box.size() != spec.dim())
        throw InputError(spec.tag() + ": box dimension does not match the model");
    LipschitzBounds out;
    out.psi_abs.assign(lags, 0.0);
    out.inner_scale.assign(lags, 0.0);

    if (spec.has_mean()) {
        for_each_grid_point(box, detail::mean_dims(spec), grid_points, [&](std::span<const double> theta) {
            const auto a = ar_coefficients(spec, theta);
            const auto b = q_coefficients(spec, theta);
            const auto psi = detail::psi_recursion(a, b, lags);
            for (std::size_t j = 1; j <= lags; ++j) out.psi_abs[j - 1] = std::max(out.psi_abs[j - 1], std::abs(psi[j]));
        });
    }
    if (spec.volatility() != VolatilityKind::Constant) {
        for_each_grid_point(box, detail::volatility_dims(spec), grid_points, [&](std::span<const double> theta) {
            const auto c = inner_scale_lipschitz(spec, theta, lags);
            for (std::size_t j = 0; j < lags; ++j) out.inner_scale[j] = std::max(out.inner_scale[j], c[j]);
        });
    }

    out.f.values = out.psi_abs;
    out.m.values.assign(lags, 0.0);
    for (std::size_t j = 1; j <= lags; ++j) {
        double s = out.inner_scale[j - 1]; // k = j, psi_0 = 1
        for (std::size_t k = 1; k < j; ++k) s += out.inner_scale[k - 1] * out.psi_abs[j - k - 1];
        out.m.values[j - 1] = s;
    }
    return out;
}

/// Bound on sum_{j > J} of a nonnegative sequence given its first J terms,
/// extrapolating geometric or power-law decay from the last two terms.
/// Returns +inf when neither extrapolation is summable.
inline double tail_bound(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n == 0) return 0.0;
    const double last = std::abs(v[n - 1]);
    if (last == 0.0) return 0.0;
    if (n < 2) return std::numeric_limits<double>::infinity();
    const double prev = std::abs(v[n - 2]);
    if (prev <= 0.0) return std::numeric_limits<double>::infinity();
    const double ratio = last / prev;
    const double geometric = ratio < 1.0 ? last * ratio / (1.0 - ratio) : std::numeric_limits<double>::infinity();
    const double jn = static_cast<double>(n);
    const double exponent = std::log(prev / last) / std::log(jn / (jn - 1.0));
    const double power = exponent > 1.0 ? last * jn / (exponent - 1.0) : std::numeric_limits<double>::infinity();
    return std::min(geometric, power);
}

} // namespace lqmle
