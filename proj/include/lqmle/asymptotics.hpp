#pragma once

// Plug-in estimates of the limiting covariance of sqrt(n)(theta^ - theta0)
// and the Wald intervals built from it.

#include "lqmle/contrast.hpp"
#include "lqmle/errors.hpp"
#include "lqmle/model_spec.hpp"
#include "lqmle/recursion.hpp"
#include "lqmle/results.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <span>
#include <string>
#include <vector>

namespace lqmle {

inline constexpr double kMaxConditionNumber = 1e12;

struct GammaMatrices {
    Eigen::MatrixXd gamma_f;
    Eigen::MatrixXd gamma_m;
    std::vector<std::string> warnings;
};

/// Finite-difference gradients of f^_t and log M^_t at theta for every t:
/// rows are t, columns are parameter components. Central differences with
/// h_i = 1e-5 max(1, |theta_i|); a one-sided stencil is used on a face of the
/// box where the central one would leave it.
struct ConditionalGradients {
    Eigen::MatrixXd location;  // d f^_t / d theta_i
    Eigen::MatrixXd log_scale; // d log M^_t / d theta_i
    ConditionalSeries at;      // series at theta itself
};

inline ConditionalGradients conditional_gradients(const ModelSpec& spec, std::span<const double> theta,
                                                  std::span<const double> data) {
    const std::size_t d = spec.dim(), n = data.size();
    ConditionalGradients g;
    g.at = conditional_series(spec, theta, data);
    g.location.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    g.log_scale.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::vector<double> lo(theta.begin(), theta.end()), hi(theta.begin(), theta.end());
    for (std::size_t i = 0; i < d; ++i) {
        const double h = 1e-5 * std::max(1.0, std::abs(theta[i]));
        double a = theta[i] - h, b = theta[i] + h;
        if (a < spec.box.lower[i]) a = theta[i];
        if (b > spec.box.upper[i]) b = theta[i];
        if (a == b) { // degenerate (fixed) component
            g.location.col(static_cast<Eigen::Index>(i)).setZero();
            g.log_scale.col(static_cast<Eigen::Index>(i)).setZero();
            continue;
        }
        lo[i] = a;
        hi[i] = b;
        const ConditionalSeries sa = a == theta[i] ? g.at : conditional_series_unchecked(spec, lo, data);
        const ConditionalSeries sb = b == theta[i] ? g.at : conditional_series_unchecked(spec, hi, data);
        lo[i] = hi[i] = theta[i];
        const double span = b - a;
        for (std::size_t t = 0; t < n; ++t) {
            const auto r = static_cast<Eigen::Index>(t), c = static_cast<Eigen::Index>(i);
            g.location(r, c) = (sb.location[t] - sa.location[t]) / span;
            g.log_scale(r, c) = (sb.log_scale[t] - sa.log_scale[t]) / span;
        }
    }
    if (!g.location.allFinite() || !g.log_scale.allFinite())
        throw NumericError(spec.tag() + ": non-finite finite-difference gradient");
    return g;
}

/// Gamma_F = mean M^-2 grad f grad f', Gamma_M = mean grad log M grad log M'.
inline GammaMatrices gamma_matrices(const ModelSpec& spec, std::span<const double> theta,
                                    std::span<const double> data) {
    if (data.empty()) throw InputError("gamma_matrices: empty data");
    require_finite_data(data);
    const ConditionalGradients g = conditional_gradients(spec, theta, data);
    const auto n = static_cast<double>(data.size());
    Eigen::MatrixXd scaled = g.location;
    for (Eigen::Index t = 0; t < scaled.rows(); ++t) scaled.row(t) /= g.at.scale[static_cast<std::size_t>(t)];
    GammaMatrices out;
    out.gamma_f = (scaled.transpose() * scaled) / n;
    out.gamma_m = (g.log_scale.transpose() * g.log_scale) / n;
    // exact symmetry
    out.gamma_f = 0.5 * (out.gamma_f + out.gamma_f.transpose()).eval();
    out.gamma_m = 0.5 * (out.gamma_m + out.gamma_m.transpose()).eval();

    const auto names = spec.names();
    for (std::size_t i : spec.box.boundary_components(theta))
        out.warnings.push_back("boundary: " + names[i] + " = " + std::to_string(theta[i]) +
                               " lies on the box boundary; the normal approximation may not hold");
    return out;
}

/// Epanechnikov kernel density estimate at 0 with bandwidth
/// 0.9 min(sd, IQR/1.34) n^{-1/5}.
inline double g0_estimate(std::span<const double> residuals) {
    const std::size_t n = residuals.size();
    if (n < 100) throw InputError("g0_estimate: need at least 100 residuals, got " + std::to_string(n));
    double mean = 0.0;
    for (double r : residuals) mean += r;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double r : residuals) ss += (r - mean) * (r - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    std::vector<double> sorted(residuals.begin(), residuals.end());
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double p) {
        const double pos = p * static_cast<double>(n - 1);
        const auto k = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(k);
        return k + 1 < n ? sorted[k] + frac * (sorted[k + 1] - sorted[k]) : sorted[k];
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    if (!(spread > 0.0) || !std::isfinite(spread))
        throw NumericError("g0_estimate: residuals have zero spread");
    const double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);

    // only residuals with |r| < h contribute
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), -h);
    const auto last = std::upper_bound(sorted.begin(), sorted.end(), h);
    double sum = 0.0;
    for (auto it = first; it != last; ++it) {
        const double u = *it / h;
        sum += 0.75 * (1.0 - u * u);
    }
    const double g0 = sum / (static_cast<double>(n) * h);
    if (!(g0 > 0.0)) throw NumericError("g0_estimate: no residual mass near 0 (bandwidth " + std::to_string(h) + ")");
    return g0;
}

namespace detail {

// Inverse of a symmetric bread matrix, refusing ill-conditioned ones.
inline Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& bread, const std::vector<std::string>& names) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(bread);
    const Eigen::VectorXd ev = eig.eigenvalues();
    const Eigen::VectorXd abs_ev = ev.cwiseAbs();
    Eigen::Index k_min = 0;
    const double lo = abs_ev.minCoeff(&k_min), hi = abs_ev.maxCoeff();
    if (!(lo > 0.0) || hi / lo >= kMaxConditionNumber || !std::isfinite(hi / lo)) {
        const Eigen::VectorXd v = eig.eigenvectors().col(k_min);
        std::ostringstream os;
        os << "singular sandwich bread (eigenvalue " << ev(k_min) << ", condition number "
           << (lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity()) << "); offending direction:";
        for (Eigen::Index i = 0; i < v.size(); ++i)
            if (std::abs(v(i)) > 1e-3) {
                const auto ui = static_cast<std::size_t>(i);
                os << ' ' << (ui < names.size() ? names[ui] : "theta" + std::to_string(i)) << '=' << v(i);
            }
        throw SingularityError(os.str());
    }
    return eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

} // namespace detail

/// Laplacian-QMLE sandwich
///   (G_M + 2 g0 G_F)^{-1} ((sigma^2 - 1) G_M + G_F) (G_M + 2 g0 G_F)^{-1}.
inline Eigen::MatrixXd sandwich(const Eigen::MatrixXd& gamma_f, const Eigen::MatrixXd& gamma_m, double sigma2,
                                double g0, const std::vector<std::string>& names = {}) {
    if (gamma_f.rows() != gamma_m.rows() || gamma_f.cols() != gamma_m.cols() || gamma_f.rows() != gamma_f.cols())
        throw InputError("sandwich: Gamma matrices must be square and of equal size");
    if (!(g0 > 0.0)) throw InputError("sandwich: g0 must be positive");
    const Eigen::MatrixXd inv = detail::checked_inverse(gamma_m + 2.0 * g0 * gamma_f, names);
    const Eigen::MatrixXd meat = (sigma2 - 1.0) * gamma_m + gamma_f;
    return detail::symmetrize(inv * meat * inv);
}

/// Gaussian-QMLE sandwich J^{-1} I J^{-1} for the contrast with M' = ratio M.
/// With G_F' = G_F / ratio^2 and eta = zeta / ratio,
///   J = G_F' + 2 E[eta^2] G_M,
///   I = (E[eta^4] - 2 E[eta^2] + 1) G_M + E[eta^2] G_F'
/// (symmetric innovations, so the odd cross moments vanish).
inline Eigen::MatrixXd gaussian_sandwich(const Eigen::MatrixXd& gamma_f, const Eigen::MatrixXd& gamma_m,
                                         double ratio, double m2, double m4,
                                         const std::vector<std::string>& names = {}) {
    if (!(ratio > 0.0)) throw InputError("gaussian_sandwich: ratio must be positive");
    const Eigen::MatrixXd gf = gamma_f / (ratio * ratio);
    const Eigen::MatrixXd inv = detail::checked_inverse(gf + 2.0 * m2 * gamma_m, names);
    const Eigen::MatrixXd meat = (m4 - 2.0 * m2 + 1.0) * gamma_m + m2 * gf;
    return detail::symmetrize(inv * meat * inv);
}

/// Wald intervals theta^_i -+ z_{(1+level)/2} sqrt(cov_ii / n).
inline std::vector<ConfidenceInterval> confidence_intervals(std::span<const double> theta,
                                                            const Eigen::MatrixXd& covariance, std::size_t n,
                                                            double level, std::vector<std::string>* warnings = nullptr) {
    if (!(level > 0.0 && level < 1.0)) throw InputError("confidence_intervals: level must be in (0, 1)");
    if (n == 0) throw InputError("confidence_intervals: n must be positive");
    if (covariance.rows() != static_cast<Eigen::Index>(theta.size()))
        throw InputError("confidence_intervals: covariance has the wrong dimension");
    const double z = boost::math::quantile(boost::math::normal(), 0.5 * (1.0 + level));
    std::vector<ConfidenceInterval> out(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        double v = covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
        if (v < 0.0) {
            if (warnings) warnings->push_back("negative variance " + std::to_string(v) + " for component " +
                                              std::to_string(i) + " clamped to 0");
            v = 0.0;
        }
        const double half = z * std::sqrt(v / static_cast<double>(n));
        out[i] = {theta[i] - half, theta[i] + half};
    }
    return out;
}

inline std::vector<ConfidenceInterval> confidence_intervals(EstimateResult& result, double level) {
    if (!result.sandwich) throw InputError("confidence_intervals: sandwich not computed");
    result.intervals = confidence_intervals(result.theta_hat, result.sandwich->covariance, result.n, level,
                                            &result.warnings);
    result.level = level;
    return result.intervals;
}

/// Fills the asymptotic fields of a fitted result: Gamma matrices, g0, the
/// residual moments, the sandwich covariance and Wald intervals at `level`.
inline void attach_asymptotics(EstimateResult& result, const ModelSpec& spec, std::span<const double> data,
                               double level = 0.95) {
    GammaMatrices gm = gamma_matrices(spec, result.theta_hat, data);
    for (auto& w : gm.warnings) result.warnings.push_back(std::move(w));
    const std::vector<double> res = residuals(spec, result.theta_hat, data);

    SandwichCovariance s;
    s.gamma_f = gm.gamma_f;
    s.gamma_m = gm.gamma_m;
    double m2 = 0.0, m4 = 0.0;
    for (double z : res) {
        m2 += z * z;
        m4 += z * z * z * z;
    }
    m2 /= static_cast<double>(res.size());
    m4 /= static_cast<double>(res.size());
    s.sigma2_hat = m2;
    s.g0_hat = g0_estimate(res);

    if (result.contrast.kind == ContrastKind::LaplacianQL) {
        s.covariance = sandwich(s.gamma_f, s.gamma_m, s.sigma2_hat, s.g0_hat, result.names);
    } else {
        const double r2 = result.contrast.scale_ratio * result.contrast.scale_ratio;
        s.fourth_moment = m4 / (r2 * r2);
        s.covariance = gaussian_sandwich(s.gamma_f, s.gamma_m, result.contrast.scale_ratio, m2 / r2,
                                         s.fourth_moment, result.names);
    }
    result.sandwich = std::move(s);
    confidence_intervals(result, level);
}

} // namespace lqmle
