#pragma once

// Innovation laws for the affine causal model. Every law is rescaled so that
// E|zeta| = 1, which is the normalisation the Laplacian contrast relies on.

#include "lqmle/errors.hpp"
#include "lqmle/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace lqmle {

enum class NoiseLaw { Laplace, Gaussian, Uniform, StudentT3, GaussMix };

inline constexpr std::array<NoiseLaw, 5> kAllNoiseLaws{NoiseLaw::Laplace, NoiseLaw::Gaussian, NoiseLaw::Uniform,
                                                       NoiseLaw::StudentT3, NoiseLaw::GaussMix};

inline std::string_view to_string(NoiseLaw law) noexcept {
    switch (law) {
    case NoiseLaw::Laplace: return "laplace";
    case NoiseLaw::Gaussian: return "gaussian";
    case NoiseLaw::Uniform: return "uniform";
    case NoiseLaw::StudentT3: return "student3";
    case NoiseLaw::GaussMix: return "gaussmix";
    }
    return "unknown";
}

inline NoiseLaw parse_noise_law(std::string_view name) {
    for (NoiseLaw law : kAllNoiseLaws)
        if (to_string(law) == name) return law;
    throw InputError("unknown noise law '" + std::string(name) +
                     "' (expected laplace, gaussian, uniform, student3 or gaussmix)");
}

namespace detail {

struct MixComponent {
    double weight;
    double mean;
    double sd;
};

// 0.05 N(-2, 0.16) + 0.90 N(0, 1) + 0.05 N(2, 0.16); the 0.16 is a variance.
inline constexpr std::array<MixComponent, 3> kMixture{{{0.05, -2.0, 0.4}, {0.90, 0.0, 1.0}, {0.05, 2.0, 0.4}}};

inline double std_normal_pdf(double x) noexcept {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double std_normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// E|Y| for Y ~ N(mu, sd^2).
inline double folded_normal_mean(double mu, double sd) noexcept {
    return sd * std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * mu * mu / (sd * sd)) +
           mu * (1.0 - 2.0 * std_normal_cdf(-mu / sd));
}

inline double t3_pdf(double t) noexcept {
    const double d = 3.0 + t * t;
    return 6.0 * std::sqrt(3.0) / (std::numbers::pi * d * d);
}

inline double t3_cdf(double t) noexcept {
    const double u = t / std::sqrt(3.0);
    return 0.5 + (u / (1.0 + u * u) + std::atan(u)) / std::numbers::pi;
}

// Densities and CDFs of the raw (unnormalised) laws.
inline double raw_pdf(NoiseLaw law, double x) noexcept {
    switch (law) {
    case NoiseLaw::Laplace: return 0.5 * std::exp(-std::abs(x));
    case NoiseLaw::Gaussian: return std_normal_pdf(x);
    case NoiseLaw::Uniform: return std::abs(x) <= 1.0 ? 0.5 : 0.0;
    case NoiseLaw::StudentT3: return t3_pdf(x);
    case NoiseLaw::GaussMix: {
        // evaluated at |x| so the density is symmetric to the last bit
        const double a = std::abs(x);
        double s = 0.0;
        for (const auto& c : kMixture) s += c.weight * std_normal_pdf((a - c.mean) / c.sd) / c.sd;
        return s;
    }
    }
    return 0.0;
}

inline double raw_cdf(NoiseLaw law, double x) noexcept {
    switch (law) {
    case NoiseLaw::Laplace: return x < 0.0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x);
    case NoiseLaw::Gaussian: return std_normal_cdf(x);
    case NoiseLaw::Uniform: return std::clamp(0.5 * (x + 1.0), 0.0, 1.0);
    case NoiseLaw::StudentT3: return t3_cdf(x);
    case NoiseLaw::GaussMix: {
        double s = 0.0;
        for (const auto& c : kMixture) s += c.weight * std_normal_cdf((x - c.mean) / c.sd);
        return s;
    }
    }
    return 0.0;
}

// E|Z_raw|^r in closed form where one exists.
inline double raw_abs_moment(NoiseLaw law, double r) {
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    switch (law) {
    case NoiseLaw::Laplace: return std::tgamma(r + 1.0);
    case NoiseLaw::Gaussian: return std::pow(2.0, r / 2.0) * std::tgamma((r + 1.0) / 2.0) / sqrt_pi;
    case NoiseLaw::Uniform: return 1.0 / (r + 1.0);
    case NoiseLaw::StudentT3:
        if (r >= 3.0) return std::numeric_limits<double>::infinity();
        return std::pow(3.0, r / 2.0) * std::tgamma((r + 1.0) / 2.0) * std::tgamma((3.0 - r) / 2.0) /
               (sqrt_pi * std::tgamma(1.5));
    case NoiseLaw::GaussMix: {
        if (r == 1.0) {
            double s = 0.0;
            for (const auto& c : kMixture) s += c.weight * folded_normal_mean(c.mean, c.sd);
            return s;
        }
        if (r == 2.0) {
            double s = 0.0;
            for (const auto& c : kMixture) s += c.weight * (c.sd * c.sd + c.mean * c.mean);
            return s;
        }
        auto integrand = [r](double x) { return std::pow(std::abs(x), r) * raw_pdf(NoiseLaw::GaussMix, x); };
        using boost::math::quadrature::gauss_kronrod;
        return 2.0 * gauss_kronrod<double, 61>::integrate(integrand, 0.0, 40.0, 15, 1e-14);
    }
    }
    return 0.0;
}

} // namespace detail

/// Normalising constant c such that zeta = Z_raw / c has E|zeta| = 1.
/// Raw forms: standard Laplace, standard normal, Uniform[-1,1], Student t(3)
/// and the three-component Gaussian mixture.
inline double normalization_constant(NoiseLaw law) { return detail::raw_abs_moment(law, 1.0); }

struct NoiseSpec {
    NoiseLaw law = NoiseLaw::Laplace;
    double scale = 1.0;

    static NoiseSpec of(NoiseLaw law) { return {law, normalization_constant(law)}; }
};

inline double density(const NoiseSpec& spec, double x) noexcept {
    return spec.scale * detail::raw_pdf(spec.law, spec.scale * x);
}

inline double cdf(const NoiseSpec& spec, double x) noexcept { return detail::raw_cdf(spec.law, spec.scale * x); }

/// E|zeta|^r; infinite when the moment does not exist.
inline double abs_moment(const NoiseSpec& spec, double r) {
    if (!(r > 0.0)) throw InputError("abs_moment: order must be positive");
    return detail::raw_abs_moment(spec.law, r) / std::pow(spec.scale, r);
}

/// sigma_zeta^2 = Var(zeta).
inline double variance(const NoiseSpec& spec) { return abs_moment(spec, 2.0); }

/// g(0), the density of zeta at the origin.
inline double density_at_zero(const NoiseSpec& spec) noexcept { return density(spec, 0.0); }

/// Draws from a normalised law. Holds the distribution objects so cached
/// state (e.g. the second Gaussian of a polar pair) is reused across draws.
class NoiseSampler {
public:
    explicit NoiseSampler(const NoiseSpec& spec) : spec_(spec) {}

    template <class URBG>
    double operator()(URBG& gen) {
        double raw = 0.0;
        switch (spec_.law) {
        case NoiseLaw::Laplace: {
            double u = unit_(gen) - 0.5;
            while (u == -0.5) u = unit_(gen) - 0.5;
            raw = (u < 0.0 ? 1.0 : -1.0) * std::log1p(-2.0 * std::abs(u));
            break;
        }
        case NoiseLaw::Gaussian: raw = normal_(gen); break;
        case NoiseLaw::Uniform: raw = 2.0 * unit_(gen) - 1.0; break;
        case NoiseLaw::StudentT3: raw = t3_(gen); break;
        case NoiseLaw::GaussMix: {
            const double u = unit_(gen);
            const auto& mix = detail::kMixture;
            const auto& c = u < mix[0].weight ? mix[0] : u < mix[0].weight + mix[1].weight ? mix[1] : mix[2];
            raw = c.mean + c.sd * normal_(gen);
            break;
        }
        }
        return raw / spec_.scale;
    }

private:
    NoiseSpec spec_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::student_t_distribution<double> t3_{3.0};
};

/// n i.i.d. draws; bitwise reproducible for a given seed.
inline std::vector<double> sample(const NoiseSpec& spec, std::uint64_t seed, std::size_t n) {
    Engine gen = make_engine(seed);
    NoiseSampler draw(spec);
    std::vector<double> out(n);
    for (double& z : out) z = draw(gen);
    return out;
}

} // namespace lqmle
