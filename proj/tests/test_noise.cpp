#include "lqmle/noise.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace lqmle;

namespace {

double raw_oracle_pdf(NoiseLaw law, double x) {
    switch (law) {
    case NoiseLaw::Laplace: return oracle::laplace_pdf(x);
    case NoiseLaw::Gaussian: return oracle::normal_pdf(x);
    case NoiseLaw::Uniform: return oracle::uniform_pdf(x);
    case NoiseLaw::StudentT3: return oracle::t3_pdf(x);
    case NoiseLaw::GaussMix: return oracle::mix_pdf(x);
    }
    return 0.0;
}

// E|Z_raw| by quadrature of the textbook density.
double raw_abs_mean(NoiseLaw law) {
    auto f = [law](double x) { return raw_oracle_pdf(law, x); };
    switch (law) {
    case NoiseLaw::Laplace: return oracle::half_moment(f, 1.0, 60.0);
    case NoiseLaw::Gaussian: return oracle::half_moment(f, 1.0, 40.0);
    case NoiseLaw::Uniform: return oracle::half_moment(f, 1.0, 2.0, 1.0);
    case NoiseLaw::StudentT3: return oracle::t3_abs_mean();
    case NoiseLaw::GaussMix: return oracle::half_moment(f, 1.0, 40.0);
    }
    return 0.0;
}

class EachLaw : public ::testing::TestWithParam<NoiseLaw> {};

} // namespace

TEST(Noise, NormalizationConstantsMatchFrozenValues) {
    EXPECT_DOUBLE_EQ(normalization_constant(NoiseLaw::Laplace), 1.0);
    EXPECT_NEAR(normalization_constant(NoiseLaw::Gaussian), std::sqrt(2.0 / std::numbers::pi), 1e-15);
    EXPECT_NEAR(normalization_constant(NoiseLaw::StudentT3), 2.0 * std::sqrt(3.0) / std::numbers::pi, 1e-14);
    EXPECT_NEAR(normalization_constant(NoiseLaw::Uniform), 0.5, 1e-15);
    // quadrature value of the (0.05, 0.90, 0.05) mixture
    EXPECT_NEAR(normalization_constant(NoiseLaw::GaussMix), 0.9180961089995113, 1e-13);
}

TEST_P(EachLaw, ConstantMatchesQuadratureOracle) {
    EXPECT_NEAR(normalization_constant(GetParam()), raw_abs_mean(GetParam()), 1e-10);
}

TEST_P(EachLaw, NormalizedAbsMeanIsOneByQuadrature) {
    const NoiseSpec s = NoiseSpec::of(GetParam());
    auto f = [&](double x) { return density(s, x); };
    double m = 0.0;
    if (GetParam() == NoiseLaw::StudentT3) {
        // x = t / c, so the cut at t = 200 sits at 200 / c
        const double T = 200.0;
        const double tail = 3.0 * std::sqrt(3.0) / (std::numbers::pi * (3.0 + T * T));
        m = oracle::half_moment(f, 1.0, T / s.scale) + 2.0 * tail / s.scale;
    } else if (GetParam() == NoiseLaw::Uniform) {
        m = oracle::half_moment(f, 1.0, 3.0, 2.0);
    } else {
        m = oracle::half_moment(f, 1.0, 60.0);
    }
    EXPECT_NEAR(m, 1.0, 1e-10);
}

TEST_P(EachLaw, VarianceMatchesQuadrature) {
    const NoiseSpec s = NoiseSpec::of(GetParam());
    if (GetParam() == NoiseLaw::StudentT3) {
        EXPECT_NEAR(variance(s), std::numbers::pi * std::numbers::pi / 4.0, 1e-12);
        return;
    }
    auto f = [&](double x) { return density(s, x); };
    const double v = GetParam() == NoiseLaw::Uniform ? oracle::half_moment(f, 2.0, 3.0, 2.0)
                                                     : oracle::half_moment(f, 2.0, 60.0);
    EXPECT_NEAR(variance(s), v, 1e-10);
}

TEST(Noise, FrozenVariances) {
    EXPECT_NEAR(variance(NoiseSpec::of(NoiseLaw::Laplace)), 2.0, 1e-12);
    EXPECT_NEAR(variance(NoiseSpec::of(NoiseLaw::Gaussian)), std::numbers::pi / 2.0, 1e-12);
    EXPECT_NEAR(variance(NoiseSpec::of(NoiseLaw::Uniform)), 4.0 / 3.0, 1e-12);
    EXPECT_NEAR(variance(NoiseSpec::of(NoiseLaw::GaussMix)), 1.5612756832894552, 1e-10);
}

TEST(Noise, FrozenDensitiesAtZero) {
    EXPECT_NEAR(density_at_zero(NoiseSpec::of(NoiseLaw::Laplace)), 0.5, 1e-15);
    EXPECT_NEAR(density_at_zero(NoiseSpec::of(NoiseLaw::Uniform)), 0.25, 1e-15);
    EXPECT_NEAR(density_at_zero(NoiseSpec::of(NoiseLaw::Gaussian)), 1.0 / std::numbers::pi, 1e-15);
    EXPECT_NEAR(density_at_zero(NoiseSpec::of(NoiseLaw::StudentT3)), 4.0 / (std::numbers::pi * std::numbers::pi),
                1e-14);
    EXPECT_NEAR(density_at_zero(NoiseSpec::of(NoiseLaw::GaussMix)), 0.32964096105460305, 1e-12);
}

TEST_P(EachLaw, DensityAtZeroMatchesCdfDifference) {
    const NoiseSpec s = NoiseSpec::of(GetParam());
    // small h: the Laplace kink makes the symmetric quotient biased by O(h)
    const double h = 1e-7;
    EXPECT_NEAR((cdf(s, h) - cdf(s, -h)) / (2.0 * h), density_at_zero(s), 1e-6);
}

TEST_P(EachLaw, DensityIsSymmetric) {
    const NoiseSpec s = NoiseSpec::of(GetParam());
    for (int k = 0; k < 1000; ++k) {
        const double x = -10.0 + 20.0 * k / 999.0;
        ASSERT_EQ(density(s, x), density(s, -x)) << "x = " << x;
    }
}

TEST_P(EachLaw, CdfIsMonotoneAndCentered) {
    const NoiseSpec s = NoiseSpec::of(GetParam());
    EXPECT_NEAR(cdf(s, 0.0), 0.5, 1e-15);
    double prev = 0.0;
    for (int k = 0; k <= 400; ++k) {
        const double c = cdf(s, -20.0 + 0.1 * k);
        ASSERT_GE(c, prev);
        prev = c;
    }
}

TEST_P(EachLaw, SampledAbsMeanWithinFourSigma) {
    const NoiseSpec s = NoiseSpec::of(GetParam());
    const std::size_t N = 1000000;
    const auto z = sample(s, 42, N);
    double m = 0.0, mean = 0.0;
    for (double v : z) {
        m += std::abs(v);
        mean += v;
    }
    m /= N;
    mean /= N;
    // sd of |zeta| is sqrt(Var - 1); for t3 use the sample sd
    double ss = 0.0;
    for (double v : z) ss += (std::abs(v) - m) * (std::abs(v) - m);
    const double sd_abs = std::sqrt(ss / (N - 1));
    EXPECT_LT(std::abs(m - 1.0), 4.0 * sd_abs / std::sqrt(double(N)));
    double ss0 = 0.0;
    for (double v : z) ss0 += v * v;
    EXPECT_LT(std::abs(mean), 4.0 * std::sqrt(ss0 / N) / std::sqrt(double(N)));
}

TEST(Noise, LaplaceSampleMeanAbsInSpecWindow) {
    const auto z = sample(NoiseSpec::of(NoiseLaw::Laplace), 42, 1000000);
    double m = 0.0;
    for (double v : z) m += std::abs(v);
    m /= z.size();
    EXPECT_GE(m, 0.996);
    EXPECT_LE(m, 1.004);
}

TEST(Noise, MixtureSampleVarianceWithinOnePercent) {
    const NoiseSpec s = NoiseSpec::of(NoiseLaw::GaussMix);
    const auto z = sample(s, 9, 1000000);
    double m = 0.0, ss = 0.0;
    for (double v : z) m += v;
    m /= z.size();
    for (double v : z) ss += (v - m) * (v - m);
    EXPECT_NEAR(ss / (z.size() - 1), variance(s), 0.01 * variance(s));
}

TEST_P(EachLaw, SamplingIsDeterministic) {
    const NoiseSpec s = NoiseSpec::of(GetParam());
    EXPECT_EQ(sample(s, 1234, 1000), sample(s, 1234, 1000));
    EXPECT_NE(sample(s, 1234, 1000), sample(s, 1235, 1000));
}

TEST_P(EachLaw, SymmetricLocationTest) {
    // zeta and -zeta: two-sample comparison of medians via the sign statistic
    const auto z = sample(NoiseSpec::of(GetParam()), 77, 200000);
    std::size_t pos = 0;
    for (double v : z) pos += v > 0.0;
    const double n = static_cast<double>(z.size());
    EXPECT_LT(std::abs(pos - n / 2.0), 4.0 * std::sqrt(n) / 2.0);
}

TEST(Noise, ZeroLengthSampleIsEmpty) { EXPECT_TRUE(sample(NoiseSpec::of(NoiseLaw::Gaussian), 1, 0).empty()); }

TEST(Noise, FractionalMomentMatchesQuadrature) {
    const NoiseSpec s = NoiseSpec::of(NoiseLaw::GaussMix);
    EXPECT_NEAR(abs_moment(s, 1.5), 1.2062761264841524, 1e-10);
    const NoiseSpec g = NoiseSpec::of(NoiseLaw::Gaussian);
    auto f = [&](double x) { return density(g, x); };
    EXPECT_NEAR(abs_moment(g, 0.7), oracle::half_moment(f, 0.7, 60.0), 1e-9);
    EXPECT_TRUE(std::isinf(abs_moment(NoiseSpec::of(NoiseLaw::StudentT3), 3.0)));
}

TEST(Noise, NamesRoundTrip) {
    for (NoiseLaw law : kAllNoiseLaws) EXPECT_EQ(parse_noise_law(to_string(law)), law);
    EXPECT_THROW(parse_noise_law("cauchy"), InputError);
}

TEST(Noise, SeedParsing) {
    EXPECT_EQ(parse_seed("18446744073709551615"), 18446744073709551615ULL);
    EXPECT_THROW(parse_seed("-1"), InputError);
    EXPECT_THROW(parse_seed("12x"), InputError);
    EXPECT_THROW(parse_seed(""), InputError);
}

INSTANTIATE_TEST_SUITE_P(AllLaws, EachLaw, ::testing::ValuesIn(kAllNoiseLaws),
                         [](const auto& info) { return std::string(to_string(info.param)); });
