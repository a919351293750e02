#include "lqmle/simulate.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace lqmle;

namespace {

// Mean and batch-means standard error (robust to serial dependence).
std::pair<double, double> mean_and_se(const std::vector<double>& v, std::size_t batches = 100) {
    const std::size_t len = v.size() / batches;
    std::vector<double> means(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
        for (std::size_t i = 0; i < len; ++i) means[b] += v[b * len + i];
        means[b] /= len;
    }
    double m = 0.0;
    for (double x : means) m += x;
    m /= batches;
    double ss = 0.0;
    for (double x : means) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / (batches - 1) / batches)};
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

} // namespace

TEST(Simulate, ArchSecondMoment) {
    const auto s = ModelSpec::arch(1);
    const std::vector<double> theta{0.4, 0.2};
    const auto tr = simulate(s, theta, NoiseSpec::of(NoiseLaw::Laplace), 100000, 2024);
    std::vector<double> sq(tr.data.size());
    std::transform(tr.data.begin(), tr.data.end(), sq.begin(), [](double x) { return x * x; });
    const auto [m, se] = mean_and_se(sq);
    const double expected = 0.4 * 2.0 / (1.0 - 0.2 * 2.0);
    EXPECT_NEAR(expected, 1.3333333333, 1e-9);
    EXPECT_LT(std::abs(m - expected), 3.0 * se) << "mean " << m << " se " << se;
}

TEST(Simulate, GarchVarianceGaussianNoise) {
    const auto s = ModelSpec::garch(1, 1);
    const std::vector<double> theta{0.2, 0.4, 0.2};
    const double s2 = std::numbers::pi / 2.0;
    ASSERT_LT(0.4 * s2 + 0.2, 1.0);
    const auto tr = simulate(s, theta, NoiseSpec::of(NoiseLaw::Gaussian), 200000, 99);
    std::vector<double> sq(tr.data.size());
    std::transform(tr.data.begin(), tr.data.end(), sq.begin(), [](double x) { return x * x; });
    const auto [m, se] = mean_and_se(sq);
    const double expected = 0.2 * s2 / (1.0 - 0.4 * s2 - 0.2);
    EXPECT_LT(std::abs(m - expected), 3.0 * se) << "mean " << m << " expected " << expected << " se " << se;
}

TEST(Simulate, WhiteNoiseHasNoLagOneCorrelation) {
    const auto s = ModelSpec::arma(1, 0);
    const std::vector<double> theta{0.0};
    for (NoiseLaw law : kAllNoiseLaws) {
        const auto tr = simulate(s, theta, NoiseSpec::of(law), 100000, 5);
        double m = 0.0;
        for (double x : tr.data) m += x;
        m /= tr.n();
        double c0 = 0.0, c1 = 0.0;
        for (std::size_t t = 0; t < tr.n(); ++t) {
            c0 += (tr.data[t] - m) * (tr.data[t] - m);
            if (t > 0) c1 += (tr.data[t] - m) * (tr.data[t - 1] - m);
        }
        EXPECT_LT(std::abs(c1 / c0), 3.0 / std::sqrt(double(tr.n()))) << to_string(law);
    }
}

TEST(Simulate, DeterministicInSeed) {
    const auto s = ModelSpec::arma_aparch(1, 1, 1, 1);
    const std::vector<double> theta{1.2, 0.2, 0.4, 0.5, 0.1, 0.4, 0.6};
    const auto noise = NoiseSpec::of(NoiseLaw::StudentT3);
    const auto a = simulate(s, theta, noise, 1000, 77);
    const auto b = simulate(s, theta, noise, 1000, 77);
    const auto c = simulate(s, theta, noise, 1000, 78);
    EXPECT_EQ(a.data, b.data);
    EXPECT_NE(a.data, c.data);
    EXPECT_EQ(a.n(), 1000u);
    EXPECT_EQ(a.model_tag, "arma(1,1)-aparch(1,1)");
    EXPECT_EQ(a.noise_tag, "student3");
    for (double x : a.data) ASSERT_TRUE(std::isfinite(x));
}

TEST(Simulate, InnovationsAreRecoverable) {
    const auto s = ModelSpec::garch(1, 1);
    const std::vector<double> theta{0.2, 0.4, 0.2};
    const auto tr = simulate(s, theta, NoiseSpec::of(NoiseLaw::Uniform), 500, 3, 0);
    // with no burn-in the estimator's truncation coincides with the simulator's start
    const auto series = conditional_series(s, theta, tr.data);
    for (std::size_t t = 0; t < tr.n(); ++t)
        ASSERT_NEAR((tr.data[t] - series.location[t]) / series.scale[t], tr.innovations[t], 1e-12);
}

TEST(Simulate, BurnInDoesNotChangeTheLaw) {
    const auto s = ModelSpec::arma_garch(1, 1, 1, 1);
    const std::vector<double> theta{0.2, 0.4, 0.1, 0.4, 0.6};
    const auto noise = NoiseSpec::of(NoiseLaw::Laplace);
    std::vector<double> a, b;
    for (std::uint64_t r = 0; r < 10000; ++r) {
        a.push_back(simulate(s, theta, noise, 1, stream_seed(1, {r}), 500).data[0]);
        b.push_back(simulate(s, theta, noise, 1, stream_seed(2, {r}), 1000).data[0]);
    }
    // two-sample Kolmogorov-Smirnov at the 0.1% level
    EXPECT_LT(ks_statistic(a, b), 1.95 * std::sqrt(2.0 / 10000.0));
}

TEST(Simulate, RefusesNonStationaryAndBadInput) {
    auto s = ModelSpec::arma(1, 0);
    s.box = ParamBox{{-1.5}, {1.5}};
    const std::vector<double> unit{1.0};
    EXPECT_THROW(simulate(s, unit, NoiseSpec::of(NoiseLaw::Gaussian), 100, 1), StationarityError);
    const std::vector<double> ok{0.5};
    EXPECT_THROW(simulate(s, ok, NoiseSpec::of(NoiseLaw::Gaussian), 0, 1), InputError);
    const std::vector<double> outside{2.0};
    EXPECT_THROW(simulate(s, outside, NoiseSpec::of(NoiseLaw::Gaussian), 10, 1), ConstraintError);
}
