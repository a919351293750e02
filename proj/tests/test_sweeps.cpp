// Monte Carlo properties over the five reference configurations. Slow: each
// test runs one model across all noise laws and n in {100, 1000, 5000}.

#include "lqmle/config.hpp"
#include "lqmle/montecarlo.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

using namespace lqmle;

namespace {

ExperimentConfig load(const std::string& name) {
    return parse_experiment(read_json_file(std::string(LQMLE_CONFIGS) + "/" + name));
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size() / 2;
    return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

// Median over converged replications and components of |theta^_i - theta0_i|.
double median_abs_error(const ExperimentResult& res, const std::vector<double>& theta0, NoiseLaw law, std::size_t n,
                        ContrastKind c) {
    std::vector<double> errs;
    for (const auto& r : res.records)
        if (r.noise == law && r.n == n && r.contrast == c && !r.failed)
            for (std::size_t i = 0; i < theta0.size(); ++i) errs.push_back(std::abs(r.theta_hat[i] - theta0[i]));
    return errs.empty() ? std::nan("") : median(errs);
}

double median_rmse(const RmseTable& t, std::size_t n, NoiseLaw law, ContrastKind c) {
    std::vector<double> v;
    for (const auto& r : t.rows)
        if (r.n == n && r.noise == law && r.contrast == c) v.push_back(r.rmse);
    return median(v);
}

void sweep(const std::string& file) {
    ExperimentConfig cfg = load(file);
    cfg.replications = 100;

    // Laplacian fits for every noise law and size
    ExperimentConfig lql = cfg;
    lql.noises = {kAllNoiseLaws.begin(), kAllNoiseLaws.end()};
    lql.sizes = {100, 1000, 5000};
    lql.contrasts = {ContrastKind::LaplacianQL};
    const ExperimentResult a = run_experiment(lql);

    // Gaussian fits where the two contrasts are compared
    ExperimentConfig gql = cfg;
    gql.noises = {NoiseLaw::StudentT3, NoiseLaw::Gaussian};
    gql.sizes = {1000, 5000};
    gql.contrasts = {ContrastKind::GaussianQL};
    const ExperimentResult b = run_experiment(gql);

    const std::string tag = cfg.model.tag();
    for (NoiseLaw law : kAllNoiseLaws) {
        const double e100 = median_abs_error(a, cfg.theta0, law, 100, ContrastKind::LaplacianQL);
        const double e1000 = median_abs_error(a, cfg.theta0, law, 1000, ContrastKind::LaplacianQL);
        const double e5000 = median_abs_error(a, cfg.theta0, law, 5000, ContrastKind::LaplacianQL);
        EXPECT_TRUE(e100 > e1000 && e1000 > e5000)
            << tag << " " << to_string(law) << ": median |error| " << e100 << " -> " << e1000 << " -> " << e5000;

        const double r100 = median_rmse(a.table, 100, law, ContrastKind::LaplacianQL);
        const double r5000 = median_rmse(a.table, 5000, law, ContrastKind::LaplacianQL);
        EXPECT_LE(r5000, 0.7 * r100) << tag << " " << to_string(law) << ": median RMSE " << r100 << " -> " << r5000;
    }
    for (std::size_t n : {1000u, 5000u}) {
        for (const auto& name : cfg.model.names()) {
            const auto* l = a.table.find(name, n, NoiseLaw::StudentT3, ContrastKind::LaplacianQL);
            const auto* g = b.table.find(name, n, NoiseLaw::StudentT3, ContrastKind::GaussianQL);
            EXPECT_LE(l->rmse, g->rmse) << tag << " t3 n=" << n << " " << name;
            const auto* lg = a.table.find(name, n, NoiseLaw::Gaussian, ContrastKind::LaplacianQL);
            const auto* gg = b.table.find(name, n, NoiseLaw::Gaussian, ContrastKind::GaussianQL);
            EXPECT_LE(std::abs(lg->rmse - gg->rmse), 0.15 * std::max(lg->rmse, gg->rmse))
                << tag << " gaussian n=" << n << " " << name << ": LQL " << lg->rmse << " GQL " << gg->rmse;
        }
    }
}

} // namespace

TEST(Sweep, Arma11) { sweep("arma11.json"); }
TEST(Sweep, Arch1) { sweep("arch1.json"); }
TEST(Sweep, Garch11) { sweep("garch11.json"); }
TEST(Sweep, ArmaGarch) { sweep("arma_garch.json"); }
TEST(Sweep, ArmaAparch) { sweep("arma_aparch.json"); }

TEST(Sweep, ArchLaplaceRmseAtFiveThousand) {
    ExperimentConfig cfg = load("arch1.json");
    cfg.noises = {NoiseLaw::Laplace};
    cfg.sizes = {5000};
    cfg.contrasts = {ContrastKind::LaplacianQL};
    cfg.replications = 200;
    const auto res = run_experiment(cfg);
    // published values 0.009 (omega) and 0.014 (alpha), +-50%
    const double w = res.table.find("omega", 5000, NoiseLaw::Laplace, ContrastKind::LaplacianQL)->rmse;
    const double a = res.table.find("alpha1", 5000, NoiseLaw::Laplace, ContrastKind::LaplacianQL)->rmse;
    EXPECT_GE(w, 0.5 * 0.009);
    EXPECT_LE(w, 1.5 * 0.009);
    EXPECT_GE(a, 0.5 * 0.014);
    EXPECT_LE(a, 1.5 * 0.014);
}
