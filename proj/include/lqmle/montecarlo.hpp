#pragma once

// Replicated simulate-then-fit experiments and their RMSE tables.

#include "lqmle/contrast.hpp"
#include "lqmle/errors.hpp"
#include "lqmle/model_spec.hpp"
#include "lqmle/noise.hpp"
#include "lqmle/optimize.hpp"
#include "lqmle/rng.hpp"
#include "lqmle/simulate.hpp"
#include "lqmle/stationarity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace lqmle {

inline unsigned default_workers() noexcept { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs task(i) for i in [0, count) on up to `workers` threads. Tasks are
/// claimed from a shared counter, so completion order is arbitrary; callers
/// write into slot i and reduce afterwards. The first exception is rethrown.
inline void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        while (!stop.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                stop = true;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    }
    if (error) std::rethrow_exception(error);
}

/// Componentwise sqrt(mean (theta^_i - theta0_i)^2).
inline std::vector<double> rmse(const std::vector<std::vector<double>>& estimates, std::span<const double> theta0) {
    if (estimates.empty()) throw InputError("rmse: empty estimate list");
    std::vector<double> out(theta0.size(), 0.0);
    for (const auto& e : estimates) {
        if (e.size() != theta0.size())
            throw InputError("rmse: estimate of dimension " + std::to_string(e.size()) + ", expected " +
                             std::to_string(theta0.size()));
        for (std::size_t i = 0; i < e.size(); ++i) out[i] += (e[i] - theta0[i]) * (e[i] - theta0[i]);
    }
    for (double& v : out) v = std::sqrt(v / static_cast<double>(estimates.size()));
    return out;
}

inline constexpr double kUnreliableFailureShare = 0.2;

struct ExperimentConfig {
    ModelSpec model;
    std::vector<double> theta0;
    std::vector<NoiseLaw> noises{NoiseLaw::Laplace};
    std::vector<std::size_t> sizes{1000};
    int replications = 200;
    std::vector<ContrastKind> contrasts{ContrastKind::GaussianQL, ContrastKind::LaplacianQL};
    std::uint64_t seed = 0;
    OptimConfig optim;
    std::size_t burn_in = kDefaultBurnIn;
    bool calibrate_gaussian = true; // Gaussian contrast uses M' = sigma_zeta M

    void validate() const {
        model.validate();
        optim.validate();
        if (replications < 1) throw InputError("replications must be >= 1");
        if (noises.empty()) throw InputError("noises must not be empty");
        if (contrasts.empty()) throw InputError("contrasts must not be empty");
        if (sizes.empty()) throw InputError("sizes must not be empty");
        for (std::size_t k = 0; k < sizes.size(); ++k) {
            if (sizes[k] < 1) throw InputError("sizes must be positive");
            if (k > 0 && sizes[k] <= sizes[k - 1]) throw InputError("sizes must be strictly ascending");
        }
        require_in_box(model, theta0);
        for (NoiseLaw law : noises) {
            const SimulationGate gate = simulation_gate(model, theta0, NoiseSpec::of(law));
            if (!gate.ok)
                throw StationarityError(model.tag() + " under " + std::string(to_string(law)) +
                                        " noise: theta0 rejected: " + gate.reason);
        }
    }
};

/// One fitted replication. `failed` covers both non-convergence and fits
/// that raised a numeric error.
struct ReplicationRecord {
    NoiseLaw noise = NoiseLaw::Laplace;
    std::size_t n = 0;
    ContrastKind contrast = ContrastKind::LaplacianQL;
    int rep = 0;
    std::vector<double> theta_hat;
    bool failed = false;
    std::string error;
};

struct RmseRow {
    std::string model;
    std::string component;
    std::size_t n = 0;
    NoiseLaw noise = NoiseLaw::Laplace;
    ContrastKind contrast = ContrastKind::LaplacianQL;
    double rmse = 0.0;
    int reps = 0;
    int failures = 0;

    bool unreliable() const noexcept {
        return reps > 0 && static_cast<double>(failures) > kUnreliableFailureShare * static_cast<double>(reps);
    }
};

struct RmseTable {
    std::vector<RmseRow> rows;

    const RmseRow* find(std::string_view component, std::size_t n, NoiseLaw noise, ContrastKind contrast) const {
        for (const auto& r : rows)
            if (r.component == component && r.n == n && r.noise == noise && r.contrast == contrast) return &r;
        return nullptr;
    }
};

struct ExperimentResult {
    RmseTable table;
    std::vector<ReplicationRecord> records; // ordered by (noise, n, rep, contrast)
};

inline Contrast experiment_contrast(ContrastKind kind, NoiseLaw law, bool calibrate) {
    if (kind == ContrastKind::LaplacianQL) return Contrast::laplacian();
    return Contrast::gaussian(calibrate ? std::sqrt(variance(NoiseSpec::of(law))) : 1.0);
}

/// Seed of replication `rep` at (noise, n): a pure function of the indices,
/// so results do not depend on scheduling.
inline std::uint64_t replication_seed(std::uint64_t seed, NoiseLaw law, std::size_t n, int rep) {
    return stream_seed(seed, {static_cast<std::uint64_t>(law), static_cast<std::uint64_t>(n),
                              static_cast<std::uint64_t>(rep)});
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned workers = default_workers()) {
    cfg.validate();
    const std::size_t n_contrasts = cfg.contrasts.size();
    const auto reps = static_cast<std::size_t>(cfg.replications);
    const std::size_t n_tasks = cfg.noises.size() * cfg.sizes.size() * reps;
    std::vector<ReplicationRecord> records(n_tasks * n_contrasts);

    parallel_for(n_tasks, workers, [&](std::size_t task) {
        const std::size_t rep = task % reps;
        const std::size_t size_idx = (task / reps) % cfg.sizes.size();
        const std::size_t noise_idx = task / (reps * cfg.sizes.size());
        const NoiseLaw law = cfg.noises[noise_idx];
        const std::size_t n = cfg.sizes[size_idx];
        const auto seed = replication_seed(cfg.seed, law, n, static_cast<int>(rep));
        Trajectory traj;
        std::string sim_error;
        try {
            traj = simulate(cfg.model, cfg.theta0, NoiseSpec::of(law), n, seed, cfg.burn_in);
        } catch (const NumericError& e) {
            sim_error = e.what();
        }
        for (std::size_t c = 0; c < n_contrasts; ++c) {
            ReplicationRecord& rec = records[task * n_contrasts + c];
            rec.noise = law;
            rec.n = n;
            rec.contrast = cfg.contrasts[c];
            rec.rep = static_cast<int>(rep);
            if (!sim_error.empty()) {
                rec.failed = true;
                rec.error = sim_error;
                continue;
            }
            try {
                const EstimateResult r =
                    fit(experiment_contrast(cfg.contrasts[c], law, cfg.calibrate_gaussian), cfg.model, traj.data, cfg.optim);
                rec.theta_hat = r.theta_hat;
                rec.failed = !r.converged;
                if (rec.failed) rec.error = "not converged";
            } catch (const NumericError& e) {
                rec.failed = true;
                rec.error = e.what();
            }
        }
    });

    ExperimentResult out;
    const auto names = cfg.model.names();
    const std::string tag = cfg.model.tag();
    for (std::size_t noise_idx = 0; noise_idx < cfg.noises.size(); ++noise_idx)
        for (std::size_t size_idx = 0; size_idx < cfg.sizes.size(); ++size_idx)
            for (std::size_t c = 0; c < n_contrasts; ++c) {
                std::vector<std::vector<double>> ok;
                int failures = 0;
                for (std::size_t rep = 0; rep < reps; ++rep) {
                    const std::size_t task = (noise_idx * cfg.sizes.size() + size_idx) * reps + rep;
                    const ReplicationRecord& rec = records[task * n_contrasts + c];
                    if (rec.failed) ++failures;
                    else ok.push_back(rec.theta_hat);
                }
                std::vector<double> values(names.size(), std::nan(""));
                if (!ok.empty()) values = rmse(ok, cfg.theta0);
                for (std::size_t i = 0; i < names.size(); ++i)
                    out.table.rows.push_back({tag, names[i], cfg.sizes[size_idx], cfg.noises[noise_idx],
                                              cfg.contrasts[c], values[i], cfg.replications, failures});
            }
    out.records = std::move(records);
    return out;
}

} // namespace lqmle
