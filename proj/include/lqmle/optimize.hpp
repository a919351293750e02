#pragma once

// Box-constrained maximisation of the quasi-likelihood by Nelder-Mead direct
// search with multi-start. The Laplacian contrast has kinks wherever
// X_t = f^_t, so no derivatives are used.

#include "lqmle/contrast.hpp"
#include "lqmle/errors.hpp"
#include "lqmle/model_spec.hpp"
#include "lqmle/results.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace lqmle {

struct OptimConfig {
    int n_starts = 5;
    std::size_t max_evals = 0; // per start; 0 means 20000 * d
    double simplex_tol = 1e-10; // contrast spread, relative to max(1, |contrast|)
    double param_tol = 1e-6;    // simplex diameter in parameter units
    std::uint64_t seed = 0;
    int restarts = 2;           // fresh-simplex restarts from the best vertex
    double initial_step = 0.1;  // initial simplex edge as a fraction of the box width

    void validate() const {
        if (n_starts < 1) throw InputError("optim.n_starts must be >= 1");
        if (!(simplex_tol > 0.0)) throw InputError("optim.simplex_tol must be > 0");
        if (!(param_tol > 0.0)) throw InputError("optim.param_tol must be > 0");
        if (restarts < 0) throw InputError("optim.restarts must be >= 0");
        if (!(initial_step > 0.0 && initial_step <= 1.0)) throw InputError("optim.initial_step must be in (0, 1]");
    }
};

struct LocalSearchResult {
    std::vector<double> x;
    double value = -std::numeric_limits<double>::infinity();
    std::size_t evals = 0;
    bool converged = false;
};

namespace detail {

inline double radical_inverse(std::uint64_t index, std::uint64_t base) noexcept {
    double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
    while (index > 0) {
        r += f * static_cast<double>(index % base);
        index /= base;
        f *= inv;
    }
    return r;
}

inline constexpr std::array<std::uint64_t, 16> kPrimes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

} // namespace detail

/// Start points: the box centre followed by Halton points whose index offset
/// is derived from `seed`.
inline std::vector<std::vector<double>> start_points(const ParamBox& box, int count, std::uint64_t seed) {
    std::vector<std::vector<double>> out;
    out.push_back(box.center());
    const std::uint64_t offset = 1 + seed % 1024;
    for (int k = 1; k < count; ++k) {
        std::vector<double> x(box.size());
        for (std::size_t i = 0; i < box.size(); ++i) {
            const double h = detail::radical_inverse(offset + static_cast<std::uint64_t>(k),
                                                     detail::kPrimes[i % detail::kPrimes.size()]);
            x[i] = box.lower[i] + h * box.width(i);
        }
        out.push_back(std::move(x));
    }
    return out;
}

/// Maximises `objective` over `box` from `x0`. Proposals outside the box are
/// clamped onto it. Uses the dimension-adaptive coefficients of Gao and Han.
template <class Objective>
LocalSearchResult nelder_mead(Objective&& objective, const ParamBox& box, std::span<const double> x0,
                              double step_fraction, std::size_t max_evals, double simplex_tol, double param_tol) {
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < box.size(); ++i)
        if (box.width(i) > 0.0) free.push_back(i);
    const std::size_t n = free.size();

    LocalSearchResult res;
    res.x = box.project(x0);
    auto eval = [&](const std::vector<double>& x) {
        ++res.evals;
        return -objective(std::span<const double>(x)); // minimise the negative
    };
    if (n == 0) {
        res.value = -eval(res.x);
        res.converged = true;
        return res;
    }

    const double dn = static_cast<double>(n);
    const double c_reflect = 1.0, c_expand = 1.0 + 2.0 / dn;
    const double c_contract = 0.75 - 0.5 / dn, c_shrink = 1.0 - 1.0 / dn;

    std::vector<std::vector<double>> simplex(n + 1, res.x);
    std::vector<double> g(n + 1);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = free[k];
        double step = step_fraction * box.width(i);
        if (simplex[k + 1][i] + step > box.upper[i]) step = -step;
        simplex[k + 1][i] += step;
        simplex[k + 1] = box.project(simplex[k + 1]);
    }
    for (std::size_t k = 0; k <= n; ++k) g[k] = eval(simplex[k]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(box.size()), trial(box.size()), trial2(box.size());
    auto affine = [&](const std::vector<double>& from, const std::vector<double>& to, double t, std::vector<double>& out) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = from[i] + t * (to[i] - from[i]);
        out = box.project(out);
    };

    while (true) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return g[a] < g[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

        const double spread = g[worst] - g[best];
        double diameter = 0.0;
        for (std::size_t k = 0; k <= n; ++k)
            for (std::size_t i : free) diameter = std::max(diameter, std::abs(simplex[k][i] - simplex[best][i]));
        const double scale = std::max(1.0, std::abs(g[best]));
        if (std::isfinite(g[best]) && spread <= simplex_tol * scale && diameter <= param_tol) {
            res.converged = true;
            break;
        }
        if (res.evals >= max_evals) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < centroid.size(); ++i) centroid[i] += simplex[order[k]][i] / dn;

        affine(centroid, simplex[worst], -c_reflect, trial);
        const double g_reflect = eval(trial);
        if (g_reflect < g[best]) {
            affine(centroid, simplex[worst], -c_reflect * c_expand, trial2);
            const double g_expand = eval(trial2);
            if (g_expand < g_reflect) {
                simplex[worst] = trial2;
                g[worst] = g_expand;
            } else {
                simplex[worst] = trial;
                g[worst] = g_reflect;
            }
            continue;
        }
        if (g_reflect < g[second]) {
            simplex[worst] = trial;
            g[worst] = g_reflect;
            continue;
        }
        bool shrink = false;
        if (g_reflect < g[worst]) {
            affine(centroid, trial, c_contract, trial2);
            const double g_contract = eval(trial2);
            if (g_contract <= g_reflect) {
                simplex[worst] = trial2;
                g[worst] = g_contract;
            } else {
                shrink = true;
            }
        } else {
            affine(centroid, simplex[worst], c_contract, trial2);
            const double g_contract = eval(trial2);
            if (g_contract < g[worst]) {
                simplex[worst] = trial2;
                g[worst] = g_contract;
            } else {
                shrink = true;
            }
        }
        if (shrink) {
            for (std::size_t k = 0; k <= n; ++k) {
                if (k == best) continue;
                affine(simplex[best], simplex[k], c_shrink, simplex[k]);
                g[k] = eval(simplex[k]);
            }
        }
    }
    const std::size_t best =
        static_cast<std::size_t>(std::min_element(g.begin(), g.end()) - g.begin());
    res.x = simplex[best];
    res.value = -g[best];
    return res;
}

/// Nelder-Mead followed by restarts with a fresh, smaller simplex around the
/// best point until a restart no longer improves the objective.
template <class Objective>
LocalSearchResult local_maximize(Objective&& objective, const ParamBox& box, std::span<const double> x0,
                                 const OptimConfig& cfg, std::size_t max_evals) {
    LocalSearchResult best = nelder_mead(objective, box, x0, cfg.initial_step, max_evals, cfg.simplex_tol, cfg.param_tol);
    double step = cfg.initial_step;
    for (int r = 0; r < cfg.restarts && best.evals < max_evals; ++r) {
        step *= 0.25;
        LocalSearchResult next = nelder_mead(objective, box, best.x, step, max_evals - best.evals, cfg.simplex_tol,
                                             cfg.param_tol);
        const std::size_t evals = best.evals + next.evals;
        const double gain = next.value - best.value;
        if (next.value > best.value) {
            best.x = std::move(next.x);
            best.value = next.value;
        }
        best.converged = next.converged;
        best.evals = evals;
        if (gain <= cfg.simplex_tol * std::max(1.0, std::abs(best.value))) break;
    }
    return best;
}

/// theta^_n = argmax over the box of the quasi-likelihood: best of
/// cfg.n_starts local searches, lowest start index winning exact ties.
inline EstimateResult fit(const Contrast& contrast, const ModelSpec& spec, std::span<const double> data,
                          const OptimConfig& cfg = {}) {
    spec.validate();
    cfg.validate();
    require_finite_data(data);
    const std::size_t d = spec.dim();
    if (data.size() < 10 * std::max<std::size_t>(d, 1))
        throw InputError("fit: need at least 10 * d = " + std::to_string(10 * d) + " observations, got " +
                         std::to_string(data.size()));
    if (!(contrast.scale_ratio > 0.0)) throw InputError("fit: contrast scale ratio must be positive");

    auto objective = [&](std::span<const double> theta) {
        const double v = detail::quasi_loglik_unchecked(contrast, spec, theta, data);
        if (std::isnan(v)) {
            std::ostringstream os;
            os << spec.tag() << ": contrast is NaN at theta = (";
            for (std::size_t i = 0; i < theta.size(); ++i) os << (i ? ", " : "") << theta[i];
            os << ")";
            throw NumericError(os.str());
        }
        return v;
    };

    const std::size_t max_evals = cfg.max_evals ? cfg.max_evals : 20000 * std::max<std::size_t>(d, 1);
    EstimateResult out;
    out.names = spec.names();
    out.contrast = contrast;
    out.n = data.size();
    out.contrast_value = -std::numeric_limits<double>::infinity();
    const auto starts = start_points(spec.box, cfg.n_starts, cfg.seed);
    for (std::size_t k = 0; k < starts.size(); ++k) {
        const LocalSearchResult r = local_maximize(objective, spec.box, starts[k], cfg, max_evals);
        out.n_evals += r.evals;
        if (r.value > out.contrast_value) {
            out.contrast_value = r.value;
            out.theta_hat = r.x;
            out.converged = r.converged;
            out.start_index = static_cast<int>(k);
        }
    }
    if (out.theta_hat.empty()) { // every start evaluated to -inf
        out.theta_hat = starts.front();
        out.converged = false;
    }
    return out;
}

} // namespace lqmle
