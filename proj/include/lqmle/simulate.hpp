#pragma once

#include "lqmle/errors.hpp"
#include "lqmle/model_spec.hpp"
#include "lqmle/noise.hpp"
#include "lqmle/recursion.hpp"
#include "lqmle/rng.hpp"
#include "lqmle/stationarity.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lqmle {

inline constexpr std::size_t kDefaultBurnIn = 500;

struct Trajectory {
    std::vector<double> data;        // X_1..X_n
    std::vector<double> innovations; // the zeta_t that generated data
    std::uint64_t seed = 0;
    std::size_t burn_in = 0;
    std::string model_tag;
    std::string noise_tag;

    std::size_t n() const noexcept { return data.size(); }
};

/// Iterates X_t = M^_t zeta_t + f^_t from the zero-initialised past for
/// burn_in + n steps and keeps the last n.
inline Trajectory simulate(const ModelSpec& spec, std::span<const double> theta, const NoiseSpec& noise,
                           std::size_t n, std::uint64_t seed, std::size_t burn_in = kDefaultBurnIn) {
    if (n < 1) throw InputError("simulate: n must be at least 1");
    require_in_box(spec, theta);
    const SimulationGate gate = simulation_gate(spec, theta, noise);
    if (!gate.ok) throw StationarityError(spec.tag() + ": refusing to simulate a non-stationary recursion: " + gate.reason);

    Engine gen = make_engine(seed);
    NoiseSampler draw(noise);
    const std::size_t total = burn_in + n;
    Recursion rec(spec, theta, total);
    Trajectory out;
    out.data.reserve(n);
    out.innovations.reserve(n);
    for (std::size_t t = 0; t < total; ++t) {
        const double z = draw(gen);
        const Conditional& c = rec.current();
        const double x = c.scale * z + c.location;
        if (!std::isfinite(x))
            throw NumericError(spec.tag() + ": non-finite value at simulation step " + std::to_string(t + 1) +
                               " (location " + std::to_string(c.location) + ", scale " + std::to_string(c.scale) + ")");
        rec.push(x);
        if (t >= burn_in) {
            out.data.push_back(x);
            out.innovations.push_back(z);
        }
    }
    out.seed = seed;
    out.burn_in = burn_in;
    out.model_tag = spec.tag();
    out.noise_tag = std::string(to_string(noise.law));
    return out;
}

} // namespace lqmle
