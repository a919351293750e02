#pragma once

// JSON configuration documents. Every validation failure is a ConfigError
// carrying the JSON path of the offending key.

#include "lqmle/contrast.hpp"
#include "lqmle/errors.hpp"
#include "lqmle/model_spec.hpp"
#include "lqmle/montecarlo.hpp"
#include "lqmle/noise.hpp"
#include "lqmle/optimize.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace lqmle {

using Json = nlohmann::json;

namespace config {

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline const Json* find(const Json& obj, const std::string& key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

inline const Json& require(const Json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    const Json* v = find(obj, key);
    if (!v) throw ConfigError(join(path, key), "missing required key");
    return *v;
}

inline double as_number(const Json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    return v.get<double>();
}

inline std::int64_t as_integer(const Json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
    return v.get<std::int64_t>();
}

inline std::string as_string(const Json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path, "expected a string");
    return v.get<std::string>();
}

inline bool as_bool(const Json& v, const std::string& path) {
    if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
    return v.get<bool>();
}

inline std::uint64_t as_seed(const Json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    if (v.is_string()) {
        try {
            return parse_seed(v.get<std::string>());
        } catch (const InputError& e) {
            throw ConfigError(path, e.what());
        }
    }
    throw ConfigError(path, "expected a nonnegative integer seed");
}

template <class T, class Read>
T optional(const Json& obj, const std::string& key, const std::string& path, T fallback, Read read) {
    const Json* v = obj.is_object() ? find(obj, key) : nullptr;
    return v ? read(*v, join(path, key)) : fallback;
}

inline int as_int(const Json& v, const std::string& path) { return static_cast<int>(as_integer(v, path)); }

// Re-throws library validation errors as ConfigErrors located at `path`.
template <class F>
auto located(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const InputError& e) {
        throw ConfigError(path, e.what());
    } catch (const ConstraintError& e) {
        throw ConfigError(path, e.what());
    }
}

/// Reads a parameter-shaped value: either an array in layout order or an
/// object keyed by component name.
inline std::vector<double> parameter_vector(const Json& v, const std::vector<std::string>& names, const std::string& path) {
    std::vector<double> out(names.size());
    if (v.is_array()) {
        if (v.size() != names.size())
            throw ConfigError(path, "expected " + std::to_string(names.size()) + " values, got " + std::to_string(v.size()));
        for (std::size_t i = 0; i < names.size(); ++i) out[i] = as_number(v[i], path + "[" + std::to_string(i) + "]");
        return out;
    }
    if (v.is_object()) {
        for (const auto& [key, _] : v.items())
            if (std::find(names.begin(), names.end(), key) == names.end())
                throw ConfigError(join(path, key), "unknown parameter component");
        for (std::size_t i = 0; i < names.size(); ++i) out[i] = as_number(require(v, names[i], path), join(path, names[i]));
        return out;
    }
    throw ConfigError(path, "expected an array or an object of parameter values");
}

} // namespace config

/// "model": {"family": "arma", "p": 1, "q": 1, "p2": 0, "q2": 0,
///           "truncation": 200, "estimate_scale": false, "fixed_scale": 1,
///           "box": {"lower": [...], "upper": [...]} or {"name": [lo, hi], ...}}
inline ModelSpec parse_model(const Json& j, const std::string& path = "model") {
    using namespace config;
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    const std::string fam_path = join(path, "family");
    const Family family = located(fam_path, [&] { return parse_family(as_string(require(j, "family", path), fam_path)); });
    const int p = optional(j, "p", path, 0, as_int);
    const int q = optional(j, "q", path, 0, as_int);
    const int p2 = optional(j, "p2", path, 0, as_int);
    const int q2 = optional(j, "q2", path, 0, as_int);
    for (auto [key, v] : {std::pair{"p", p}, {"q", q}, {"p2", p2}, {"q2", q2}})
        if (v < 0) throw ConfigError(join(path, key), "order must be nonnegative");
    ModelSpec spec = family == Family::Arma ? ModelSpec::arma(p, q, optional(j, "estimate_scale", path, false, as_bool))
                                            : ModelSpec::make(family, p, q, p2, q2);
    spec.truncation = optional(j, "truncation", path, spec.truncation, as_int);
    spec.fixed_scale = optional(j, "fixed_scale", path, spec.fixed_scale, as_number);
    if (const Json* box = find(j, "box")) {
        const std::string bp = join(path, "box");
        const auto names = spec.names();
        if (!box->is_object()) throw ConfigError(bp, "expected an object");
        if (find(*box, "lower") || find(*box, "upper")) {
            spec.box.lower = parameter_vector(require(*box, "lower", bp), names, join(bp, "lower"));
            spec.box.upper = parameter_vector(require(*box, "upper", bp), names, join(bp, "upper"));
        } else {
            for (const auto& [key, value] : box->items()) {
                const auto it = std::find(names.begin(), names.end(), key);
                if (it == names.end()) throw ConfigError(join(bp, key), "unknown parameter component");
                if (!value.is_array() || value.size() != 2) throw ConfigError(join(bp, key), "expected [lower, upper]");
                const auto i = static_cast<std::size_t>(it - names.begin());
                spec.box.lower[i] = as_number(value[0], join(bp, key) + "[0]");
                spec.box.upper[i] = as_number(value[1], join(bp, key) + "[1]");
            }
        }
    }
    located(path, [&] { spec.validate(); });
    return spec;
}

inline std::vector<double> parse_theta(const Json& j, const ModelSpec& spec, const std::string& path = "theta") {
    std::vector<double> theta = config::parameter_vector(j, spec.names(), path);
    config::located(path, [&] { require_in_box(spec, theta); });
    return theta;
}

inline OptimConfig parse_optim(const Json& j, const std::string& path = "optim") {
    using namespace config;
    OptimConfig c;
    if (j.is_null()) return c;
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    c.n_starts = optional(j, "n_starts", path, c.n_starts, as_int);
    const std::int64_t evals = optional(j, "max_evals", path, std::int64_t{0}, as_integer);
    if (evals < 0) throw ConfigError(join(path, "max_evals"), "must be positive");
    c.max_evals = static_cast<std::size_t>(evals);
    c.simplex_tol = optional(j, "simplex_tol", path, c.simplex_tol, as_number);
    c.param_tol = optional(j, "param_tol", path, c.param_tol, as_number);
    c.seed = optional(j, "seed", path, c.seed, as_seed);
    c.restarts = optional(j, "restarts", path, c.restarts, as_int);
    c.initial_step = optional(j, "initial_step", path, c.initial_step, as_number);
    try {
        c.validate();
    } catch (const InputError& e) {
        std::string msg = e.what();
        const std::string key = msg.substr(0, msg.find(' '));
        throw ConfigError(key, msg);
    }
    return c;
}

inline NoiseLaw parse_noise(const Json& j, const std::string& path) {
    return config::located(path, [&] { return parse_noise_law(config::as_string(j, path)); });
}

inline std::vector<NoiseLaw> parse_noises(const Json& root) {
    using namespace config;
    if (const Json* one = find(root, "noise")) return {parse_noise(*one, "noise")};
    const Json& list = require(root, "noises", "");
    if (!list.is_array() || list.empty()) throw ConfigError("noises", "expected a nonempty array of noise names");
    std::vector<NoiseLaw> out;
    for (std::size_t i = 0; i < list.size(); ++i) out.push_back(parse_noise(list[i], "noises[" + std::to_string(i) + "]"));
    return out;
}

/// "sizes": [n1, n2, ...] (or a single integer), each >= 1 and ascending.
inline std::vector<std::size_t> parse_sizes(const Json& root) {
    using namespace config;
    const Json& v = require(root, "sizes", "");
    std::vector<std::size_t> out;
    auto one = [&](const Json& x, const std::string& path) {
        const std::int64_t n = as_integer(x, path);
        if (n < 1) throw ConfigError(path, "sample size must be at least 1, got " + std::to_string(n));
        if (!out.empty() && static_cast<std::size_t>(n) <= out.back()) throw ConfigError(path, "sizes must be strictly ascending");
        out.push_back(static_cast<std::size_t>(n));
    };
    if (v.is_array()) {
        if (v.empty()) throw ConfigError("sizes", "expected at least one sample size");
        for (std::size_t i = 0; i < v.size(); ++i) one(v[i], "sizes[" + std::to_string(i) + "]");
    } else {
        one(v, "sizes");
    }
    return out;
}

inline std::vector<ContrastKind> parse_contrasts(const Json& root) {
    using namespace config;
    const Json* v = find(root, "contrasts");
    if (!v) return {ContrastKind::GaussianQL, ContrastKind::LaplacianQL};
    if (!v->is_array() || v->empty()) throw ConfigError("contrasts", "expected a nonempty array of contrast names");
    std::vector<ContrastKind> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
        const std::string path = "contrasts[" + std::to_string(i) + "]";
        out.push_back(located(path, [&] { return parse_contrast_kind(as_string((*v)[i], path)); }));
    }
    return out;
}

inline ExperimentConfig parse_experiment(const Json& root) {
    using namespace config;
    ExperimentConfig c;
    c.model = parse_model(require(root, "model", ""));
    c.theta0 = parse_theta(require(root, "theta", ""), c.model);
    c.noises = parse_noises(root);
    c.sizes = parse_sizes(root);
    c.replications = optional(root, "replications", "", c.replications, as_int);
    if (c.replications < 1) throw ConfigError("replications", "must be at least 1");
    c.contrasts = parse_contrasts(root);
    c.seed = optional(root, "seed", "", c.seed, as_seed);
    c.optim = parse_optim(find(root, "optim") ? root["optim"] : Json());
    const std::int64_t burn = optional(root, "burn_in", "", static_cast<std::int64_t>(c.burn_in), as_integer);
    if (burn < 0) throw ConfigError("burn_in", "must be nonnegative");
    c.burn_in = static_cast<std::size_t>(burn);
    c.calibrate_gaussian = optional(root, "calibrate_gaussian", "", c.calibrate_gaussian, as_bool);
    try {
        c.validate();
    } catch (const StationarityError& e) {
        throw ConfigError("theta", e.what());
    }
    return c;
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("<root>", "'" + path + "' is not valid JSON: " + e.what());
    }
}

/// Stable 64-bit FNV-1a digest of the canonical serialisation. Objects are
/// key-sorted, so the digest does not depend on key order in the file.
inline std::string config_digest(const Json& j) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Applies "a.b.c=value" style overrides; the value is parsed as JSON when
/// possible and taken as a string otherwise.
inline void apply_override(Json& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like key=value");
    const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    Json value;
    try {
        value = Json::parse(text);
    } catch (const Json::parse_error&) {
        value = text;
    }
    std::string pointer;
    std::stringstream ss(key);
    for (std::string part; std::getline(ss, part, '.');) pointer += "/" + part;
    root[Json::json_pointer(pointer)] = std::move(value);
}

} // namespace lqmle
