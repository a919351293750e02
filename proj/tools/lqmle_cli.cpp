// lqmle: simulate, fit, experiment, table, check-stationarity.
//
// Exit codes: 0 success, 1 I/O failure, 2 invalid configuration,
// 3 numeric failure.

#include "lqmle/asymptotics.hpp"
#include "lqmle/config.hpp"
#include "lqmle/io.hpp"
#include "lqmle/montecarlo.hpp"
#include "lqmle/optimize.hpp"
#include "lqmle/simulate.hpp"
#include "lqmle/stationarity.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace lqmle;

namespace {

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
};

using Clock = std::chrono::steady_clock;

Json load_config(const Common& c) {
    Json j = read_json_file(c.config);
    if (!j.is_object()) throw ConfigError("<root>", "configuration must be a JSON object");
    for (const auto& o : c.overrides) apply_override(j, o);
    if (c.seed) j["seed"] = *c.seed;
    return j;
}

std::string output_path(const Common& c, const Json& j) {
    if (!c.out.empty()) return c.out;
    if (const Json* o = config::find(j, "output")) return config::as_string(*o, "output");
    return {};
}

// Writes to `path` with a manifest next to it, or to stdout when no path is set.
void emit(const std::string& path, const std::string& text, RunManifest m, Clock::time_point start) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    write_text(path, text);
    m.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
    write_manifest(path, m);
}

RunManifest manifest(const std::string& command, const Json& j) {
    RunManifest m;
    m.command = command;
    m.config_digest = config_digest(j);
    m.seed = config::optional(j, "seed", "", std::uint64_t{0}, config::as_seed);
    return m;
}

std::string sized_path(const std::string& path, std::size_t n, bool several) {
    if (!several || path.empty()) return path;
    const auto dot = path.find_last_of('.');
    const auto slash = path.find_last_of('/');
    const std::string tag = ".n" + std::to_string(n);
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + tag;
    return path.substr(0, dot) + tag + path.substr(dot);
}

int run_simulate(const Common& c) {
    const auto start = Clock::now();
    const Json j = load_config(c);
    const ModelSpec spec = parse_model(config::require(j, "model", ""));
    const auto theta = parse_theta(config::require(j, "theta", ""), spec);
    const NoiseLaw law = parse_noise(config::require(j, "noise", ""), "noise");
    const auto sizes = parse_sizes(j);
    const auto seed = config::optional(j, "seed", "", std::uint64_t{0}, config::as_seed);
    const auto burn = config::optional(j, "burn_in", "", static_cast<std::int64_t>(kDefaultBurnIn), config::as_integer);
    if (burn < 0) throw ConfigError("burn_in", "must be nonnegative");
    const std::string out = output_path(c, j);
    for (std::size_t n : sizes) {
        Trajectory t;
        try {
            t = simulate(spec, theta, NoiseSpec::of(law), n, replication_seed(seed, law, n, 0),
                         static_cast<std::size_t>(burn));
        } catch (const StationarityError& e) {
            throw ConfigError("theta", e.what());
        }
        emit(sized_path(out, n, sizes.size() > 1), trajectory_csv(t), manifest("simulate", j), start);
    }
    return 0;
}

int run_fit(const Common& c, const std::string& data_flag) {
    const auto start = Clock::now();
    const Json j = load_config(c);
    const ModelSpec spec = parse_model(config::require(j, "model", ""));
    const std::string data_path =
        !data_flag.empty() ? data_flag : config::as_string(config::require(j, "data", ""), "data");
    const auto data = read_series_csv(data_path);
    const std::string kind_name = config::optional(j, "contrast", "", std::string("lql"), config::as_string);
    const ContrastKind kind = config::located("contrast", [&] { return parse_contrast_kind(kind_name); });
    Contrast contrast{kind, config::optional(j, "scale_ratio", "", 1.0, config::as_number), false};
    if (kind == ContrastKind::GaussianQL) {
        if (const Json* noise = config::find(j, "noise"))
            contrast.scale_ratio = std::sqrt(variance(NoiseSpec::of(parse_noise(*noise, "noise"))));
    }
    if (!(contrast.scale_ratio > 0.0)) throw ConfigError("scale_ratio", "must be positive");
    OptimConfig optim = parse_optim(config::find(j, "optim") ? j["optim"] : Json());
    if (const Json* s = config::find(j, "seed")) optim.seed = config::as_seed(*s, "seed");
    const double level = config::optional(j, "level", "", 0.95, config::as_number);
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("level", "must be in (0, 1)");

    EstimateResult r = config::located("data", [&] { return fit(contrast, spec, data, optim); });
    if (config::optional(j, "asymptotics", "", true, config::as_bool)) {
        try {
            attach_asymptotics(r, spec, data, level);
        } catch (const SingularityError& e) {
            r.warnings.push_back(e.what());
        }
    }
    Json out = to_json(r);
    out["model"] = spec.tag();
    emit(output_path(c, j), out.dump(2) + "\n", manifest("fit", j), start);
    return 0;
}

int run_experiment_cmd(const Common& c, unsigned workers) {
    const auto start = Clock::now();
    const Json j = load_config(c);
    const ExperimentConfig cfg = parse_experiment(j);
    const ExperimentResult res = run_experiment(cfg, workers);
    for (const RmseRow& r : res.table.rows)
        if (r.unreliable())
            std::cerr << "warning: " << r.model << " " << r.component << " n=" << r.n << " " << to_string(r.noise) << " "
                      << to_string(r.contrast) << ": " << r.failures << "/" << r.reps << " failed fits\n";
    emit(output_path(c, j), rmse_csv(res.table), manifest("experiment", j), start);
    return 0;
}

int run_table(const std::string& csv, const std::string& out) {
    const auto start = Clock::now();
    const std::string text = read_text(csv);
    const RmseTable table = parse_rmse_csv(text, csv);
    RunManifest m;
    m.command = "table";
    m.config_digest = config_digest(Json(text));
    emit(out, render_table(table), m, start);
    return 0;
}

int run_check(const Common& c) {
    const auto start = Clock::now();
    const Json j = load_config(c);
    const ModelSpec spec = parse_model(config::require(j, "model", ""));
    const double r = config::optional(j, "r", "", 2.0, config::as_number);
    if (!(r >= 1.0)) throw ConfigError("r", "moment order must be at least 1");
    const auto noises = parse_noises(j);
    const Json* theta_json = config::find(j, "theta");
    const std::vector<double> theta = theta_json ? parse_theta(*theta_json, spec) : std::vector<double>{};
    const int grid = config::optional(j, "grid_points", "", 3, config::as_int);
    if (grid < 1) throw ConfigError("grid_points", "must be at least 1");

    std::string text;
    for (NoiseLaw law : noises) {
        const NoiseSpec noise = NoiseSpec::of(law);
        const StationarityReport rep =
            theta_json ? stationarity_check(spec, theta, r, noise) : stationarity_check(spec, spec.box, r, noise, grid);
        char buf[512];
        std::snprintf(buf, sizeof buf,
                      "%smember=%s margin=%.12g direct_margin=%.12g inherited_margin=%.12g sum_f=%.12g sum_m=%.12g "
                      "moment=%.12g\n",
                      noises.size() > 1 ? ("noise=" + std::string(to_string(law)) + " ").c_str() : "",
                      rep.member ? "true" : "false", rep.margin, rep.direct_margin, rep.inherited_margin, rep.sum_f,
                      rep.sum_m, rep.moment);
        text += buf;
    }
    emit(output_path(c, j), text, manifest("check-stationarity", j), start);
    if (!output_path(c, j).empty()) std::cout << text;
    return 0;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("config", c.config, "JSON configuration file")->required();
    sub->add_option("--out", c.out, "output path (default: the config's \"output\" key, else stdout)");
    sub->add_option("--seed", c.seed, "override the top-level seed");
    sub->add_option("--set", c.overrides, "override a config key, e.g. --set sizes=[500] or --set optim.n_starts=3");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laplacian and Gaussian quasi-maximum likelihood estimation for causal affine time series"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    Common sim, fit_args, exp_args, check;
    std::string data_flag, table_csv, table_out;
    unsigned workers = default_workers();

    auto* s_sim = app.add_subcommand("simulate", "simulate trajectories; writes CSV");
    add_common(s_sim, sim);
    auto* s_fit = app.add_subcommand("fit", "fit a model to a trajectory CSV; writes JSON");
    add_common(s_fit, fit_args);
    s_fit->add_option("--data", data_flag, "trajectory CSV (default: the config's \"data\" key)");
    auto* s_exp = app.add_subcommand("experiment", "Monte Carlo RMSE experiment; writes CSV");
    add_common(s_exp, exp_args);
    s_exp->add_option("--workers", workers, "worker threads (default: available parallelism)")
        ->check(CLI::PositiveNumber);
    auto* s_table = app.add_subcommand("table", "render an RMSE CSV as a text table");
    s_table->add_option("csv", table_csv, "RMSE CSV produced by experiment")->required();
    s_table->add_option("--out", table_out, "output path (default: stdout)");
    auto* s_check = app.add_subcommand("check-stationarity", "stationarity margin of a parameter point or box");
    add_common(s_check, check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*s_sim) return run_simulate(sim);
        if (*s_fit) return run_fit(fit_args, data_flag);
        if (*s_exp) return run_experiment_cmd(exp_args, workers);
        if (*s_table) return run_table(table_csv, table_out);
        if (*s_check) return run_check(check);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const InputError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ConstraintError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const StationarityError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const SingularityError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const Json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
