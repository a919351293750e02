#pragma once

// File formats: trajectory CSV, RMSE CSV, the text table rendered from it,
// fit results as JSON and the run manifest written next to every output.

#include "lqmle/config.hpp"
#include "lqmle/errors.hpp"
#include "lqmle/montecarlo.hpp"
#include "lqmle/results.hpp"
#include "lqmle/simulate.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <tuple>
#include <string>
#include <vector>

namespace lqmle {

inline constexpr const char* kToolVersion = "0.1.0";

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out.flush()) throw IoError("failed writing '" + path + "'");
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- trajectories ----

inline std::string trajectory_csv(const Trajectory& t) {
    std::string out = "# seed=" + std::to_string(t.seed) + " model=" + t.model_tag + " noise=" + t.noise_tag +
                      " burn_in=" + std::to_string(t.burn_in) + "\nx\n";
    for (double x : t.data) out += format_double(x) + "\n";
    return out;
}

/// Reads one column of numbers; '#' lines and a non-numeric header are skipped.
inline std::vector<double> parse_series_csv(const std::string& text, const std::string& source = "<input>") {
    std::vector<double> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::string cell = line.substr(0, line.find(','));
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || ptr != cell.data() + cell.size()) {
            if (!header_seen && out.empty()) {
                header_seen = true;
                continue;
            }
            throw InputError(source + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) throw InputError(source + ": no data rows");
    return out;
}

inline std::vector<double> read_series_csv(const std::string& path) { return parse_series_csv(read_text(path), path); }

// ---- RMSE tables ----

inline constexpr const char* kRmseHeader = "model,component,n,noise,contrast,rmse,reps,failures";

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    return out;
}

} // namespace detail

inline std::string rmse_csv(const RmseTable& table) {
    std::string out = std::string(kRmseHeader) + "\n";
    for (const RmseRow& r : table.rows) {
        out += detail::csv_field(r.model) + "," + detail::csv_field(r.component) + "," + std::to_string(r.n) + "," +
               std::string(to_string(r.noise)) + "," + std::string(to_string(r.contrast)) + "," + format_double(r.rmse) +
               "," + std::to_string(r.reps) + "," + std::to_string(r.failures) + "\n";
    }
    return out;
}

inline RmseTable parse_rmse_csv(const std::string& text, const std::string& source = "<input>") {
    RmseTable table;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1) {
            if (line != kRmseHeader) throw InputError(source + ":1: expected header '" + std::string(kRmseHeader) + "'");
            continue;
        }
        const auto f = detail::split_csv_line(line);
        const std::string where = source + ":" + std::to_string(lineno);
        if (f.size() != 8) throw InputError(where + ": expected 8 columns, got " + std::to_string(f.size()));
        try {
            RmseRow r;
            r.model = f[0];
            r.component = f[1];
            r.n = static_cast<std::size_t>(std::stoull(f[2]));
            r.noise = parse_noise_law(f[3]);
            r.contrast = parse_contrast_kind(f[4]);
            r.rmse = std::stod(f[5]);
            r.reps = std::stoi(f[6]);
            r.failures = std::stoi(f[7]);
            table.rows.push_back(std::move(r));
        } catch (const InputError& e) {
            throw InputError(where + ": " + e.what());
        } catch (const std::logic_error&) {
            throw InputError(where + ": malformed number");
        }
    }
    return table;
}

/// Text grid: one row per (model, component, n), one column pair (GQL, LQL)
/// per noise law, three decimals. Cells flagged unreliable carry a '*'.
inline std::string render_table(const RmseTable& table) {
    std::vector<NoiseLaw> noises;
    std::vector<std::tuple<std::string, std::string, std::size_t>> keys;
    std::map<std::tuple<std::string, std::string, std::size_t, int, int>, const RmseRow*> cells;
    for (const RmseRow& r : table.rows) {
        if (std::find(noises.begin(), noises.end(), r.noise) == noises.end()) noises.push_back(r.noise);
        auto key = std::make_tuple(r.model, r.component, r.n);
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
        cells[{r.model, r.component, r.n, static_cast<int>(r.noise), static_cast<int>(r.contrast)}] = &r;
    }
    std::ostringstream os;
    os << std::left << std::setw(24) << "model" << std::setw(12) << "component" << std::right << std::setw(7) << "n";
    for (NoiseLaw law : noises) os << "  " << std::setw(17) << (std::string(to_string(law)) + " GQL/LQL");
    os << "\n";
    for (const auto& [model, comp, n] : keys) {
        os << std::left << std::setw(24) << model << std::setw(12) << comp << std::right << std::setw(7) << n;
        for (NoiseLaw law : noises) {
            std::string cell;
            for (ContrastKind c : {ContrastKind::GaussianQL, ContrastKind::LaplacianQL}) {
                const auto it = cells.find({model, comp, n, static_cast<int>(law), static_cast<int>(c)});
                std::string v = "-";
                if (it != cells.end()) {
                    char buf[32];
                    std::snprintf(buf, sizeof buf, "%.3f", it->second->rmse);
                    v = buf;
                    if (it->second->unreliable()) v += "*";
                }
                cell += (cell.empty() ? "" : "/") + v;
            }
            os << "  " << std::setw(17) << cell;
        }
        os << "\n";
    }
    return os.str();
}

// ---- fit results ----

inline Json to_json(const EstimateResult& r) {
    Json j;
    j["contrast"] = std::string(to_string(r.contrast.kind));
    j["scale_ratio"] = r.contrast.scale_ratio;
    j["names"] = r.names;
    Json theta = Json::object();
    for (std::size_t i = 0; i < r.names.size(); ++i) theta[r.names[i]] = r.theta_hat[i];
    j["theta_hat"] = theta;
    j["contrast_value"] = r.contrast_value;
    j["n_evals"] = r.n_evals;
    j["converged"] = r.converged;
    j["start_index"] = r.start_index;
    j["n"] = r.n;
    auto matrix = [](const Eigen::MatrixXd& m) {
        Json rows = Json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            Json row = Json::array();
            for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
            rows.push_back(row);
        }
        return rows;
    };
    if (r.sandwich) {
        j["gamma_f"] = matrix(r.sandwich->gamma_f);
        j["gamma_m"] = matrix(r.sandwich->gamma_m);
        j["g0_hat"] = r.sandwich->g0_hat;
        j["sigma2_hat"] = r.sandwich->sigma2_hat;
        j["covariance"] = matrix(r.sandwich->covariance);
    }
    if (!r.intervals.empty()) {
        Json ci = Json::object();
        for (std::size_t i = 0; i < r.names.size(); ++i) ci[r.names[i]] = {r.intervals[i].lower, r.intervals[i].upper};
        j["intervals"] = ci;
        j["level"] = r.level;
    }
    j["warnings"] = r.warnings;
    return j;
}

// ---- manifest ----

struct RunManifest {
    std::string command;
    std::string config_digest;
    std::uint64_t seed = 0;
    std::string tool_version = kToolVersion;
    double wall_time = 0.0;
};

inline Json to_json(const RunManifest& m) {
    return Json{{"command", m.command},
                {"config_digest", m.config_digest},
                {"seed", m.seed},
                {"tool_version", m.tool_version},
                {"wall_time", m.wall_time}};
}

inline std::string manifest_path(const std::string& output) { return output + ".manifest.json"; }

inline void write_manifest(const std::string& output, const RunManifest& m) {
    write_text(manifest_path(output), to_json(m).dump(2) + "\n");
}

} // namespace lqmle
