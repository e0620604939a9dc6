#pragma once

// JSON experiment configuration. Layout:
//
//   {
//     "filter":  {"taps": 32, "lambda": 0.995, "delta": 0.25, "epsilon": 0.1},
//     "signal":  {"rho": 0.6, "sigma_s2": 0.64, "sigma_z2": 0.09, "w_star": [...]},
//     "run":     {"n_iters": 2000, "n_runs": 500, "seed": 20211},
//     "capture": {"instants": [200, 1500], "pairs": [[2, 10], [13, 25]], "samples": 5000},
//     "compare": {"db_tolerance": 1.0, "from_n": 100, ...}
//   }
//
// "capture" and "compare" are optional.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "l1rls/error.hpp"
#include "l1rls/experiment.hpp"

namespace l1rls::io {

using nlohmann::json;

/// Configuration document that failed to parse or validate. `field` names the
/// offending key path (e.g. "filter.lambda") when known.
class ConfigFileError : public ConfigError {
public:
    ConfigFileError(const std::string& what, std::string field = {})
        : ConfigError(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Tolerances used by the compare stage.
struct CompareTolerances {
    double db_tolerance = 1.0;          ///< max |10 log10(emp / theo)| for msd, mse, emse
    std::size_t from_n = 100;           ///< first update index held to db_tolerance
    double mean_w_tolerance = 0.02;     ///< per-tap mean deviation over the terminal window
    std::size_t terminal_window = 200;  ///< iterations averaged for terminal checks
    double terminal_mse_db = 0.5;       ///< terminal MSE tolerance
};

struct ConfigDocument {
    ExperimentConfig experiment;
    CompareTolerances compare;
};

namespace detail {

inline const json& require(const json& obj, const std::string& section, const char* key) {
    const std::string path = section + "." + key;
    if (!obj.contains(key)) throw ConfigFileError("missing required field", path);
    return obj.at(key);
}

inline double number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigFileError("expected a number", path);
    return v.get<double>();
}

inline std::uint64_t count(const json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw ConfigFileError("expected a non-negative integer", path);
    return v.get<std::uint64_t>();
}

inline const json& section(const json& root, const char* name) {
    if (!root.contains(name)) throw ConfigFileError("missing required section", name);
    const json& s = root.at(name);
    if (!s.is_object()) throw ConfigFileError("expected an object", name);
    return s;
}

}  // namespace detail

inline ConfigDocument config_from_json(const json& root) {
    using detail::count;
    using detail::number;
    using detail::require;
    if (!root.is_object()) throw ConfigFileError("top level must be an object");

    ConfigDocument doc;
    ExperimentConfig& c = doc.experiment;

    const json& filter = detail::section(root, "filter");
    c.taps = count(require(filter, "filter", "taps"), "filter.taps");
    c.lambda = number(require(filter, "filter", "lambda"), "filter.lambda");
    c.delta = number(require(filter, "filter", "delta"), "filter.delta");
    c.epsilon = number(require(filter, "filter", "epsilon"), "filter.epsilon");

    const json& signal = detail::section(root, "signal");
    c.rho = number(require(signal, "signal", "rho"), "signal.rho");
    c.sigma_s2 = number(require(signal, "signal", "sigma_s2"), "signal.sigma_s2");
    c.sigma_z2 = number(require(signal, "signal", "sigma_z2"), "signal.sigma_z2");
    const json& w = require(signal, "signal", "w_star");
    if (!w.is_array()) throw ConfigFileError("expected an array", "signal.w_star");
    c.w_star.resize(static_cast<Eigen::Index>(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i)
        c.w_star(static_cast<Eigen::Index>(i)) = number(w[i], "signal.w_star[" + std::to_string(i) + "]");

    const json& run = detail::section(root, "run");
    c.n_iters = count(require(run, "run", "n_iters"), "run.n_iters");
    c.n_runs = count(require(run, "run", "n_runs"), "run.n_runs");
    c.seed = count(require(run, "run", "seed"), "run.seed");

    if (root.contains("capture")) {
        const json& cap = detail::section(root, "capture");
        if (cap.contains("instants")) {
            c.capture_instants.clear();
            for (const auto& v : cap.at("instants")) c.capture_instants.push_back(count(v, "capture.instants"));
        }
        if (cap.contains("pairs")) {
            c.capture_pairs.clear();
            for (const auto& p : cap.at("pairs")) {
                if (!p.is_array() || p.size() != 2) throw ConfigFileError("expected [i, j]", "capture.pairs");
                c.capture_pairs.emplace_back(count(p[0], "capture.pairs"), count(p[1], "capture.pairs"));
            }
        }
        if (cap.contains("samples")) c.capture_samples = count(cap.at("samples"), "capture.samples");
    }

    if (root.contains("compare")) {
        const json& cmp = detail::section(root, "compare");
        CompareTolerances& t = doc.compare;
        if (cmp.contains("db_tolerance")) t.db_tolerance = number(cmp.at("db_tolerance"), "compare.db_tolerance");
        if (cmp.contains("from_n")) t.from_n = count(cmp.at("from_n"), "compare.from_n");
        if (cmp.contains("mean_w_tolerance"))
            t.mean_w_tolerance = number(cmp.at("mean_w_tolerance"), "compare.mean_w_tolerance");
        if (cmp.contains("terminal_window"))
            t.terminal_window = count(cmp.at("terminal_window"), "compare.terminal_window");
        if (cmp.contains("terminal_mse_db"))
            t.terminal_mse_db = number(cmp.at("terminal_mse_db"), "compare.terminal_mse_db");
    }

    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigFileError(e.what());
    }
    return doc;
}

inline json config_to_json(const ConfigDocument& doc) {
    const ExperimentConfig& c = doc.experiment;
    json pairs = json::array();
    for (auto [i, j] : c.capture_pairs) pairs.push_back({i, j});
    return {
        {"filter", {{"taps", c.taps}, {"lambda", c.lambda}, {"delta", c.delta}, {"epsilon", c.epsilon}}},
        {"signal",
         {{"rho", c.rho},
          {"sigma_s2", c.sigma_s2},
          {"sigma_z2", c.sigma_z2},
          {"w_star", std::vector<double>(c.w_star.data(), c.w_star.data() + c.w_star.size())}}},
        {"run", {{"n_iters", c.n_iters}, {"n_runs", c.n_runs}, {"seed", c.seed}}},
        {"capture", {{"instants", c.capture_instants}, {"pairs", pairs}, {"samples", c.capture_samples}}},
        {"compare",
         {{"db_tolerance", doc.compare.db_tolerance},
          {"from_n", doc.compare.from_n},
          {"mean_w_tolerance", doc.compare.mean_w_tolerance},
          {"terminal_window", doc.compare.terminal_window},
          {"terminal_mse_db", doc.compare.terminal_mse_db}}},
    };
}

/// Parses a configuration document. Syntax errors carry line and column.
inline ConfigDocument parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigFileError(e.what());
    }
    return config_from_json(root);
}

inline ConfigDocument load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigFileError("cannot read configuration file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// FNV-1a over the canonical serialization.
inline std::string config_hash(const ConfigDocument& doc) {
    const std::string s = config_to_json(doc).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace l1rls::io
