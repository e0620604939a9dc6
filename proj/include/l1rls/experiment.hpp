#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "l1rls/error.hpp"

namespace l1rls {

/// Everything needed to reproduce one sparse system-identification experiment.
struct ExperimentConfig {
    std::size_t taps = 32;
    double lambda = 0.995;
    double delta = 0.25;
    double epsilon = 0.1;
    double sigma_z2 = 0.09;
    double rho = 0.6;
    double sigma_s2 = 0.64;
    Eigen::VectorXd w_star;
    std::size_t n_iters = 2000;
    std::size_t n_runs = 500;
    std::uint64_t seed = 20211;
    /// capture_instants[k] is paired with capture_pairs[k] (1-based tap indices).
    std::vector<std::size_t> capture_instants{200, 1500};
    std::vector<std::pair<std::size_t, std::size_t>> capture_pairs{{2, 10}, {13, 25}};
    std::size_t capture_samples = 5000;

    double gamma() const noexcept { return delta * (lambda - 1.0); }
    double sigma_x2() const noexcept { return sigma_s2 / (1.0 - rho * rho); }

    void validate() const {
        if (taps < 1) throw ConfigError("taps must be positive");
        if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("lambda must lie in (0, 1)");
        if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be >= 0");
        if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be > 0");
        if (!(sigma_z2 >= 0.0) || !std::isfinite(sigma_z2)) throw ConfigError("sigma_z2 must be >= 0");
        if (!(std::abs(rho) < 1.0)) throw ConfigError("rho must satisfy |rho| < 1");
        if (!(sigma_s2 > 0.0) || !std::isfinite(sigma_s2)) throw ConfigError("sigma_s2 must be > 0");
        if (static_cast<std::size_t>(w_star.size()) != taps)
            throw ConfigError("w_star length " + std::to_string(w_star.size()) + " does not match taps " +
                              std::to_string(taps));
        if (!w_star.allFinite()) throw ConfigError("w_star has non-finite entries");
        if (n_iters < 1) throw ConfigError("n_iters must be positive");
        if (n_runs < 1) throw ConfigError("n_runs must be positive");
        if (capture_instants.size() != capture_pairs.size())
            throw ConfigError("capture instants and pairs must have the same length");
        for (auto t : capture_instants)
            if (t < 1 || t > n_iters) throw ConfigError("capture instant " + std::to_string(t) + " outside [1, n_iters]");
        for (auto [i, j] : capture_pairs)
            if (i < 1 || i > taps || j < 1 || j > taps)
                throw ConfigError("capture pair (" + std::to_string(i) + "," + std::to_string(j) + ") outside [1, taps]");
    }
};

/// The 32-tap sparse impulse response: five decaying positive taps, 22 zeros,
/// five mirrored negative taps.
inline Eigen::VectorXd sparse_reference_weights() {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(32);
    const double head[] = {0.9, 0.7, 0.5, 0.3, 0.1};
    for (int i = 0; i < 5; ++i) {
        w(i) = head[i];
        w(31 - i) = -head[i];
    }
    return w;
}

/// Built-in preset: AR(1) input with rho = 0.6 and unit variance, noise
/// variance 0.09, lambda = 0.995, delta = 0.25, epsilon = 0.1, 500 runs.
inline ExperimentConfig reference_preset() {
    ExperimentConfig c;
    c.w_star = sparse_reference_weights();
    return c;
}

}  // namespace l1rls
