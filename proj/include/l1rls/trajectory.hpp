#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string_view>
#include <vector>

namespace l1rls {

enum class Provenance { empirical, theoretical };

inline std::string_view to_string(Provenance p) {
    return p == Provenance::empirical ? "empirical" : "theoretical";
}

/// Per-iteration learning curves. Row t (0-based) holds the quantities after
/// t + 1 updates: mean weights w_n, MSD E||w~_n||^2, and the a priori
/// MSE / EMSE of update n (which depend on w_{n-1}).
struct TrajectoryRecord {
    Provenance provenance = Provenance::empirical;
    Eigen::MatrixXd mean_w;  ///< n_iters x L
    std::vector<double> msd;
    std::vector<double> mse;
    std::vector<double> emse;
    double initial_msd = 0.0;  ///< MSD of the starting weights, before any update

    TrajectoryRecord() = default;
    TrajectoryRecord(Provenance p, std::size_t n_iters, Eigen::Index taps)
        : provenance(p), mean_w(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_iters), taps)),
          msd(n_iters, 0.0), mse(n_iters, 0.0), emse(n_iters, 0.0) {}

    std::size_t size() const noexcept { return msd.size(); }
    Eigen::Index taps() const noexcept { return mean_w.cols(); }
};

}  // namespace l1rls
