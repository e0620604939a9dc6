#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <utility>

#include "l1rls/error.hpp"
#include "l1rls/gaussian.hpp"

namespace l1rls {

/// Observations in rows, variables in columns. Requires rows >= cols + 1.
class SampleMatrix {
public:
    explicit SampleMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
        if (values_.cols() < 1) throw DomainError("SampleMatrix: no columns");
        if (values_.rows() < values_.cols() + 1)
            throw DegenerateSampleError("SampleMatrix: need at least d + 1 observations");
        if (!values_.allFinite()) throw DomainError("SampleMatrix: non-finite entry");
    }

    Eigen::Index rows() const noexcept { return values_.rows(); }
    Eigen::Index cols() const noexcept { return values_.cols(); }
    const Eigen::MatrixXd& values() const noexcept { return values_; }

private:
    Eigen::MatrixXd values_;
};

struct HenzeZirklerResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double beta = 0.0;
    bool reject = false;  ///< normality rejected at the requested significance
};

/// Henze-Zirkler multivariate normality test with the lognormal approximation
/// of the null distribution. Smoothing parameter
/// beta = ((n (2d + 1)) / 4)^(1 / (d + 4)) / sqrt(2); sample covariance uses
/// divisor n.
inline HenzeZirklerResult henze_zirkler(const SampleMatrix& samples, double significance = 0.05) {
    const Eigen::MatrixXd& x = samples.values();
    const auto n = x.rows();
    const auto d = x.cols();
    const double nd = static_cast<double>(n);
    const double dd = static_cast<double>(d);

    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / nd;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    const double max_ev = eig.eigenvalues().maxCoeff();
    if (!(max_ev > 0.0) || eig.eigenvalues().minCoeff() <= 1e-12 * max_ev)
        throw DegenerateSampleError("henze_zirkler: singular sample covariance");

    // Whiten: rows z_j = L^{-1} (x_j - mean) so Mahalanobis distances become Euclidean.
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    const Eigen::MatrixXd z = llt.matrixL().solve(centered.transpose());  // d x n

    const double beta = std::pow(nd * (2.0 * dd + 1.0) / 4.0, 1.0 / (dd + 4.0)) / std::numbers::sqrt2;
    const double b2 = beta * beta;

    double pair_sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        double row_sum = 0.0;
        for (Eigen::Index k = j + 1; k < n; ++k) {
            const double djk = (z.col(j) - z.col(k)).squaredNorm();
            row_sum += std::exp(-0.5 * b2 * djk);
        }
        pair_sum += row_sum;
    }
    const double all_pairs = 2.0 * pair_sum + nd;  // diagonal terms contribute exp(0)

    double centre_sum = 0.0;
    const double centre_scale = b2 / (2.0 * (1.0 + b2));
    for (Eigen::Index j = 0; j < n; ++j) centre_sum += std::exp(-centre_scale * z.col(j).squaredNorm());

    const double statistic = all_pairs / nd - 2.0 * std::pow(1.0 + b2, -dd / 2.0) * centre_sum +
                             nd * std::pow(1.0 + 2.0 * b2, -dd / 2.0);

    // Lognormal moments of the statistic under the null.
    const double a = 1.0 + 2.0 * b2;
    const double w = (1.0 + b2) * (1.0 + 3.0 * b2);
    const double b4 = b2 * b2;
    const double b8 = b4 * b4;
    const double mu = 1.0 - std::pow(a, -dd / 2.0) *
                                (1.0 + dd * b2 / a + dd * (dd + 2.0) * b4 / (2.0 * a * a));
    const double var = 2.0 * std::pow(1.0 + 4.0 * b2, -dd / 2.0) +
                       2.0 * std::pow(a, -dd) *
                           (1.0 + 2.0 * dd * b4 / (a * a) + 3.0 * dd * (dd + 2.0) * b8 / (4.0 * std::pow(a, 4))) -
                       4.0 * std::pow(w, -dd / 2.0) *
                           (1.0 + 3.0 * dd * b4 / (2.0 * w) + dd * (dd + 2.0) * b8 / (2.0 * w * w));
    const double log_mu = std::log(std::sqrt(mu * mu * mu * mu / (var + mu * mu)));
    const double log_sigma = std::sqrt(std::log((var + mu * mu) / (mu * mu)));

    HenzeZirklerResult out;
    out.statistic = std::max(statistic, 0.0);
    out.beta = beta;
    out.p_value = out.statistic > 0.0
                      ? 1.0 - std_normal_cdf((std::log(out.statistic) - log_mu) / log_sigma)
                      : 1.0;
    out.reject = out.p_value < significance;
    return out;
}

}  // namespace l1rls
