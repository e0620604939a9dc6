#pragma once

// Gaussian distribution functions and closed-form sign moments of jointly
// Gaussian scalars.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "l1rls/error.hpp"
#include "l1rls/quadrature.hpp"

namespace l1rls {

/// Sign with sgn(0) = 0.
inline double sgn(double x) noexcept { return static_cast<double>((x > 0.0) - (x < 0.0)); }

/// Standard normal CDF.
inline double std_normal_cdf(double x) {
    if (!std::isfinite(x)) throw DomainError("std_normal_cdf: non-finite argument");
    return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

namespace detail {

inline constexpr double kBvnTolerance = 1e-11;
inline constexpr double kBvnSaturation = 38.0;

// P(X <= h, Y <= k) for standard normals with correlation r, |r| < 1.
// Uses Sheppard's correlation integral with t = sin(theta):
//   phi(h) phi(k) + (1/2pi) int_0^{asin r} exp(-(h^2 - 2hk sin t + k^2) / (2 cos^2 t)) dt
inline double standard_bvn_cdf(double h, double k, double r) {
    if (h < -kBvnSaturation || k < -kBvnSaturation) return 0.0;
    if (h > kBvnSaturation) return std_normal_cdf(std::min(k, kBvnSaturation));
    if (k > kBvnSaturation) return std_normal_cdf(h);

    const double independent = std_normal_cdf(h) * std_normal_cdf(k);
    if (r == 0.0) return independent;

    const double hk = h * k;
    const double diff2 = (h - k) * (h - k);
    const double sum2 = (h + k) * (h + k);
    auto integrand = [=](double t) {
        const double s = std::sin(t);
        const double c2 = std::cos(t) * std::cos(t);
        // h^2 - 2hk s + k^2 rewritten to avoid cancellation near s = +-1.
        const double q = s >= 0.0 ? diff2 / (2.0 * c2) + hk / (1.0 + s)
                                  : sum2 / (2.0 * c2) - hk / (1.0 - s);
        return std::exp(-q);
    };
    const double upper = std::asin(r);
    const double integral = quadrature::adaptive_gauss_legendre<32>(
        integrand, 0.0, upper, 2.0 * std::numbers::pi * kBvnTolerance);
    const double p = independent + integral / (2.0 * std::numbers::pi);
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace detail

/// Clamping policy shared by the sign-moment lemmas.
inline constexpr double kVarianceFloor = 1e-14;
inline constexpr double kCorrelationLimit = 1.0 - 1e-8;

/// CDF of N(mu, sigma) evaluated at x. The correlation coefficient is clamped
/// into [-1 + 1e-8, 1 - 1e-8]; anything that is not positive semidefinite
/// before clamping is rejected.
inline double bivariate_normal_cdf(const Eigen::Vector2d& x, const Eigen::Vector2d& mu,
                                   const Eigen::Matrix2d& sigma) {
    if (!x.allFinite() || !mu.allFinite() || !sigma.allFinite())
        throw DomainError("bivariate_normal_cdf: non-finite argument");
    const double s11 = sigma(0, 0);
    const double s22 = sigma(1, 1);
    const double s12 = 0.5 * (sigma(0, 1) + sigma(1, 0));
    if (std::abs(sigma(0, 1) - sigma(1, 0)) > 1e-12 * std::max({1.0, s11, s22}))
        throw DegenerateCovarianceError("bivariate_normal_cdf: covariance is not symmetric");
    if (!(s11 > 0.0) || !(s22 > 0.0))
        throw DegenerateCovarianceError("bivariate_normal_cdf: non-positive variance");
    const double sd1 = std::sqrt(s11);
    const double sd2 = std::sqrt(s22);
    double r = s12 / (sd1 * sd2);
    if (std::abs(r) > 1.0 + 1e-12)
        throw DegenerateCovarianceError("bivariate_normal_cdf: covariance is not positive semidefinite");
    r = std::clamp(r, -kCorrelationLimit, kCorrelationLimit);
    return detail::standard_bvn_cdf((x(0) - mu(0)) / sd1, (x(1) - mu(1)) / sd2, r);
}

/// Mean pair and covariance of two jointly Gaussian scalars u, v.
///
/// Construction clamps the covariance so |rho_uv| <= (1 - 1e-8) sigma_u sigma_v;
/// when either variance is below kVarianceFloor that variable is treated as a
/// constant and rho_uv is zeroed.
class GaussPairMoment {
public:
    /// Entries of the inverse covariance [[a, c], [c, b]] and theta = b - c^2 / a.
    struct Inverse {
        double a;
        double b;
        double c;
        double theta;
        double det;  ///< determinant of the (clamped) covariance
    };

    GaussPairMoment(double mu_u, double mu_v, double sigma_u2, double sigma_v2, double rho_uv)
        : mu_u_(mu_u), mu_v_(mu_v), sigma_u2_(sigma_u2), sigma_v2_(sigma_v2), rho_uv_(rho_uv) {
        if (!std::isfinite(mu_u) || !std::isfinite(mu_v) || !std::isfinite(sigma_u2) ||
            !std::isfinite(sigma_v2) || !std::isfinite(rho_uv))
            throw DomainError("GaussPairMoment: non-finite moment");
        if (sigma_u2 < 0.0 || sigma_v2 < 0.0) throw DomainError("GaussPairMoment: negative variance");
        if (u_degenerate() || v_degenerate()) {
            rho_uv_ = 0.0;
        } else {
            const double bound = kCorrelationLimit * std::sqrt(sigma_u2_ * sigma_v2_);
            rho_uv_ = std::clamp(rho_uv_, -bound, bound);
        }
    }

    double mu_u() const noexcept { return mu_u_; }
    double mu_v() const noexcept { return mu_v_; }
    double sigma_u2() const noexcept { return sigma_u2_; }
    double sigma_v2() const noexcept { return sigma_v2_; }
    double rho_uv() const noexcept { return rho_uv_; }

    bool u_degenerate() const noexcept { return sigma_u2_ < kVarianceFloor; }
    bool v_degenerate() const noexcept { return sigma_v2_ < kVarianceFloor; }

    GaussPairMoment swapped() const { return {mu_v_, mu_u_, sigma_v2_, sigma_u2_, rho_uv_}; }

    Eigen::Matrix2d covariance() const {
        Eigen::Matrix2d s;
        s << sigma_u2_, rho_uv_, rho_uv_, sigma_v2_;
        return s;
    }

    Inverse inverse() const {
        const double su2 = std::max(sigma_u2_, kVarianceFloor);
        const double sv2 = std::max(sigma_v2_, kVarianceFloor);
        const double det = su2 * sv2 - rho_uv_ * rho_uv_;
        if (!(det > 0.0)) throw DegenerateCovarianceError("GaussPairMoment: singular covariance");
        const double a = sv2 / det;
        const double b = su2 / det;
        const double c = -rho_uv_ / det;
        return {a, b, c, b - c * c / a, det};
    }

private:
    double mu_u_;
    double mu_v_;
    double sigma_u2_;
    double sigma_v2_;
    double rho_uv_;
};

/// E{sgn u} for u ~ N(mu, sigma^2), i.e. 1 - 2 phi(-mu / sigma).
inline double expected_sign(double mu, double sigma) {
    if (!std::isfinite(mu) || !std::isfinite(sigma)) throw DomainError("expected_sign: non-finite argument");
    if (sigma < 0.0) throw DomainError("expected_sign: negative sigma");
    if (sigma == 0.0) return sgn(mu);
    // erf(z / sqrt 2) == 1 - 2 phi(-z), and is exactly odd.
    return std::erf(mu / (sigma * std::numbers::sqrt2));
}

/// E{sgn u sgn v} from four bivariate CDF terms (orthant probabilities
/// P(--) + P(++) - P(-+) - P(+-)).
inline double expected_sign_product(const GaussPairMoment& m) {
    if (m.u_degenerate() && m.v_degenerate()) return sgn(m.mu_u()) * sgn(m.mu_v());
    if (m.u_degenerate()) return sgn(m.mu_u()) * expected_sign(m.mu_v(), std::sqrt(m.sigma_v2()));
    if (m.v_degenerate()) return sgn(m.mu_v()) * expected_sign(m.mu_u(), std::sqrt(m.sigma_u2()));

    const Eigen::Vector2d origin = Eigen::Vector2d::Zero();
    const Eigen::Matrix2d sigma = m.covariance();
    Eigen::Matrix2d flipped = sigma;
    flipped(0, 1) = flipped(1, 0) = -m.rho_uv();

    const double both_negative = bivariate_normal_cdf(origin, {m.mu_u(), m.mu_v()}, sigma);
    const double both_positive = bivariate_normal_cdf(origin, {-m.mu_u(), -m.mu_v()}, sigma);
    const double u_neg_v_pos = bivariate_normal_cdf(origin, {m.mu_u(), -m.mu_v()}, flipped);
    const double u_pos_v_neg = bivariate_normal_cdf(origin, {-m.mu_u(), m.mu_v()}, flipped);
    return std::clamp(both_negative + both_positive - u_neg_v_pos - u_pos_v_neg, -1.0, 1.0);
}

/// E{u sgn v}, closed form in the inverse-covariance entries a, b, c and
/// theta = b - c^2 / a.
inline double expected_value_times_sign(const GaussPairMoment& m) {
    if (m.v_degenerate()) return m.mu_u() * sgn(m.mu_v());
    if (m.u_degenerate()) return m.mu_u() * expected_sign(m.mu_v(), std::sqrt(m.sigma_v2()));

    const auto inv = m.inverse();
    if (!(inv.theta > 0.0) || !std::isfinite(inv.theta))
        throw DegenerateCovarianceError("expected_value_times_sign: theta <= 0");

    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double mu_u = m.mu_u();
    const double mu_v = m.mu_v();
    const double c_over_a = inv.c / inv.a;
    const double root = std::sqrt(two_pi / inv.theta);
    const double sign_mean = 1.0 - 2.0 * std_normal_cdf(-mu_v * std::sqrt(inv.theta));
    const double density = std::sqrt(2.0 / (std::numbers::pi * inv.theta)) *
                           std::exp(-0.5 * mu_v * mu_v * inv.theta);

    const double first = root * (mu_u + c_over_a * mu_v) * sign_mean;
    const double second = c_over_a * root * (density + mu_v * sign_mean);
    return (first - second) / std::sqrt(two_pi * inv.a * inv.det);
}

}  // namespace l1rls
