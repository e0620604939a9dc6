#pragma once

// l1-regularized RLS (zero-attracting RLS) in its original three-equation form
// and in the compact single-update form. Both forms share FilterState; with
// delta = 0 they reduce to exponentially weighted RLS.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "l1rls/error.hpp"
#include "l1rls/gaussian.hpp"

namespace l1rls {

template <int Taps = Eigen::Dynamic>
struct FilterState {
    using Vector = Eigen::Matrix<double, Taps, 1>;
    using Matrix = Eigen::Matrix<double, Taps, Taps>;

    Vector w;              ///< current weight estimate
    Matrix P;              ///< inverse of the time-averaged correlation matrix
    double lambda = 0.0;   ///< forgetting factor
    double delta = 0.0;    ///< l1 regularization weight
    double gamma = 0.0;    ///< zero-attractor gain, delta * (lambda - 1)
    std::size_t n = 0;     ///< completed updates

    Eigen::Index size() const noexcept { return w.size(); }
};

template <int Taps = Eigen::Dynamic>
struct StepOutput {
    double e = 0.0;  ///< a priori error y - x^T w_{n-1}
    typename FilterState<Taps>::Vector w_next;
    typename FilterState<Taps>::Vector k;  ///< gain P_n x_n
};

enum class Form { original, compact };

template <int Taps = Eigen::Dynamic>
FilterState<Taps> init_filter(Eigen::Index taps, double lambda, double delta, double epsilon,
                              const typename FilterState<Taps>::Vector& w0) {
    if (taps < 1) throw ConfigError("init_filter: filter length must be positive");
    if (Taps != Eigen::Dynamic && taps != Taps) throw ConfigError("init_filter: length does not match template size");
    if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("init_filter: lambda must lie in (0, 1)");
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("init_filter: delta must be >= 0");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("init_filter: epsilon must be > 0");
    if (w0.size() != taps) throw ConfigError("init_filter: w0 has wrong length");

    FilterState<Taps> s;
    s.w = w0;
    // Phi_{-1} = I / epsilon.
    s.P = FilterState<Taps>::Matrix::Identity(taps, taps) * epsilon;
    s.lambda = lambda;
    s.delta = delta;
    s.gamma = delta * (lambda - 1.0);
    s.n = 0;
    return s;
}

template <int Taps = Eigen::Dynamic>
FilterState<Taps> init_filter(Eigen::Index taps, double lambda, double delta, double epsilon) {
    return init_filter<Taps>(taps, lambda, delta, epsilon, FilterState<Taps>::Vector::Zero(taps));
}

namespace detail {

template <class Vec>
Vec sign_of(const Vec& w) {
    return w.unaryExpr([](double v) { return sgn(v); });
}

template <class Mat>
void symmetrize(Mat& p) {
    p = (0.5 * (p + p.transpose())).eval();
}

template <int Taps>
void check_finite(const FilterState<Taps>& s, double denom) {
    if (!std::isfinite(denom) || !(denom > 0.0) || !s.w.allFinite())
        throw NumericalFailure("l1-RLS update produced a non-finite value", s.n);
}

}  // namespace detail

/// Original form:
///   k_n = P x / (lambda + x^T P x)
///   w_n = w + e k_n + delta (lambda - 1) / lambda (I - k_n x^T) P sgn(w)
///   P_n = (P - k_n x^T P) / lambda
template <int Taps, class XVec>
StepOutput<Taps> step_original(FilterState<Taps>& s, const XVec& x, double y) {
    using Vector = typename FilterState<Taps>::Vector;
    const Vector px = s.P * x;
    const double denom = s.lambda + x.dot(px);
    const Vector k = px / denom;
    const double e = y - x.dot(s.w);

    const Vector p_sign = s.P * detail::sign_of(s.w);
    const double scale = s.delta * (s.lambda - 1.0) / s.lambda;
    s.w += e * k + scale * (p_sign - k * x.dot(p_sign));

    s.P = (s.P - k * px.transpose()) * (1.0 / s.lambda);
    detail::symmetrize(s.P);
    detail::check_finite(s, denom);
    ++s.n;
    return {e, s.w, k};
}

/// Compact form: P is advanced first, then
///   w_n = w + e P_n x + gamma P_n sgn(w)
/// with e and sgn(w) taken from the pre-update weights.
template <int Taps, class XVec>
StepOutput<Taps> step_compact(FilterState<Taps>& s, const XVec& x, double y) {
    using Vector = typename FilterState<Taps>::Vector;
    const double e = y - x.dot(s.w);
    const Vector sign_w = detail::sign_of(s.w);

    const Vector px = s.P * x;
    const double denom = s.lambda + x.dot(px);
    // P x x^T P / denom written as q q^T, which is exactly symmetric, so P
    // keeps bitwise symmetry and needs no separate symmetrization pass.
    const Vector q = px / std::sqrt(denom);
    const double inv_lambda = 1.0 / s.lambda;
    s.P = (s.P - q * q.transpose()) * inv_lambda;

    const Vector gain = s.P * x;
    s.w += e * gain + s.gamma * (s.P * sign_w);
    detail::check_finite(s, denom);
    ++s.n;
    return {e, s.w, gain};
}

template <int Taps, class XVec>
StepOutput<Taps> step(FilterState<Taps>& s, const XVec& x, double y, Form form) {
    return form == Form::original ? step_original(s, x, y) : step_compact(s, x, y);
}

/// Runs Phi_n = lambda Phi_{n-1} + x_n x_n^T from Phi_{-1} = I / epsilon
/// alongside the recorded P_n and returns max_n ||P_n Phi_n - I||_inf.
/// p_history[n] must be the P after consuming inputs[n].
template <class Matrix, class Vector>
double phi_recursion_check(std::span<const Matrix> p_history, std::span<const Vector> inputs,
                           double epsilon, double lambda) {
    if (p_history.size() != inputs.size())
        throw DomainError("phi_recursion_check: sequence lengths differ");
    if (inputs.empty()) return 0.0;
    const auto taps = inputs.front().size();
    Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(taps, taps) / epsilon;
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(taps, taps);
    double worst = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const Eigen::VectorXd x = inputs[i];
        phi = lambda * phi + x * x.transpose();
        const Eigen::MatrixXd residual = Eigen::MatrixXd(p_history[i]) * phi - eye;
        worst = std::max(worst, residual.cwiseAbs().rowwise().sum().maxCoeff());
    }
    return worst;
}

}  // namespace l1rls
