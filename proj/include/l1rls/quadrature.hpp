#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace l1rls::quadrature {

/// Nodes and weights of an N-point Gauss-Legendre rule on [-1, 1].
template <std::size_t N>
struct GaussLegendre {
    std::array<double, N> nodes{};
    std::array<double, N> weights{};

    GaussLegendre() {
        // Newton iteration on P_N from the Chebyshev-like initial guess.
        for (std::size_t i = 0; i < (N + 1) / 2; ++i) {
            double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                                (static_cast<double>(N) + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0;
                double p1 = 0.0;
                for (std::size_t j = 1; j <= N; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    const double jd = static_cast<double>(j);
                    p0 = ((2.0 * jd - 1.0) * z * p1 - (jd - 1.0) * p2) / jd;
                }
                dp = static_cast<double>(N) * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            const double w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[N - 1 - i] = z;
            weights[i] = w;
            weights[N - 1 - i] = w;
        }
    }

    static const GaussLegendre& instance() {
        static const GaussLegendre rule;
        return rule;
    }
};

/// Fixed-order rule mapped onto [a, b].
template <std::size_t N, class F>
double gauss_legendre(F&& f, double a, double b) {
    const auto& rule = GaussLegendre<N>::instance();
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

namespace detail {

template <std::size_t N, class F>
double adaptive_step(F& f, double a, double b, double whole, double tol, int depth) {
    const double mid = 0.5 * (a + b);
    const double left = gauss_legendre<N>(f, a, mid);
    const double right = gauss_legendre<N>(f, mid, b);
    const double refined = left + right;
    if (depth <= 0 || std::abs(refined - whole) < tol) return refined;
    return adaptive_step<N>(f, a, mid, left, 0.5 * tol, depth - 1) +
           adaptive_step<N>(f, mid, b, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive bisection driven by an N-point Gauss-Legendre rule. A panel is
/// accepted once it and its two halves agree to within the local tolerance.
template <std::size_t N, class F>
double adaptive_gauss_legendre(F&& f, double a, double b, double tol, int max_depth = 40) {
    if (a == b) return 0.0;
    const double whole = gauss_legendre<N>(f, a, b);
    return detail::adaptive_step<N>(f, a, b, whole, tol, max_depth);
}

}  // namespace l1rls::quadrature
