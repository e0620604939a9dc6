#pragma once

// Analytical transient model of l1-RLS: expected time-averaged correlation,
// mean weight-error recursion, and weight-error correlation recursion with the
// sign-moment matrices Q1 and Q2.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "l1rls/error.hpp"
#include "l1rls/experiment.hpp"
#include "l1rls/gaussian.hpp"
#include "l1rls/sim.hpp"
#include "l1rls/trajectory.hpp"

namespace l1rls {

struct SystemSpec {
    Eigen::VectorXd w_star;
    Eigen::MatrixXd R_x;
    double sigma_z2 = 0.0;
    double lambda = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
    double epsilon = 0.0;

    Eigen::Index taps() const noexcept { return w_star.size(); }

    static SystemSpec make(Eigen::VectorXd w_star, Eigen::MatrixXd r_x, double sigma_z2, double lambda,
                           double delta, double epsilon) {
        SystemSpec s{std::move(w_star), std::move(r_x), sigma_z2, lambda, delta, delta * (lambda - 1.0), epsilon};
        s.validate();
        return s;
    }

    static SystemSpec from_config(const ExperimentConfig& cfg) {
        return make(cfg.w_star, rx_toeplitz(cfg.rho, cfg.sigma_x2(), static_cast<Eigen::Index>(cfg.taps)),
                    cfg.sigma_z2, cfg.lambda, cfg.delta, cfg.epsilon);
    }

    void validate() const {
        const auto n = taps();
        if (n < 1) throw ConfigError("SystemSpec: empty w_star");
        if (R_x.rows() != n || R_x.cols() != n) throw ConfigError("SystemSpec: R_x has wrong shape");
        if ((R_x - R_x.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, R_x.cwiseAbs().maxCoeff()))
            throw ConfigError("SystemSpec: R_x is not symmetric");
        if (Eigen::LLT<Eigen::MatrixXd>(R_x).info() != Eigen::Success)
            throw ConfigError("SystemSpec: R_x is not positive definite");
        if (!(sigma_z2 >= 0.0)) throw ConfigError("SystemSpec: sigma_z2 must be >= 0");
        if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("SystemSpec: lambda must lie in (0, 1)");
        if (!(epsilon > 0.0)) throw ConfigError("SystemSpec: epsilon must be > 0");
        if (std::abs(gamma - delta * (lambda - 1.0)) > 1e-15)
            throw ConfigError("SystemSpec: gamma must equal delta (lambda - 1)");
    }
};

/// Moments carried by the model after n updates (n = 0 is the deterministic
/// start w = 0, so E{w~} = -w_star and K = w_star w_star^T).
struct TheoryState {
    Eigen::MatrixXd E_phi;     ///< E{Phi_{n-1}}
    Eigen::VectorXd E_wtilde;  ///< E{w~_{n-1}}
    Eigen::MatrixXd K;         ///< E{w~_{n-1} w~_{n-1}^T}
    std::size_t n = 0;

    static TheoryState initial(const SystemSpec& spec) {
        const auto l = spec.taps();
        return {Eigen::MatrixXd::Identity(l, l) / spec.epsilon, -spec.w_star, spec.w_star * spec.w_star.transpose(),
                0};
    }
};

/// E{Phi_n} = lambda E{Phi_{n-1}} + R_x.
inline Eigen::MatrixXd expected_phi_step(const Eigen::MatrixXd& e_phi_prev, double lambda,
                                         const Eigen::MatrixXd& r_x) {
    return lambda * e_phi_prev + r_x;
}

namespace detail {

inline double entry_variance(const Eigen::VectorXd& mean, const Eigen::MatrixXd& k, Eigen::Index i) {
    return std::max(k(i, i) - mean(i) * mean(i), 0.0);
}

inline Eigen::LLT<Eigen::MatrixXd> factor_phi(const Eigen::MatrixXd& e_phi, std::size_t n) {
    Eigen::LLT<Eigen::MatrixXd> llt(e_phi);
    if (llt.info() != Eigen::Success) throw NumericalFailure("E{Phi} is not positive definite", n);
    return llt;
}

}  // namespace detail

/// Entries E{sgn [w_star + w~]_i} under the per-entry Gaussian model.
inline Eigen::VectorXd expected_sign_vector(const Eigen::VectorXd& e_wtilde, const Eigen::MatrixXd& k,
                                            const Eigen::VectorXd& w_star) {
    Eigen::VectorXd s(w_star.size());
    for (Eigen::Index i = 0; i < s.size(); ++i)
        s(i) = expected_sign(w_star(i) + e_wtilde(i), std::sqrt(detail::entry_variance(e_wtilde, k, i)));
    return s;
}

/// E{w~_n} = lambda E{Phi_n}^{-1} E{Phi_{n-1}} E{w~_{n-1}} + gamma E{Phi_n}^{-1} (1 - 2 phi-vector).
/// `e_phi_now` is E{Phi_n}, already advanced.
inline Eigen::VectorXd mean_step(const TheoryState& prev, const Eigen::MatrixXd& e_phi_now, const SystemSpec& spec) {
    const auto llt = detail::factor_phi(e_phi_now, prev.n);
    Eigen::VectorXd rhs = spec.lambda * (prev.E_phi * prev.E_wtilde);
    if (spec.gamma != 0.0) rhs += spec.gamma * expected_sign_vector(prev.E_wtilde, prev.K, spec.w_star);
    return llt.solve(rhs);
}

/// Q1 = E{sgn(w_star + w~) sgn(w_star + w~)^T}; unit diagonal, off-diagonal
/// entries from the bivariate sign-product lemma.
inline Eigen::MatrixXd q1_matrix(const Eigen::VectorXd& e_wtilde, const Eigen::MatrixXd& k,
                                 const Eigen::VectorXd& w_star) {
    const auto l = w_star.size();
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(l, l);
    for (Eigen::Index i = 0; i < l; ++i) {
        const double var_i = detail::entry_variance(e_wtilde, k, i);
        for (Eigen::Index j = i + 1; j < l; ++j) {
            const double var_j = detail::entry_variance(e_wtilde, k, j);
            const double cov = k(i, j) - e_wtilde(i) * e_wtilde(j);
            try {
                const GaussPairMoment m(w_star(i) + e_wtilde(i), w_star(j) + e_wtilde(j), var_i, var_j, cov);
                q(i, j) = q(j, i) = expected_sign_product(m);
            } catch (const Error& e) {
                throw Error(std::string("q1_matrix(") + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                            "): " + e.what());
            }
        }
    }
    return q;
}

/// Q2 = E{w~ sgn(w_star + w~)^T}; [Q2]_ij from the value-times-sign lemma
/// with u = [w~]_i and v = [w_star + w~]_j, diagonal included.
inline Eigen::MatrixXd q2_matrix(const Eigen::VectorXd& e_wtilde, const Eigen::MatrixXd& k,
                                 const Eigen::VectorXd& w_star) {
    const auto l = w_star.size();
    Eigen::MatrixXd q(l, l);
    for (Eigen::Index i = 0; i < l; ++i) {
        const double var_i = detail::entry_variance(e_wtilde, k, i);
        for (Eigen::Index j = 0; j < l; ++j) {
            const double var_j = detail::entry_variance(e_wtilde, k, j);
            const double cov = i == j ? var_i : k(i, j) - e_wtilde(i) * e_wtilde(j);
            try {
                const GaussPairMoment m(e_wtilde(i), w_star(j) + e_wtilde(j), var_i, var_j, cov);
                q(i, j) = expected_value_times_sign(m);
            } catch (const Error& e) {
                throw Error(std::string("q2_matrix(") + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                            "): " + e.what());
            }
        }
    }
    return q;
}

/// Symmetrize and clip negative eigenvalues at zero.
inline Eigen::MatrixXd psd_project(const Eigen::MatrixXd& k) {
    const Eigen::MatrixXd sym = 0.5 * (k + k.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    if (eig.eigenvalues().minCoeff() >= 0.0) return sym;
    const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd out = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (out + out.transpose());
}

/// K_n = E{Phi_n}^{-1} [ lambda^2 E{Phi_{n-1}} K_{n-1} E{Phi_{n-1}} + sigma_z^2 R_x + gamma^2 Q1
///        + lambda gamma (E{Phi_{n-1}} Q2 + Q2^T E{Phi_{n-1}}) ] E{Phi_n}^{-1},
/// with Q1 and Q2 evaluated at the previous moments, then projected onto the PSD cone.
inline Eigen::MatrixXd covariance_step(const TheoryState& prev, const SystemSpec& spec,
                                       const Eigen::MatrixXd& e_phi_now) {
    const auto llt = detail::factor_phi(e_phi_now, prev.n);
    const Eigen::MatrixXd& phi_prev = prev.E_phi;
    Eigen::MatrixXd middle = spec.lambda * spec.lambda * (phi_prev * prev.K * phi_prev) + spec.sigma_z2 * spec.R_x;
    if (spec.gamma != 0.0) {
        const Eigen::MatrixXd q1 = q1_matrix(prev.E_wtilde, prev.K, spec.w_star);
        const Eigen::MatrixXd q2 = q2_matrix(prev.E_wtilde, prev.K, spec.w_star);
        const Eigen::MatrixXd cross = phi_prev * q2;
        middle += spec.gamma * spec.gamma * q1 + spec.lambda * spec.gamma * (cross + cross.transpose());
    }
    const Eigen::MatrixXd left = llt.solve(middle);
    const Eigen::MatrixXd k = llt.solve(left.transpose());
    if (!k.allFinite()) throw NumericalFailure("covariance recursion produced a non-finite value", prev.n);
    return psd_project(k);
}

struct MseReadout {
    double mse;
    double emse;
};

/// E{e_n^2} = sigma_z^2 + tr{R_x K_{n-1}}.
inline MseReadout mse_readout(const Eigen::MatrixXd& k_prev, const Eigen::MatrixXd& r_x, double sigma_z2) {
    const double emse = std::max((r_x.cwiseProduct(k_prev)).sum(), 0.0);  // tr{R K} for symmetric R
    return {sigma_z2 + emse, emse};
}

/// MSD_n = tr{K_n}.
inline double msd_readout(const Eigen::MatrixXd& k) { return std::max(k.trace(), 0.0); }

/// One model update: advances E{Phi}, E{w~} and K together and returns the
/// MSE / EMSE readout of this update (which uses K_{n-1}).
inline MseReadout theory_step(TheoryState& ts, const SystemSpec& spec) {
    const MseReadout readout = mse_readout(ts.K, spec.R_x, spec.sigma_z2);
    const Eigen::MatrixXd e_phi_now = expected_phi_step(ts.E_phi, spec.lambda, spec.R_x);
    Eigen::VectorXd e_w = mean_step(ts, e_phi_now, spec);
    Eigen::MatrixXd k = covariance_step(ts, spec, e_phi_now);
    if (!e_w.allFinite()) throw NumericalFailure("mean recursion produced a non-finite value", ts.n);
    ts.E_phi = e_phi_now;
    ts.E_wtilde = std::move(e_w);
    ts.K = std::move(k);
    ++ts.n;
    return readout;
}

/// Theoretical learning curves for n_iters updates. Deterministic.
inline TrajectoryRecord run_theory(const SystemSpec& spec, std::size_t n_iters) {
    spec.validate();
    TrajectoryRecord rec(Provenance::theoretical, n_iters, spec.taps());
    TheoryState ts = TheoryState::initial(spec);
    rec.initial_msd = msd_readout(ts.K);
    for (std::size_t t = 0; t < n_iters; ++t) {
        const MseReadout r = theory_step(ts, spec);
        rec.mean_w.row(static_cast<Eigen::Index>(t)) = (spec.w_star + ts.E_wtilde).transpose();
        rec.msd[t] = msd_readout(ts.K);
        rec.mse[t] = r.mse;
        rec.emse[t] = r.emse;
    }
    return rec;
}

}  // namespace l1rls
