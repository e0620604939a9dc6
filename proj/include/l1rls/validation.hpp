#pragma once

// Independent checks of the filters and the transient model: a textbook RLS,
// Monte Carlo estimators of the Gaussian sign moments, and evaluators for the
// model-versus-simulation agreement criteria.

#include <Eigen/Core>
#include <Eigen/LU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "l1rls/filter.hpp"
#include "l1rls/gaussian.hpp"
#include "l1rls/io/config.hpp"
#include "l1rls/io/csv.hpp"
#include "l1rls/sim.hpp"
#include "l1rls/theory.hpp"

namespace l1rls::validation {

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double value = 0.0;      ///< the measured quantity compared against the threshold
    double threshold = 0.0;
    std::string detail;
};

inline std::string describe(const CheckResult& c) {
    std::ostringstream o;
    o << '[' << (c.pass ? "PASS" : "FAIL") << "] " << c.id << ". " << c.name << ": " << c.detail;
    return o.str();
}

// ---------------------------------------------------------------------------
// Reference RLS

/// Plain exponentially weighted RLS with the gain/Riccati update, written
/// independently of FilterState.
class ReferenceRls {
public:
    ReferenceRls(Eigen::Index taps, double lambda, double epsilon)
        : w_(Eigen::VectorXd::Zero(taps)), p_(Eigen::MatrixXd::Identity(taps, taps) * epsilon), lambda_(lambda) {}

    double update(const Eigen::VectorXd& x, double y) {
        const Eigen::RowVectorXd xt_p = x.transpose() * p_;
        const double alpha = lambda_ + xt_p.dot(x);
        const Eigen::VectorXd gain = (p_ * x) / alpha;
        const double err = y - w_.dot(x);
        w_ += gain * err;
        p_ = (p_ - gain * xt_p) / lambda_;
        return err;
    }

    const Eigen::VectorXd& weights() const { return w_; }

private:
    Eigen::VectorXd w_;
    Eigen::MatrixXd p_;
    double lambda_;
};

// ---------------------------------------------------------------------------
// Filter form checks

/// Seeded regression stream from the experiment's signal model.
struct RegressionStream {
    std::vector<Eigen::VectorXd> x;
    std::vector<double> y;
};

inline RegressionStream make_stream(const ExperimentConfig& cfg, std::size_t n, std::uint64_t seed) {
    RegressionStream s;
    const auto taps = static_cast<Eigen::Index>(cfg.taps);
    std::mt19937_64 rng(seed);
    Ar1Source src(cfg.rho, cfg.sigma_s2);
    src.reset(rng);
    std::normal_distribution<double> noise(0.0, std::sqrt(cfg.sigma_z2));
    Eigen::VectorXd x = Eigen::VectorXd::Zero(taps);
    for (Eigen::Index i = 0; i < taps; ++i) {
        x.tail(taps - 1) = x.head(taps - 1).eval();
        x(0) = src.next(rng);
    }
    for (std::size_t t = 0; t < n; ++t) {
        x.tail(taps - 1) = x.head(taps - 1).eval();
        x(0) = src.next(rng);
        s.x.push_back(x);
        s.y.push_back(x.dot(cfg.w_star) + noise(rng));
    }
    return s;
}

inline double relative_deviation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), 1e-300});
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

/// Max relative deviation between the original and compact weight trajectories.
inline CheckResult check_form_equivalence(const ExperimentConfig& cfg, std::size_t iters = 2000,
                                          std::uint64_t seed = 1, double tol = 1e-8) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto stream = make_stream(cfg, iters, seed);
    const auto taps = static_cast<Eigen::Index>(cfg.taps);
    auto orig = init_filter(taps, cfg.lambda, cfg.delta, cfg.epsilon);
    auto comp = init_filter(taps, cfg.lambda, cfg.delta, cfg.epsilon);
    double worst = 0.0;
    for (std::size_t t = 0; t < iters; ++t) {
        step_original(orig, stream.x[t], stream.y[t]);
        step_compact(comp, stream.x[t], stream.y[t]);
        worst = std::max(worst, relative_deviation(orig.w, comp.w));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CheckResult r{1, "form equivalence", worst <= tol && secs < 5.0, worst, tol, ""};
    std::ostringstream o;
    o << "max relative deviation " << worst << " over " << iters << " iterations (tol " << tol << "), " << secs
      << " s (limit 5 s)";
    r.detail = o.str();
    return r;
}

/// delta = 0: both l1-RLS forms against ReferenceRls.
inline CheckResult check_rls_reduction(ExperimentConfig cfg, std::size_t iters = 2000, std::uint64_t seed = 2,
                                       double tol = 1e-12) {
    cfg.delta = 0.0;
    const auto stream = make_stream(cfg, iters, seed);
    const auto taps = static_cast<Eigen::Index>(cfg.taps);
    auto orig = init_filter(taps, cfg.lambda, 0.0, cfg.epsilon);
    auto comp = init_filter(taps, cfg.lambda, 0.0, cfg.epsilon);
    ReferenceRls ref(taps, cfg.lambda, cfg.epsilon);
    double worst = 0.0;
    for (std::size_t t = 0; t < iters; ++t) {
        step_original(orig, stream.x[t], stream.y[t]);
        step_compact(comp, stream.x[t], stream.y[t]);
        ref.update(stream.x[t], stream.y[t]);
        worst = std::max({worst, relative_deviation(orig.w, ref.weights()), relative_deviation(comp.w, ref.weights())});
    }
    CheckResult r{2, "RLS reduction", worst <= tol, worst, tol, ""};
    std::ostringstream o;
    o << "max relative deviation from reference RLS " << worst << " over " << iters << " iterations (tol " << tol
      << ")";
    r.detail = o.str();
    return r;
}

// ---------------------------------------------------------------------------
// Monte Carlo sign moments

struct SignMomentEstimate {
    double sign_u = 0.0;        ///< E{sgn u}
    double sign_product = 0.0;  ///< E{sgn u sgn v}
    double value_sign = 0.0;    ///< E{u sgn v}
};

/// Sample estimate from n draws of (u, v) ~ N(mu, Sigma).
template <class Engine>
SignMomentEstimate sample_sign_moments(const GaussPairMoment& m, std::size_t n, Engine& rng) {
    std::normal_distribution<double> z;
    const double su = std::sqrt(m.sigma_u2());
    const double a = su > 0.0 ? m.rho_uv() / su : 0.0;
    const double b = std::sqrt(std::max(m.sigma_v2() - a * a, 0.0));
    double s_u = 0.0, s_uv = 0.0, u_sv = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double z1 = z(rng);
        const double z2 = z(rng);
        const double u = m.mu_u() + su * z1;
        const double v = m.mu_v() + a * z1 + b * z2;
        const double sv = sgn(v);
        s_u += sgn(u);
        s_uv += sgn(u) * sv;
        u_sv += u * sv;
    }
    const double inv = 1.0 / static_cast<double>(n);
    return {s_u * inv, s_uv * inv, u_sv * inv};
}

/// Random moment set with means in [-0.5, 0.5], variances in [0.05, 0.5] and
/// correlation coefficient in [-0.95, 0.95].
template <class Engine>
GaussPairMoment random_moment(Engine& rng) {
    std::uniform_real_distribution<double> mean(-0.5, 0.5), var(0.05, 0.5), corr(-0.95, 0.95);
    const double su2 = var(rng), sv2 = var(rng);
    return {mean(rng), mean(rng), su2, sv2, corr(rng) * std::sqrt(su2 * sv2)};
}

inline CheckResult check_lemma_oracles(std::size_t n_sets = 1000, std::size_t n_samples = 1000000,
                                       std::uint64_t seed = 3, double tol = 5e-3, double bvn_tol = 1e-8,
                                       double time_limit_s = 120.0) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(seed);
    double worst_sign = 0.0, worst_product = 0.0, worst_value = 0.0;
    for (std::size_t k = 0; k < n_sets; ++k) {
        const GaussPairMoment m = random_moment(rng);
        const SignMomentEstimate est = sample_sign_moments(m, n_samples, rng);
        worst_sign = std::max(worst_sign, std::abs(est.sign_u - expected_sign(m.mu_u(), std::sqrt(m.sigma_u2()))));
        worst_product = std::max(worst_product, std::abs(est.sign_product - expected_sign_product(m)));
        worst_value = std::max(worst_value, std::abs(est.value_sign - expected_value_times_sign(m)));
    }
    double worst_bvn = 0.0;
    for (int k = 0; k < 99; ++k) {
        const double rho = -0.98 + 0.02 * k;
        Eigen::Matrix2d s;
        s << 1.0, rho, rho, 1.0;
        const double exact = 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
        worst_bvn = std::max(worst_bvn, std::abs(bivariate_normal_cdf({0, 0}, {0, 0}, s) - exact));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double worst = std::max({worst_sign, worst_product, worst_value});
    CheckResult r{3, "sign-moment lemma oracles", worst <= tol && worst_bvn <= bvn_tol && secs < time_limit_s, worst,
                  tol, ""};
    std::ostringstream o;
    o << n_sets << " moment sets x " << n_samples << " samples: max |err| sign " << worst_sign << ", sign product "
      << worst_product << ", value x sign " << worst_value << " (tol " << tol << "); arcsine grid max |err| "
      << worst_bvn << " (tol " << bvn_tol << "); " << secs << " s (limit " << time_limit_s << " s)";
    r.detail = o.str();
    return r;
}

// ---------------------------------------------------------------------------
// Model versus simulation

inline double db_ratio(double a, double b) { return 10.0 * std::log10(a / b); }

struct ChannelDeviation {
    std::string channel;
    std::string unit;  ///< "dB" or "linear"
    double max_abs = 0.0;
    double mean_abs = 0.0;
    std::size_t argmax_n = 0;  ///< 1-based update index of the largest deviation
};

inline ChannelDeviation db_deviation(const std::string& name, const std::vector<double>& emp,
                                     const std::vector<double>& theo, std::size_t from_n = 1) {
    ChannelDeviation d{name, "dB", 0.0, 0.0, 0};
    std::size_t count = 0;
    for (std::size_t t = from_n - 1; t < emp.size(); ++t) {
        const double dev = std::abs(db_ratio(emp[t], theo[t]));
        d.mean_abs += dev;
        ++count;
        if (!(dev <= d.max_abs)) {
            d.max_abs = dev;
            d.argmax_n = t + 1;
        }
    }
    if (count) d.mean_abs /= static_cast<double>(count);
    return d;
}

inline ChannelDeviation mean_weight_deviation(const TrajectoryRecord& emp, const TrajectoryRecord& theo) {
    ChannelDeviation d{"mean_w", "linear", 0.0, 0.0, 0};
    const Eigen::MatrixXd diff = (emp.mean_w - theo.mean_w).cwiseAbs();
    d.mean_abs = diff.mean();
    Eigen::Index r = 0, c = 0;
    d.max_abs = diff.maxCoeff(&r, &c);
    d.argmax_n = static_cast<std::size_t>(r) + 1;
    return d;
}

inline void require_matching(const TrajectoryRecord& emp, const TrajectoryRecord& theo) {
    if (emp.size() != theo.size() || emp.taps() != theo.taps())
        throw io::SchemaError("trajectories differ in length or tap count");
}

/// Largest per-tap |mean over the final window of (emp - theo)|.
inline CheckResult check_mean_weights(const TrajectoryRecord& emp, const TrajectoryRecord& theo,
                                      const io::CompareTolerances& tol = {}) {
    require_matching(emp, theo);
    const auto n = static_cast<Eigen::Index>(emp.size());
    const auto window = std::min<Eigen::Index>(static_cast<Eigen::Index>(tol.terminal_window), n);
    const Eigen::RowVectorXd diff =
        (emp.mean_w.bottomRows(window) - theo.mean_w.bottomRows(window)).colwise().mean();
    Eigen::Index worst_tap = 0;
    const double worst = diff.cwiseAbs().maxCoeff(&worst_tap);
    CheckResult r{4, "mean weights", worst <= tol.mean_w_tolerance, worst, tol.mean_w_tolerance, ""};
    std::ostringstream o;
    o << "max over taps of |final-" << window << " mean deviation| " << worst << " at tap " << worst_tap + 1
      << " (tol " << tol.mean_w_tolerance << ")";
    r.detail = o.str();
    return r;
}

inline double window_mean(const std::vector<double>& v, std::size_t window) {
    window = std::min(window, v.size());
    double s = 0.0;
    for (std::size_t t = v.size() - window; t < v.size(); ++t) s += v[t];
    return s / static_cast<double>(window);
}

inline CheckResult check_mse_emse(const TrajectoryRecord& emp, const TrajectoryRecord& theo,
                                  const io::CompareTolerances& tol = {}) {
    require_matching(emp, theo);
    const auto mse = db_deviation("mse", emp.mse, theo.mse, tol.from_n);
    const auto emse = db_deviation("emse", emp.emse, theo.emse, tol.from_n);
    const double terminal =
        std::abs(db_ratio(window_mean(emp.mse, tol.terminal_window), window_mean(theo.mse, tol.terminal_window)));
    const double worst = std::max(mse.max_abs, emse.max_abs);
    CheckResult r{5, "MSE / EMSE curves", worst <= tol.db_tolerance && terminal <= tol.terminal_mse_db, worst,
                  tol.db_tolerance, ""};
    std::ostringstream o;
    o << "n >= " << tol.from_n << ": max |dB| MSE " << mse.max_abs << " (at n=" << mse.argmax_n << "), EMSE "
      << emse.max_abs << " (at n=" << emse.argmax_n << ") (tol " << tol.db_tolerance << " dB); terminal MSE (final "
      << tol.terminal_window << " mean) " << terminal << " dB (tol " << tol.terminal_mse_db << " dB)";
    r.detail = o.str();
    return r;
}

inline CheckResult check_msd(const TrajectoryRecord& emp, const TrajectoryRecord& theo,
                             const io::CompareTolerances& tol = {}) {
    require_matching(emp, theo);
    const auto msd = db_deviation("msd", emp.msd, theo.msd, tol.from_n);
    CheckResult r{6, "MSD curve", msd.max_abs <= tol.db_tolerance, msd.max_abs, tol.db_tolerance, ""};
    std::ostringstream o;
    o << "n >= " << tol.from_n << ": max |dB| " << msd.max_abs << " at n=" << msd.argmax_n << " (tol "
      << tol.db_tolerance << " dB)";
    r.detail = o.str();
    return r;
}

/// For each capture set, counts master seeds whose Henze-Zirkler test does not reject.
struct NormalityTally {
    std::vector<std::size_t> accepted;  ///< per capture set
    std::size_t repetitions = 0;
};

inline NormalityTally normality_tally(ExperimentConfig cfg, std::size_t repetitions, std::uint64_t first_seed) {
    cfg.n_runs = cfg.capture_samples;
    cfg.n_iters = *std::max_element(cfg.capture_instants.begin(), cfg.capture_instants.end());
    NormalityTally tally;
    tally.accepted.assign(cfg.capture_instants.size(), 0);
    tally.repetitions = repetitions;
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        cfg.seed = first_seed + rep;
        const auto reports = normality_audit(run_ensemble(cfg).pairs);
        for (std::size_t k = 0; k < reports.size(); ++k)
            if (reports[k].valid && !reports[k].test.reject) ++tally.accepted[k];
    }
    return tally;
}

inline CheckResult check_normality(const ExperimentConfig& cfg, const NormalityTally& tally,
                                   double min_fraction = 0.9) {
    const auto need = static_cast<std::size_t>(std::ceil(min_fraction * static_cast<double>(tally.repetitions)));
    bool pass = tally.repetitions > 0;
    std::size_t worst = tally.repetitions;
    std::ostringstream o;
    for (std::size_t k = 0; k < tally.accepted.size(); ++k) {
        pass = pass && tally.accepted[k] >= need;
        worst = std::min(worst, tally.accepted[k]);
        o << "pair (" << cfg.capture_pairs[k].first << "," << cfg.capture_pairs[k].second << ")@n="
          << cfg.capture_instants[k] << ": not rejected in " << tally.accepted[k] << "/" << tally.repetitions << "; ";
    }
    o << "required " << need << "/" << tally.repetitions;
    return {7, "bivariate normality of weight errors", pass, static_cast<double>(worst), static_cast<double>(need),
            o.str()};
}

/// gamma = 0 covariance recursion with E{Phi} pinned at R_x / (1 - lambda)
/// against sigma_z^2 (1 - lambda)^2 / (1 - lambda^2) R_x^{-1}.
inline CheckResult check_fixed_point(const SystemSpec& base, double tol = 1e-8, std::size_t max_iters = 20000) {
    SystemSpec spec = base;
    spec.delta = 0.0;
    spec.gamma = 0.0;
    const Eigen::MatrixXd pinned = spec.R_x / (1.0 - spec.lambda);
    const Eigen::MatrixXd r_inv = spec.R_x.inverse();
    const Eigen::MatrixXd expected = spec.sigma_z2 * (1.0 - spec.lambda) * (1.0 - spec.lambda) /
                                     (1.0 - spec.lambda * spec.lambda) * r_inv;
    TheoryState ts{pinned, Eigen::VectorXd::Zero(spec.taps()), Eigen::MatrixXd::Zero(spec.taps(), spec.taps()), 0};
    std::size_t iters = 0;
    for (; iters < max_iters; ++iters) {
        Eigen::MatrixXd next = covariance_step(ts, spec, pinned);
        const double change = (next - ts.K).norm() / std::max(next.norm(), 1e-300);
        ts.K = std::move(next);
        ++ts.n;
        if (change < 1e-15) break;
    }
    const double rel = (ts.K - expected).norm() / expected.norm();
    CheckResult r{8, "covariance fixed point", rel <= tol, rel, tol, ""};
    std::ostringstream o;
    o << "relative Frobenius error " << rel << " after " << iters << " iterations (tol " << tol << ")";
    r.detail = o.str();
    return r;
}

}  // namespace l1rls::validation
