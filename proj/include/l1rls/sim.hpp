#pragma once

// Monte Carlo ground truth: AR(1) input through a tapped delay line, a sparse
// FIR system with additive Gaussian noise, and ensemble statistics of the
// l1-RLS learning curves.

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "l1rls/error.hpp"
#include "l1rls/experiment.hpp"
#include "l1rls/filter.hpp"
#include "l1rls/henze_zirkler.hpp"
#include "l1rls/trajectory.hpp"

namespace l1rls {

// ---------------------------------------------------------------------------
// Seeding

/// SplitMix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Child seed for run `run` of an ensemble with master seed `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run) noexcept {
    return splitmix64(splitmix64(master) ^ splitmix64(run + 0x632be59bd9b4e019ULL));
}

// ---------------------------------------------------------------------------
// Input model

/// x_n = rho x_{n-1} + s_n with s_n ~ N(0, sigma_s2); starts from the
/// stationary distribution.
class Ar1Source {
public:
    Ar1Source(double rho, double sigma_s2) : rho_(rho), innovation_(0.0, std::sqrt(sigma_s2)) {
        if (!(std::abs(rho) < 1.0)) throw ConfigError("AR(1): |rho| must be < 1");
        if (!(sigma_s2 > 0.0)) throw ConfigError("AR(1): sigma_s2 must be > 0");
    }

    template <class Engine>
    void reset(Engine& rng) {
        std::normal_distribution<double> stationary(0.0, std::sqrt(innovation_.stddev() * innovation_.stddev() /
                                                                   (1.0 - rho_ * rho_)));
        state_ = stationary(rng);
    }

    template <class Engine>
    double next(Engine& rng) {
        const double out = state_;
        state_ = rho_ * state_ + innovation_(rng);
        return out;
    }

private:
    double rho_;
    std::normal_distribution<double> innovation_;
    double state_ = 0.0;
};

inline std::vector<double> ar1_stream(double rho, double sigma_s2, std::size_t n, std::uint64_t seed) {
    Ar1Source src(rho, sigma_s2);
    std::mt19937_64 rng(seed);
    src.reset(rng);
    std::vector<double> out(n);
    for (auto& v : out) v = src.next(rng);
    return out;
}

/// Correlation matrix of an L-tap delay line over a stationary AR(1) signal:
/// [R]_ij = sigma_x2 rho^|i-j|.
inline Eigen::MatrixXd rx_toeplitz(double rho, double sigma_x2, Eigen::Index taps) {
    if (!(std::abs(rho) < 1.0)) throw ConfigError("rx_toeplitz: |rho| must be < 1");
    Eigen::MatrixXd r(taps, taps);
    for (Eigen::Index i = 0; i < taps; ++i)
        for (Eigen::Index j = 0; j < taps; ++j)
            r(i, j) = sigma_x2 * std::pow(rho, static_cast<double>(std::abs(i - j)));
    return r;
}

// ---------------------------------------------------------------------------
// Compensated accumulation

struct NeumaierSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) noexcept {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    void merge(const NeumaierSum& other) noexcept {
        add(other.sum);
        comp += other.comp;
    }
    double value() const noexcept { return sum + comp; }
};

// ---------------------------------------------------------------------------
// Single run

/// Per-iteration record of one realization. Row t corresponds to update n = t + 1.
struct RunTrace {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w;  ///< n_iters x L weights after each update
    std::vector<double> sq_error;  ///< e_n^2
    std::vector<double> sq_excess; ///< (x_n^T w~_{n-1})^2
    std::vector<double> sq_dev;    ///< ||w~_n||^2
};

namespace detail {

template <int Taps>
RunTrace simulate_run_impl(const ExperimentConfig& cfg, std::size_t run, Form form) {
    using Vector = typename FilterState<Taps>::Vector;
    const auto taps = static_cast<Eigen::Index>(cfg.taps);
    std::mt19937_64 rng(derive_seed(cfg.seed, run));
    Ar1Source source(cfg.rho, cfg.sigma_s2);
    std::normal_distribution<double> noise(0.0, std::sqrt(cfg.sigma_z2));
    source.reset(rng);

    const Vector w_star = cfg.w_star;
    Vector x = Vector::Zero(taps);
    // Fill the delay line with L warm-up samples so the first regressor is stationary.
    for (Eigen::Index i = 0; i < taps; ++i) {
        x.tail(taps - 1) = x.head(taps - 1).eval();
        x(0) = source.next(rng);
    }

    auto state = init_filter<Taps>(taps, cfg.lambda, cfg.delta, cfg.epsilon);
    RunTrace trace;
    trace.w.resize(static_cast<Eigen::Index>(cfg.n_iters), taps);
    trace.sq_error.resize(cfg.n_iters);
    trace.sq_excess.resize(cfg.n_iters);
    trace.sq_dev.resize(cfg.n_iters);

    for (std::size_t t = 0; t < cfg.n_iters; ++t) {
        x.tail(taps - 1) = x.head(taps - 1).eval();
        x(0) = source.next(rng);
        const double z = cfg.sigma_z2 > 0.0 ? noise(rng) : 0.0;
        const double y = x.dot(w_star) + z;
        const double excess = x.dot(state.w - w_star);

        StepOutput<Taps> out;
        try {
            out = step(state, x, y, form);
        } catch (const NumericalFailure& f) {
            throw NumericalFailure("l1-RLS update produced a non-finite value", f.iteration(), run);
        }
        const auto row = static_cast<Eigen::Index>(t);
        trace.w.row(row) = state.w.transpose();
        trace.sq_error[t] = out.e * out.e;
        trace.sq_excess[t] = excess * excess;
        trace.sq_dev[t] = (state.w - w_star).squaredNorm();
    }
    return trace;
}

}  // namespace detail

/// Runs realization `run` of the experiment (seeded from cfg.seed and run).
inline RunTrace simulate_run(const ExperimentConfig& cfg, std::size_t run, Form form = Form::compact) {
    if (cfg.taps == 32) return detail::simulate_run_impl<32>(cfg, run, form);
    return detail::simulate_run_impl<Eigen::Dynamic>(cfg, run, form);
}

/// Compensated running sums of RunTrace channels.
class EnsembleAccumulator {
public:
    EnsembleAccumulator(std::size_t n_iters, Eigen::Index taps)
        : n_iters_(n_iters), taps_(taps), width_(static_cast<std::size_t>(taps) + 3),
          sums_(n_iters * width_) {}

    void add(const RunTrace& tr) {
        for (std::size_t t = 0; t < n_iters_; ++t) {
            NeumaierSum* row = &sums_[t * width_];
            for (Eigen::Index i = 0; i < taps_; ++i) row[i].add(tr.w(static_cast<Eigen::Index>(t), i));
            row[taps_].add(tr.sq_dev[t]);
            row[taps_ + 1].add(tr.sq_error[t]);
            row[taps_ + 2].add(tr.sq_excess[t]);
        }
        ++count_;
    }

    void merge(const EnsembleAccumulator& other) {
        for (std::size_t k = 0; k < sums_.size(); ++k) sums_[k].merge(other.sums_[k]);
        count_ += other.count_;
    }

    std::size_t count() const noexcept { return count_; }

    TrajectoryRecord finish(double initial_msd) const {
        TrajectoryRecord rec(Provenance::empirical, n_iters_, taps_);
        const double inv = count_ ? 1.0 / static_cast<double>(count_) : 0.0;
        for (std::size_t t = 0; t < n_iters_; ++t) {
            const NeumaierSum* row = &sums_[t * width_];
            for (Eigen::Index i = 0; i < taps_; ++i)
                rec.mean_w(static_cast<Eigen::Index>(t), i) = row[i].value() * inv;
            rec.msd[t] = row[taps_].value() * inv;
            rec.mse[t] = row[taps_ + 1].value() * inv;
            rec.emse[t] = row[taps_ + 2].value() * inv;
        }
        rec.initial_msd = initial_msd;
        return rec;
    }

private:
    std::size_t n_iters_;
    Eigen::Index taps_;
    std::size_t width_;
    std::vector<NeumaierSum> sums_;
    std::size_t count_ = 0;
};

// ---------------------------------------------------------------------------
// Ensemble

/// Draws ([w~_n]_i, [w~_n]_j) at one instant, one row per independent run.
struct PairSampleSet {
    std::size_t instant = 0;  ///< update index n (1-based)
    std::size_t i = 0;        ///< 1-based tap index
    std::size_t j = 0;
    Eigen::MatrixXd samples;  ///< rows x 2
};

struct EnsembleOptions {
    Form form = Form::compact;
    unsigned threads = 0;           ///< 0: hardware concurrency
    std::size_t runs_per_chunk = 10;  ///< reduction granularity; fixed so results do not depend on threads
};

struct EnsembleResult {
    TrajectoryRecord empirical;
    std::vector<PairSampleSet> pairs;
};

inline EnsembleResult run_ensemble(const ExperimentConfig& cfg, const EnsembleOptions& opts = {}) {
    cfg.validate();
    const auto taps = static_cast<Eigen::Index>(cfg.taps);
    const std::size_t chunk = std::max<std::size_t>(1, opts.runs_per_chunk);
    const std::size_t n_chunks = (cfg.n_runs + chunk - 1) / chunk;
    unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_chunks));

    const std::size_t captured = std::min(cfg.capture_samples, cfg.n_runs);
    EnsembleResult result;
    for (std::size_t k = 0; k < cfg.capture_instants.size(); ++k) {
        const auto [i, j] = cfg.capture_pairs[k];
        result.pairs.push_back(
            {cfg.capture_instants[k], i, j, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(captured), 2)});
    }

    auto run_chunk = [&](std::size_t c, EnsembleAccumulator& acc) {
        const std::size_t first = c * chunk;
        const std::size_t last = std::min(cfg.n_runs, first + chunk);
        for (std::size_t r = first; r < last; ++r) {
            const RunTrace tr = simulate_run(cfg, r, opts.form);
            acc.add(tr);
            if (r < captured) {
                for (auto& set : result.pairs) {
                    const auto row = static_cast<Eigen::Index>(set.instant - 1);
                    const auto i = static_cast<Eigen::Index>(set.i - 1);
                    const auto j = static_cast<Eigen::Index>(set.j - 1);
                    set.samples(static_cast<Eigen::Index>(r), 0) = tr.w(row, i) - cfg.w_star(i);
                    set.samples(static_cast<Eigen::Index>(r), 1) = tr.w(row, j) - cfg.w_star(j);
                }
            }
        }
    };

    EnsembleAccumulator total(cfg.n_iters, taps);
    // Chunks are processed in waves of `threads` and merged in chunk order,
    // so the reduction order is fixed.
    for (std::size_t wave = 0; wave < n_chunks; wave += threads) {
        const std::size_t in_wave = std::min<std::size_t>(threads, n_chunks - wave);
        std::vector<EnsembleAccumulator> partial(in_wave, EnsembleAccumulator(cfg.n_iters, taps));
        std::vector<std::exception_ptr> errors(in_wave);
        if (in_wave == 1) {
            run_chunk(wave, partial[0]);
        } else {
            std::vector<std::jthread> pool;
            pool.reserve(in_wave);
            for (std::size_t k = 0; k < in_wave; ++k) {
                pool.emplace_back([&, k] {
                    try {
                        run_chunk(wave + k, partial[k]);
                    } catch (...) {
                        errors[k] = std::current_exception();
                    }
                });
            }
            pool.clear();
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        }
        for (auto& p : partial) total.merge(p);
    }
    result.empirical = total.finish(cfg.w_star.squaredNorm());
    return result;
}

// ---------------------------------------------------------------------------
// Normality audit

struct NormalityReport {
    std::size_t instant = 0;
    std::size_t i = 0;
    std::size_t j = 0;
    std::size_t samples = 0;
    bool valid = false;  ///< false when the test could not be applied
    HenzeZirklerResult test;
    std::string note;
};

inline std::vector<NormalityReport> normality_audit(const std::vector<PairSampleSet>& sets,
                                                    double significance = 0.05) {
    std::vector<NormalityReport> out;
    out.reserve(sets.size());
    for (const auto& set : sets) {
        NormalityReport rep;
        rep.instant = set.instant;
        rep.i = set.i;
        rep.j = set.j;
        rep.samples = static_cast<std::size_t>(set.samples.rows());
        if (rep.samples < 100) {
            rep.note = "fewer than 100 samples";
        } else {
            try {
                rep.test = henze_zirkler(SampleMatrix(set.samples), significance);
                rep.valid = true;
            } catch (const Error& e) {
                rep.note = e.what();
            }
        }
        out.push_back(std::move(rep));
    }
    return out;
}

}  // namespace l1rls
