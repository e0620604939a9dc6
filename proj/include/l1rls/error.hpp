#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace l1rls {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (NaN input, negative sigma).
class DomainError : public Error {
public:
    using Error::Error;
};

/// 2x2 covariance that is not positive definite even after clamping.
class DegenerateCovarianceError : public Error {
public:
    using Error::Error;
};

/// Sample whose covariance matrix is singular.
class DegenerateSampleError : public Error {
public:
    using Error::Error;
};

/// Invalid hyperparameters or experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Non-finite value produced inside a recursion. Carries the iteration and,
/// when raised from an ensemble, the run index.
class NumericalFailure : public Error {
public:
    static constexpr std::size_t kNoRun = static_cast<std::size_t>(-1);

    NumericalFailure(const std::string& what, std::size_t iteration, std::size_t run = kNoRun)
        : Error(compose(what, iteration, run)), iteration_(iteration), run_(run) {}

    std::size_t iteration() const noexcept { return iteration_; }
    std::size_t run() const noexcept { return run_; }

private:
    static std::string compose(const std::string& what, std::size_t iteration, std::size_t run) {
        std::string msg = what + " (iteration " + std::to_string(iteration);
        if (run != kNoRun) msg += ", run " + std::to_string(run);
        return msg + ")";
    }

    std::size_t iteration_;
    std::size_t run_;
};

}  // namespace l1rls
