#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/LU>

#include "l1rls/filter.hpp"
#include "l1rls/validation.hpp"

using namespace l1rls;

namespace {

ExperimentConfig preset() { return reference_preset(); }

double rel_dev(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(a.cwiseAbs().maxCoeff(), 1e-300);
}

}  // namespace

TEST(InitFilter, ReferenceConstants) {
    const auto s = init_filter(32, 0.995, 0.25, 0.1);
    EXPECT_NEAR(s.gamma, -0.00125, 1e-15);
    EXPECT_TRUE(s.P.isApprox(0.1 * Eigen::MatrixXd::Identity(32, 32)));
    EXPECT_TRUE(s.w.isZero());
    EXPECT_EQ(s.n, 0u);
    EXPECT_EQ(init_filter(4, 0.9, 0.0, 1.0).gamma, 0.0);
}

TEST(InitFilter, RejectsInvalidHyperparameters) {
    EXPECT_THROW(init_filter(4, 1.0, 0.1, 0.1), ConfigError);
    EXPECT_THROW(init_filter(4, 0.0, 0.1, 0.1), ConfigError);
    EXPECT_THROW(init_filter(4, 0.9, -0.1, 0.1), ConfigError);
    EXPECT_THROW(init_filter(4, 0.9, 0.1, 0.0), ConfigError);
    EXPECT_THROW(init_filter(0, 0.9, 0.1, 0.1), ConfigError);
    EXPECT_THROW(init_filter(4, 0.9, 0.1, 0.1, Eigen::VectorXd::Zero(3)), ConfigError);
}

TEST(StepOriginal, ZeroInputOnlyAttractsAndScalesP) {
    Eigen::VectorXd w0(4);
    w0 << 0.5, -0.2, 0.0, 1.0;
    auto s = init_filter(4, 0.98, 0.3, 0.5, w0);
    s.P(0, 1) = s.P(1, 0) = 0.05;
    const Eigen::MatrixXd p_prev = s.P;
    const Eigen::VectorXd sign(Eigen::Vector4d(1, -1, 0, 1));
    const auto out = step_original(s, Eigen::VectorXd::Zero(4), 0.7);
    EXPECT_EQ(out.e, 0.7);
    EXPECT_LT((s.w - (w0 + s.gamma / s.lambda * p_prev * sign)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((s.P - p_prev / 0.98).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(s.n, 1u);
}

TEST(StepCompact, ZeroWeightsGiveNoAttraction) {
    auto a = init_filter(3, 0.99, 0.5, 0.2);
    auto b = init_filter(3, 0.99, 0.0, 0.2);
    const Eigen::Vector3d x(0.3, -1.0, 2.0);
    step_compact(a, x, 1.0);
    step_compact(b, x, 1.0);
    EXPECT_EQ(a.w, b.w);
}

TEST(StepForms, SingleStepAgreement) {
    const auto cfg = preset();
    const auto stream = validation::make_stream(cfg, 1, 41);
    Eigen::VectorXd w0 = 0.1 * Eigen::VectorXd::Ones(32);
    w0(3) = -0.4;
    auto a = init_filter(32, cfg.lambda, cfg.delta, cfg.epsilon, w0);
    auto b = a;
    const auto oa = step_original(a, stream.x[0], stream.y[0]);
    const auto ob = step_compact(b, stream.x[0], stream.y[0]);
    EXPECT_EQ(oa.e, ob.e);
    EXPECT_LE(rel_dev(a.w, b.w), 1e-10);
    EXPECT_LE((oa.k - ob.k).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(StepForms, EquivalenceOver2000Iterations) {
    const auto r = validation::check_form_equivalence(preset(), 2000, 42);
    EXPECT_LE(r.value, 1e-8) << r.detail;
}

TEST(StepForms, FixedAndDynamicSizesAgree) {
    const auto cfg = preset();
    const auto stream = validation::make_stream(cfg, 500, 43);
    auto d = init_filter(32, cfg.lambda, cfg.delta, cfg.epsilon);
    auto f = init_filter<32>(32, cfg.lambda, cfg.delta, cfg.epsilon);
    for (std::size_t t = 0; t < stream.x.size(); ++t) {
        step_compact(d, stream.x[t], stream.y[t]);
        step_compact(f, Eigen::Matrix<double, 32, 1>(stream.x[t]), stream.y[t]);
    }
    EXPECT_LE(rel_dev(d.w, Eigen::VectorXd(f.w)), 1e-12);
}

// delta = 0 against the batch weighted least-squares solution
// w_n = Phi_n^{-1} sum_i lambda^{n-i} x_i y_i with Phi_{-1} = I / epsilon.
TEST(StepForms, RlsReductionMatchesBatchLeastSquares) {
    auto cfg = preset();
    cfg.delta = 0.0;
    const auto stream = validation::make_stream(cfg, 300, 44);
    auto a = init_filter(32, cfg.lambda, 0.0, cfg.epsilon);
    auto b = a;
    Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(32, 32) / cfg.epsilon;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(32);
    for (std::size_t t = 0; t < stream.x.size(); ++t) {
        step_original(a, stream.x[t], stream.y[t]);
        step_compact(b, stream.x[t], stream.y[t]);
        phi = cfg.lambda * phi + stream.x[t] * stream.x[t].transpose();
        rhs = cfg.lambda * rhs + stream.x[t] * stream.y[t];
    }
    const Eigen::VectorXd batch = phi.partialPivLu().solve(rhs);
    EXPECT_LE(rel_dev(a.w, batch), 1e-9);
    EXPECT_LE(rel_dev(b.w, batch), 1e-9);
}

TEST(StepForms, RlsReductionMatchesReference) {
    const auto r = validation::check_rls_reduction(preset(), 2000, 45);
    EXPECT_LE(r.value, 1e-12) << r.detail;
}

TEST(StepForms, PSymmetryPreserved) {
    const auto cfg = preset();
    const auto stream = validation::make_stream(cfg, 2000, 46);
    auto a = init_filter(32, cfg.lambda, cfg.delta, cfg.epsilon);
    auto b = a;
    for (std::size_t t = 0; t < stream.x.size(); ++t) {
        step_original(a, stream.x[t], stream.y[t]);
        step_compact(b, stream.x[t], stream.y[t]);
        ASSERT_LE((a.P - a.P.transpose()).cwiseAbs().maxCoeff() / a.P.cwiseAbs().maxCoeff(), 1e-9);
        ASSERT_LE((b.P - b.P.transpose()).cwiseAbs().maxCoeff() / b.P.cwiseAbs().maxCoeff(), 1e-9);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b.P);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
}

TEST(StepForms, AttractorPullsTowardZero) {
    const auto cfg = preset();
    const auto stream = validation::make_stream(cfg, 400, 47);
    auto s = init_filter(32, cfg.lambda, cfg.delta, cfg.epsilon);
    for (std::size_t t = 0; t < stream.x.size(); ++t) {
        step_compact(s, stream.x[t], stream.y[t]);
        const Eigen::VectorXd sg = s.w.unaryExpr([](double v) { return sgn(v); });
        EXPECT_GE(sg.dot(-s.gamma * (s.P * sg)), 0.0);
    }
}

TEST(StepForms, NonFiniteInputRaisesWithIteration) {
    auto s = init_filter(3, 0.9, 0.1, 1.0);
    step_compact(s, Eigen::Vector3d(1, 0, 0), 1.0);
    try {
        step_compact(s, Eigen::Vector3d(std::nan(""), 0, 0), 1.0);
        FAIL() << "expected NumericalFailure";
    } catch (const NumericalFailure& e) {
        EXPECT_EQ(e.iteration(), 1u);
    }
}

namespace {

double phi_deviation(const ExperimentConfig& cfg, std::size_t steps, std::uint64_t seed) {
    const auto stream = validation::make_stream(cfg, steps, seed);
    auto s = init_filter(static_cast<Eigen::Index>(cfg.taps), cfg.lambda, cfg.delta, cfg.epsilon);
    std::vector<Eigen::MatrixXd> ps;
    for (std::size_t t = 0; t < steps; ++t) {
        step_compact(s, stream.x[t], stream.y[t]);
        ps.push_back(s.P);
    }
    return phi_recursion_check<Eigen::MatrixXd, Eigen::VectorXd>(ps, stream.x, cfg.epsilon, cfg.lambda);
}

}  // namespace

TEST(PhiRecursion, OneStep) { EXPECT_LE(phi_deviation(preset(), 1, 48), 1e-12); }

TEST(PhiRecursion, ReferenceConfiguration2000Steps) { EXPECT_LE(phi_deviation(preset(), 2000, 49), 1e-6); }

TEST(PhiRecursion, SmallInstance) {
    ExperimentConfig cfg = preset();
    cfg.taps = 4;
    cfg.lambda = 0.9;
    cfg.w_star = Eigen::Vector4d(0.5, 0.0, -0.3, 0.1);
    EXPECT_LE(phi_deviation(cfg, 300, 50), 1e-8);
}
