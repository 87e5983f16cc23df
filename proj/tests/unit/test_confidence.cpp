#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "galoc/confidence.hpp"
#include "test_support.hpp"

namespace galoc {
namespace {

using testing::Gen;

std::vector<Eigen::VectorXd> constant_stream(int n, const Eigen::VectorXd& v) { return std::vector(n, v); }

TEST(Failure, ConstantStreamIsFailed) {
  const auto h = constant_stream(9, Eigen::Vector3d(1, 2, 3));
  const auto sf = failure_status(h, 0.01, 1e-6);
  EXPECT_TRUE(sf.isApprox(Eigen::VectorXd::Constant(3, 1e-6)));
}

TEST(Failure, ActiveStreamIsValid) {
  const double eps_f = 0.02;
  std::vector<Eigen::VectorXd> h;
  // total variation per axis = 10 eps_f over 8 steps
  for (int k = 0; k < 9; ++k) h.push_back(Eigen::Vector3d::Constant((k % 2) * 10.0 * eps_f / 8.0));
  EXPECT_TRUE(failure_status(h, eps_f, 1e-6).isApprox(Eigen::VectorXd::Ones(3)));
}

TEST(Failure, OneFrozenAxisDisablesWholeSensor) {
  std::vector<Eigen::VectorXd> h;
  for (int k = 0; k < 9; ++k) h.push_back(Eigen::Vector3d(k * 0.1, 0.5, -k * 0.1));
  EXPECT_TRUE(failure_status(h, 0.01, 1e-6).isApprox(Eigen::VectorXd::Constant(3, 1e-6)));
  const auto per_axis = failure_status(h, 0.01, 1e-6, true);
  EXPECT_EQ(per_axis, Eigen::Vector3d(1.0, 1e-6, 1.0));
}

TEST(Failure, ShortHistoryIsNeverFailed) {
  EXPECT_EQ(failure_status(constant_stream(1, Eigen::VectorXd::Zero(2)), 1.0, 1e-6), Eigen::VectorXd::Ones(2));
  EXPECT_EQ(failure_status({}, 1.0, 1e-6).size(), 0);
}

TEST(Quality, SigmoidPoints) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  EXPECT_NEAR(quality_status(Eigen::VectorXd::Constant(1, 0.5), zero, 10.0, 0.5)[0], 0.5, 1e-15);
  EXPECT_NEAR(quality_status(zero, zero, 10.0, 0.5)[0], 1.0 - 1.0 / (1.0 + std::exp(5.0)), 1e-15);
  EXPECT_NEAR(quality_status(zero, zero, 10.0, 0.5)[0], 0.99331, 1e-5);
  EXPECT_LT(quality_status(Eigen::VectorXd::Constant(1, 1e3), zero, 10.0, 0.5)[0], 1e-12);
  // sign of the difference does not matter
  EXPECT_EQ(quality_status(Eigen::VectorXd::Constant(1, -0.3), zero, 10.0, 0.5)[0],
            quality_status(Eigen::VectorXd::Constant(1, 0.3), zero, 10.0, 0.5)[0]);
}

TEST(MovingVariance, Cases) {
  const std::vector<Eigen::VectorXd> zeros(9, Eigen::VectorXd::Zero(3));
  EXPECT_TRUE(moving_variance(zeros, 3).isZero());
  const Eigen::Vector3d r(0.1, -0.2, 0.3);
  const std::vector<Eigen::VectorXd> same(9, r);
  EXPECT_TRUE(moving_variance(same, 3).isApprox(9.0 * r * r.transpose(), 1e-14));
}

TEST(MovingVariance, WhiteNoiseConvergesToSigmaSquared) {
  Gen g(61);
  const double sigma = 0.3;
  const int tw = 8, s = 3, windows = 4000;
  double acc = 0.0;
  for (int w = 0; w < windows; ++w) {
    std::vector<Eigen::VectorXd> r;
    for (int k = 0; k <= tw; ++k) r.push_back(Eigen::Vector3d(g.normal(sigma), g.normal(sigma), g.normal(sigma)));
    acc += moving_variance(r, s).trace() / (tw + 1) / s;
  }
  EXPECT_NEAR(acc / windows, sigma * sigma, 0.02 * sigma * sigma);
}

std::array<Eigen::MatrixXd, kConfidenceSensors> zero_variances() {
  std::array<Eigen::MatrixXd, kConfidenceSensors> P;
  for (int i = 0; i < kConfidenceSensors; ++i) P[i] = Eigen::MatrixXd::Zero(kSensorDims[i], kSensorDims[i]);
  return P;
}

TEST(Gamma, ZeroVarianceGivesOnes) {
  const auto gamma = normalized_gamma(zero_variances());
  for (int i = 0; i < kConfidenceSensors; ++i) EXPECT_EQ(gamma[i], Eigen::VectorXd::Ones(kSensorDims[i]));
}

TEST(Gamma, SingleAxisSelfNormalizes) {
  auto P = zero_variances();
  P[1](0, 0) = 2.5;
  const auto gamma = normalized_gamma(P);
  EXPECT_EQ(gamma[1][0], 0.0);
  EXPECT_EQ(gamma[0], Eigen::VectorXd::Ones(6));
}

TEST(Gamma, TwoSensorSubstitution) {
  auto P = zero_variances();
  P[3](0, 0) = 1.0;
  P[4].diagonal() << 1.0, 1.0, 1.0;
  const auto gamma = normalized_gamma(P);
  EXPECT_LT((gamma[3] - Eigen::Vector3d(0.75, 1.0, 1.0)).norm(), 1e-15);
  EXPECT_LT((gamma[4] - Eigen::Vector3d::Constant(0.75)).norm(), 1e-15);
}

TEST(Weights, IdentityFactorsSplitUniformly) {
  SensorDiagonals ones;
  for (int i = 0; i < kConfidenceSensors; ++i) ones[i] = Eigen::VectorXd::Ones(kSensorDims[i]);
  const ConfidenceParams p;
  const auto w = assemble_weights(ones, ones, ones, p);
  for (int i = 0; i < kConfidenceSensors; ++i) {
    EXPECT_LT((w.sensor[i] - Eigen::VectorXd::Constant(kSensorDims[i], p.xi / kTotalWeightDim)).norm(), 1e-15);
  }
  EXPECT_NEAR(w.total(), p.xi, 1e-12);
  EXPECT_FALSE(w.degraded);
}

TEST(Weights, FailedSensorShareIsNearZero) {
  SensorDiagonals ones;
  for (int i = 0; i < kConfidenceSensors; ++i) ones[i] = Eigen::VectorXd::Ones(kSensorDims[i]);
  auto sf = ones;
  sf[4] = Eigen::VectorXd::Constant(3, 1e-6);
  const auto w = assemble_weights(sf, ones, ones, ConfidenceParams{});
  EXPECT_LT(w.trace(Sensor::Visual) / w.total(), 1e-6);
}

TEST(Weights, AllFailedFallsBackToPrior) {
  SensorDiagonals z;
  for (int i = 0; i < kConfidenceSensors; ++i) z[i] = Eigen::VectorXd::Zero(kSensorDims[i]);
  const auto w = assemble_weights(z, z, z, ConfidenceParams{});
  EXPECT_TRUE(w.degraded);
  EXPECT_EQ(w.total(), 0.0);
  EXPECT_GT(w.prior.minCoeff(), 0.0);
}

TEST(Weights, DimensionMismatchThrows) {
  SensorDiagonals ones;
  for (int i = 0; i < kConfidenceSensors; ++i) ones[i] = Eigen::VectorXd::Ones(kSensorDims[i]);
  auto bad = ones;
  bad[2] = Eigen::VectorXd::Ones(2);
  EXPECT_THROW(assemble_weights(bad, ones, ones, ConfidenceParams{}), std::invalid_argument);
}

// Randomized factor sets drawn the way the estimator produces them:
// S_f in {1, eps}, S_q in (0, 1), gamma from random moving variances.
TEST(Weights, RandomFactorsNormalizeToXi) {
  Gen g(62);
  ConfidenceParams p;
  for (int trial = 0; trial < 1000; ++trial) {
    p.xi = g.uniform(0.5, 50.0);
    SensorDiagonals sf, sq;
    std::array<Eigen::MatrixXd, kConfidenceSensors> P;
    for (int i = 0; i < kConfidenceSensors; ++i) {
      const int d = kSensorDims[i];
      const bool failed = g.uniform(0, 1) < 0.2;
      sf[i] = Eigen::VectorXd::Constant(d, failed ? p.eps : 1.0);
      sq[i] = quality_status(g.vector(d, -1, 1), g.vector(d, -1, 1), p.m, p.omega0);
      const Eigen::MatrixXd L = Eigen::MatrixXd::Random(d, d) * g.uniform(0.0, 2.0);
      P[i] = L * L.transpose();
    }
    const auto gamma = normalized_gamma(P);
    for (int i = 0; i < kConfidenceSensors; ++i) {
      EXPECT_GE(gamma[i].minCoeff(), 0.0);
      EXPECT_LE(gamma[i].maxCoeff(), 1.0);
      EXPECT_GT(sq[i].minCoeff(), 0.0);
      EXPECT_LT(sq[i].maxCoeff(), 1.0);
    }
    const auto w = assemble_weights(sf, sq, gamma, p);
    if (w.degraded) continue;
    EXPECT_NEAR(w.total(), p.xi, 1e-9 * p.xi);
    for (const auto& s : w.sensor) EXPECT_GE(s.minCoeff(), 0.0);
  }
}

TEST(Params, ThresholdsAndValidation) {
  ConfidenceParams p;
  p.set_failure_thresholds({0.1, 0.05, 0.01, 0.05, 0.02});
  EXPECT_NEAR(p.eps_f[1], 0.01 * 9 * 0.05, 1e-15);
  EXPECT_NO_THROW(p.validate());
  p.eps = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.eps = 2e-3;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.tw = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.m = -1;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace galoc
