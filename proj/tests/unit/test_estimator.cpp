#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <vector>

#include "galoc/estimator.hpp"
#include "galoc/sensor_models.hpp"
#include "test_support.hpp"

namespace galoc {
namespace {

using testing::Gen;

WindowSequences random_window(Gen& g, int tw, bool with_zero_rows = false) {
  WindowSequences s;
  DynamicsParams dp;
  dp.drag = Vec3(g.uniform(0, 1), g.uniform(0, 1), g.uniform(0, 1));
  const auto st = discretize(dp);
  for (int k = 0; k <= tw; ++k) {
    Vector6d prior;
    prior << g.vec3(-2, 2), g.vec3(-1, 1);
    s.priors.push_back(prior);
    Vector8d y;
    for (int j = 0; j < 8; ++j) y[j] = g.uniform(-2, 2);
    s.measurements.push_back(y);
    s.observations.push_back(assemble_observation(g.unit()).C);
    Vector6d pw;
    for (int j = 0; j < 6; ++j) pw[j] = g.uniform(0.05, 2.0);
    s.prior_weights.push_back(pw);
    Vector8d mw;
    for (int j = 0; j < 8; ++j) mw[j] = (with_zero_rows && g.uniform(0, 1) < 0.3) ? 0.0 : g.uniform(0.05, 2.0);
    s.measurement_weights.push_back(mw);
    s.times.push_back(0.04 * k + g.uniform(-0.005, 0.005));
    if (k > 0) {
      s.inputs.push_back(g.vec3(-1, 1));
      s.transitions.push_back(st);
      Vector6d tw6;
      for (int j = 0; j < 6; ++j) tw6[j] = g.uniform(0.05, 2.0);
      s.transfer_weights.push_back(tw6);
    }
  }
  return s;
}

Eigen::VectorXd stack(const std::vector<Vector6d>& xs) {
  Eigen::VectorXd x(6 * xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) x.segment<6>(6 * k) = xs[k];
  return x;
}

TEST(Problem, TwOneDimensions) {
  Gen g(71);
  const auto p = build_problem(random_window(g, 1));
  EXPECT_EQ(p.Ex.rows(), 34);
  EXPECT_EQ(p.Ex.cols(), 12);
  EXPECT_EQ(p.Ealpha.rows(), 34);
  EXPECT_EQ(p.w.size(), 34);
}

TEST(Problem, GeneralDimensions) {
  Gen g(72);
  for (int tw = 1; tw <= 10; ++tw) {
    const auto p = build_problem(random_window(g, tw));
    EXPECT_EQ(p.Ex.cols(), 6 * (tw + 1));
    EXPECT_EQ(p.Ex.rows(), 6 * (tw + 1) + 6 * tw + 8 * (tw + 1));
    EXPECT_EQ(p.ticks(), tw + 1);
  }
}

TEST(Problem, UnitWeightsGiveIdentityPattern) {
  Gen g(73);
  auto s = random_window(g, 3);
  for (auto& w : s.prior_weights) w.setOnes();
  for (auto& w : s.transfer_weights) w.setOnes();
  for (auto& w : s.measurement_weights) w.setOnes();
  for (auto& y : s.measurements) y.setZero();
  const auto p = build_problem(s);
  EXPECT_EQ(p.w, Eigen::VectorXd::Ones(p.w.size()));
  EXPECT_TRUE(p.alpha.tail(8 * 4).isZero());
}

TEST(Problem, ResidualMatchesPerTermEvaluation) {
  Gen g(74);
  for (int trial = 0; trial < 50; ++trial) {
    const int tw = g.integer(1, 8);
    const auto s = random_window(g, tw);
    const auto p = build_problem(s);
    std::vector<Vector6d> xs;
    for (int k = 0; k <= tw; ++k) {
      Vector6d x;
      x << g.vec3(-2, 2), g.vec3(-1, 1);
      xs.push_back(x);
    }
    const Eigen::VectorXd r = p.Ex * stack(xs) - p.Ealpha * p.alpha;
    int row = 0;
    double J = 0.0;
    for (int k = 0; k <= tw; ++k, row += 6) {
      const Vector6d e = xs[k] - s.priors[k];
      EXPECT_LT((r.segment<6>(row) - e).norm(), 1e-12);
      J += e.cwiseAbs2().dot(s.prior_weights[k]);
    }
    for (int k = 1; k <= tw; ++k, row += 6) {
      const auto& st = s.transitions[k - 1];
      const Vector6d e = xs[k] - (st.A * xs[k - 1] + st.B * s.inputs[k - 1]);
      EXPECT_LT((r.segment<6>(row) - e).norm(), 1e-12);
      J += e.cwiseAbs2().dot(s.transfer_weights[k - 1]);
    }
    for (int k = 0; k <= tw; ++k, row += 8) {
      const Vector8d e = s.observations[k] * xs[k] - s.measurements[k];
      EXPECT_LT((r.segment<8>(row) - e).norm(), 1e-12);
      J += e.cwiseAbs2().dot(s.measurement_weights[k]);
    }
    EXPECT_EQ(row, r.size());
    EXPECT_NEAR(p.objective(stack(xs)), J, 1e-10 * std::max(1.0, J));
  }
}

TEST(Problem, LengthMismatchThrows) {
  Gen g(75);
  auto s = random_window(g, 3);
  s.inputs.pop_back();
  EXPECT_THROW(build_problem(s), std::invalid_argument);
  s = random_window(g, 3);
  s.measurement_weights[0][2] = -1.0;
  EXPECT_THROW(build_problem(s), std::invalid_argument);
  EXPECT_THROW(build_problem(WindowSequences{}), std::invalid_argument);
}

TEST(Basis, ConstantAndShapes) {
  const std::vector<double> times{0.0, 0.04, 0.08, 0.12, 0.16, 0.2, 0.24, 0.28, 0.32};
  const auto tau0 = polynomial_basis(times, 0);
  EXPECT_EQ(tau0.cols(), 6);
  Vector6d c;
  c << 1, 2, 3, 4, 5, 6;
  const Eigen::VectorXd x = tau0 * c;
  for (int k = 0; k < 9; ++k) EXPECT_EQ(x.segment<6>(6 * k), c);

  const auto tau3 = polynomial_basis(times, 3);
  EXPECT_EQ(tau3.rows(), 54);
  EXPECT_EQ(tau3.cols(), 24);
  for (int k = 0; k < 9; ++k) {
    for (int c6 = 0; c6 < 6; ++c6) EXPECT_EQ(tau3(6 * k + c6, c6 * 4), 1.0);
  }
  const auto full = polynomial_basis(times, 8);
  EXPECT_EQ(Eigen::FullPivLU<Eigen::MatrixXd>(full).rank(), 54);
}

TEST(Basis, InvalidArguments) {
  EXPECT_THROW(polynomial_basis({}, 0), std::invalid_argument);
  EXPECT_THROW(polynomial_basis({0.0, 0.04}, 2), std::invalid_argument);
  EXPECT_THROW(polynomial_basis({0.0, 0.0}, 1), std::invalid_argument);
  EXPECT_THROW(polynomial_basis({0.0, 0.04}, -1), std::invalid_argument);
}

TEST(Solve, ConsistentWindowIsFixedPoint) {
  Gen g(76);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = random_window(g, 8);
    std::vector<Vector6d> xs{s.priors[0]};
    for (int k = 1; k <= 8; ++k) xs.push_back(propagate(xs.back(), s.inputs[k - 1], s.transitions[k - 1]));
    s.priors = xs;
    for (int k = 0; k <= 8; ++k) s.measurements[k] = s.observations[k] * xs[k];
    const auto r = solve_full(build_problem(s));
    ASSERT_EQ(r.status, SolveStatus::Ok);
    EXPECT_LT((r.x - stack(xs)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Solve, PriorOnlyReturnsPriors) {
  Gen g(77);
  auto s = random_window(g, 5);
  for (auto& w : s.transfer_weights) w.setZero();
  for (auto& w : s.measurement_weights) w.setZero();
  const auto r = solve_full(build_problem(s));
  ASSERT_NE(r.status, SolveStatus::Failed);
  EXPECT_LT((r.x - stack(s.priors)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Solve, GradientVanishesAtMinimum) {
  Gen g(78);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = build_problem(random_window(g, g.integer(1, 8), true));
    const auto r = solve_full(p);
    ASSERT_EQ(r.status, SolveStatus::Ok);
    // central differences of J, independent of the normal equations
    const double h = 1e-5;
    double worst = 0.0;
    for (int i = 0; i < r.x.size(); ++i) {
      Eigen::VectorXd a = r.x, b = r.x;
      a[i] += h;
      b[i] -= h;
      worst = std::max(worst, std::abs(p.objective(a) - p.objective(b)) / (2 * h));
    }
    EXPECT_LT(worst, 1e-8);
  }
}

TEST(Solve, ReducedEqualsFullWhenOrderIsFull) {
  Gen g(79);
  for (int trial = 0; trial < 100; ++trial) {
    const int tw = 1 + trial % 6;
    const auto p = build_problem(random_window(g, tw, true));
    const auto full = solve_full(p);
    const auto red = solve_reduced(p, polynomial_basis(p.times, tw));
    ASSERT_NE(full.status, SolveStatus::Failed);
    ASSERT_NE(red.status, SolveStatus::Failed);
    EXPECT_LT((full.x - red.x).cwiseAbs().maxCoeff(), 1e-8) << "tw=" << tw;
  }
}

TEST(Solve, CubicTruthRecovered) {
  Gen g(80);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = random_window(g, 8);
    std::array<Eigen::Vector4d, 6> coef;
    for (auto& c : coef) c = Eigen::Vector4d::Random();
    std::vector<Vector6d> xs;
    for (int k = 0; k <= 8; ++k) {
      const double t = s.times[k] - s.times[0];
      Vector6d x;
      for (int c = 0; c < 6; ++c) x[c] = coef[c][0] + coef[c][1] * t + coef[c][2] * t * t + coef[c][3] * t * t * t;
      xs.push_back(x);
    }
    // The cubic is not a trajectory of the dynamics, so transfer terms are off.
    for (auto& w : s.transfer_weights) w.setZero();
    s.priors = xs;
    for (int k = 0; k <= 8; ++k) s.measurements[k] = s.observations[k] * xs[k];
    const auto p = build_problem(s);
    const auto r = solve_reduced(p, polynomial_basis(p.times, 3));
    ASSERT_EQ(r.status, SolveStatus::Ok);
    EXPECT_LT((r.x - stack(xs)).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(Solve, ConstantFitIsWeightedMean) {
  Gen g(81);
  auto s = random_window(g, 6);
  for (auto& w : s.transfer_weights) w.setZero();
  for (auto& w : s.measurement_weights) w.setZero();
  const auto p = build_problem(s);
  const auto r = solve_reduced(p, polynomial_basis(p.times, 0));
  Vector6d num = Vector6d::Zero(), den = Vector6d::Zero();
  for (int k = 0; k <= 6; ++k) {
    num += s.prior_weights[k].cwiseProduct(s.priors[k]);
    den += s.prior_weights[k];
  }
  const Vector6d mean = num.cwiseQuotient(den);
  for (int k = 0; k <= 6; ++k) EXPECT_LT((r.x.segment<6>(6 * k) - mean).norm(), 1e-12);
  EXPECT_EQ(r.coefficients.size(), 6);
}

TEST(Solve, SingularProblemIsRegularizedNotFailed) {
  Gen g(82);
  auto s = random_window(g, 3);
  for (auto& w : s.prior_weights) w.setZero();
  for (auto& w : s.transfer_weights) w.setZero();
  for (auto& w : s.measurement_weights) w.setZero();
  s.measurement_weights[0].setOnes();
  const auto r = solve_full(build_problem(s));
  EXPECT_EQ(r.status, SolveStatus::Regularized);
  EXPECT_TRUE(r.x.allFinite());

  for (auto& w : s.measurement_weights) w.setZero();
  EXPECT_EQ(solve_full(build_problem(s)).status, SolveStatus::Failed);
}

TEST(Solve, ReducedRejectsMismatchedBasis) {
  Gen g(83);
  const auto p = build_problem(random_window(g, 3));
  EXPECT_THROW(solve_reduced(p, polynomial_basis({0.0, 0.1}, 1)), std::invalid_argument);
}

// Exact linear-dynamics truth with perfect measurements.
class SyntheticRun {
 public:
  explicit SyntheticRun(double noise = 0.0, std::uint64_t seed = 1) : noise_(noise), g_(seed) {
    st_ = discretize(DynamicsParams{});
    x_ << 1.0, 0.2, 0.5, 0.0, 0.3, 0.0;
  }

  TickInput next(bool camera_valid = true) {
    TickInput in;
    in.index = k_;
    in.t = 0.04 * k_;
    const double t = in.t;
    const Vec3 u(0.3 * std::cos(0.6 * t), 0.3 * std::sin(0.6 * t), 0.05 * std::sin(1.3 * t));
    if (k_ > 0) x_ = propagate(x_, u_prev_, st_);
    in.input = u_prev_;
    u_prev_ = u;
    const Vec3 p = x_.head<3>(), v = x_.tail<3>();
    auto n = [this] { return noise_ > 0.0 ? g_.normal(noise_) : 0.0; };
    in.bundle.t = t;
    in.bundle.uwb.value[0] = p.norm() + n();
    in.bundle.uwb.valid = true;
    in.bundle.optical.value = v + Vec3(n(), n(), n());
    in.bundle.optical.valid = true;
    in.bundle.altimeter.value[0] = p.z() + n();
    in.bundle.altimeter.valid = true;
    in.bundle.camera.value = p + Vec3(n(), n(), n());
    in.bundle.camera.valid = camera_valid;
    in.reference = RelativeState::from_stacked(x_);
    in.truth = in.reference;
    ++k_;
    return in;
  }

  const Vector6d& truth() const { return x_; }

 private:
  double noise_;
  Gen g_;
  StateTransition st_;
  Vector6d x_;
  Vec3 u_prev_{Vec3::Zero()};
  long k_{0};
};

TEST(Step, NoiselessTrajectoryIsTracked) {
  SlidingWindowEstimator est(WindowConfig{}, DynamicsParams{}, ConfidenceParams{});
  SyntheticRun run;
  for (int k = 0; k < 500; ++k) {
    const auto in = run.next();
    const auto out = est.step(in);
    ASSERT_NE(out.status, SolveStatus::Failed);
    if (k >= 50) {
      EXPECT_LT((out.estimate - run.truth()).norm(), 1e-6) << k;
    }
    EXPECT_EQ(out.window_ticks, std::min(k + 1, 9));
    EXPECT_NEAR(out.weights.total(), 10.0, 1e-9);
  }
  EXPECT_EQ(est.priors().size(), 9u);
}

TEST(Step, VisualDropKeepsEstimateContinuous) {
  SlidingWindowEstimator est(WindowConfig{}, DynamicsParams{}, ConfidenceParams{});
  SyntheticRun run(0.02, 5);
  std::vector<double> jumps;
  Vector6d prev = Vector6d::Zero();
  for (int k = 0; k < 400; ++k) {
    const bool cam = k < 250 || k > 300;
    const auto out = est.step(run.next(cam));
    if (k > 0) {
      // deviation from constant-velocity extrapolation
      const double jump = (out.estimate.head<3>() - prev.head<3>() - 0.04 * prev.tail<3>()).norm();
      if (k > 100 && k < 250) jumps.push_back(jump);
      if (k == 250) {
        double sq = 0.0;
        for (double j : jumps) sq += j * j;
        EXPECT_LT(jump, 3.0 * std::sqrt(sq / jumps.size()));
      }
    }
    prev = out.estimate;
  }
}

TEST(Step, DisabledSensorGetsNoWeight) {
  EstimatorOptions opt;
  opt.use_uwb = false;
  SlidingWindowEstimator est(WindowConfig{}, DynamicsParams{}, ConfidenceParams{}, opt);
  SyntheticRun run;
  for (int k = 0; k < 50; ++k) {
    const auto out = est.step(run.next());
    EXPECT_EQ(out.weights.trace(Sensor::Uwb), 0.0);
  }
}

TEST(Step, FixedModeIgnoresQualityAndVariance) {
  EstimatorOptions opt;
  opt.mode = WeightMode::Fixed;
  SlidingWindowEstimator est(WindowConfig{}, DynamicsParams{}, ConfidenceParams{}, opt);
  SyntheticRun run(0.05, 2);
  for (int k = 0; k < 50; ++k) {
    const auto out = est.step(run.next());
    if (k < 2) continue;
    for (int i = 0; i < kConfidenceSensors; ++i) {
      EXPECT_LT((out.weights.sensor[i] - Eigen::VectorXd::Constant(kSensorDims[i], 10.0 / 14.0)).norm(), 1e-12);
    }
  }
}

TEST(Step, TimingWithinBudget) {
  SlidingWindowEstimator est(WindowConfig{8, 3, 0.04}, DynamicsParams{}, ConfidenceParams{});
  SyntheticRun run(0.02, 3);
  double worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    const auto in = run.next();
    const auto t0 = std::chrono::steady_clock::now();
    est.step(in);
    worst = std::max(worst, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  EXPECT_LT(worst, 40.0);
}

TEST(Window, Validation) {
  EXPECT_THROW((WindowConfig{0, 0, 0.04}.validate()), std::invalid_argument);
  EXPECT_THROW((WindowConfig{3, 4, 0.04}.validate()), std::invalid_argument);
  EXPECT_THROW((WindowConfig{3, 2, 0.0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((WindowConfig{8, 3, 0.04}.validate()));
}

}  // namespace
}  // namespace galoc
