#include "galoc/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <Eigen/QR>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "galoc/sensor_models.hpp"

namespace galoc {

namespace {

constexpr double kMaxCondition = 1e12;

// Row ranges of each measured sensor inside the stacked 8-vector.
struct RowRange {
  int start;
  int size;
};
constexpr std::array<RowRange, kConfidenceSensors> kRows{{{0, 0}, {0, 1}, {4, 1}, {1, 3}, {5, 3}}};

SolveResult solve_normal(const Eigen::MatrixXd& E, const WindowProblem& p) {
  SolveResult r;
  // Least squares on the square-root weighted system; the normal matrix is
  // only used to decide whether regularization is needed.
  const Eigen::VectorXd sw = p.w.cwiseSqrt();
  Eigen::MatrixXd A = sw.asDiagonal() * E;
  Eigen::VectorXd rhs = sw.asDiagonal() * (p.Ealpha * p.alpha);
  const Eigen::MatrixXd H = A.transpose() * A;

  r.status = SolveStatus::Ok;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxCondition) {
    const double lambda = 1e-9 * H.trace() / static_cast<double>(H.rows());
    if (!(lambda > 0.0)) {
      r.status = SolveStatus::Failed;
      return r;
    }
    const Eigen::Index n = A.cols(), m = A.rows();
    A.conservativeResize(m + n, Eigen::NoChange);
    A.bottomRows(n) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(n, n);
    rhs.conservativeResize(m + n);
    rhs.tail(n).setZero();
    r.status = SolveStatus::Regularized;
  }
  r.x = A.householderQr().solve(rhs);
  if (!r.x.allFinite()) r.status = SolveStatus::Failed;
  return r;
}

}  // namespace

void WindowConfig::validate() const {
  if (tw < 1) throw std::invalid_argument("window: Tw must be at least 1");
  if (kt < 0 || kt > tw) throw std::invalid_argument("window: kt must lie in [0, Tw]");
  if (!(dt > 0.0)) throw std::invalid_argument("window: dt must be positive");
}

double WindowProblem::objective(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd r = Ex * x - Ealpha * alpha;
  return r.dot(w.asDiagonal() * r);
}

WindowProblem build_problem(const WindowSequences& seq) {
  const auto n = seq.priors.size();
  auto expect = [](const char* name, std::size_t got, std::size_t want) {
    if (got != want) {
      throw std::invalid_argument(fmt::format("build_problem: {} has {} entries, expected {}", name, got, want));
    }
  };
  if (n == 0) throw std::invalid_argument("build_problem: empty window");
  expect("inputs", seq.inputs.size(), n - 1);
  expect("transitions", seq.transitions.size(), n - 1);
  expect("measurements", seq.measurements.size(), n);
  expect("observations", seq.observations.size(), n);
  expect("prior_weights", seq.prior_weights.size(), n);
  expect("transfer_weights", seq.transfer_weights.size(), n - 1);
  expect("measurement_weights", seq.measurement_weights.size(), n);
  expect("times", seq.times.size(), n);

  const int N = static_cast<int>(n);
  const int nx = 6 * N;
  const int nt = 6 * (N - 1);
  const int ny = 8 * N;
  const int rows = nx + nt + ny;
  const int na = nx + 3 * (N - 1) + ny;

  WindowProblem p;
  p.times = seq.times;
  p.Ex = Eigen::MatrixXd::Zero(rows, nx);
  p.Ealpha = Eigen::MatrixXd::Zero(rows, na);
  p.w = Eigen::VectorXd::Zero(rows);
  p.alpha = Eigen::VectorXd::Zero(na);

  p.Ex.topRows(nx).setIdentity();
  p.Ealpha.topLeftCorner(nx, nx).setIdentity();
  for (int k = 0; k < N; ++k) {
    p.alpha.segment<6>(6 * k) = seq.priors[k];
    p.w.segment<6>(6 * k) = seq.prior_weights[k];
  }
  for (int k = 1; k < N; ++k) {
    const int r0 = nx + 6 * (k - 1);
    const auto& st = seq.transitions[k - 1];
    p.Ex.block<6, 6>(r0, 6 * (k - 1)) = -st.A;
    p.Ex.block<6, 6>(r0, 6 * k).setIdentity();
    p.Ealpha.block<6, 3>(r0, nx + 3 * (k - 1)) = st.B;
    p.alpha.segment<3>(nx + 3 * (k - 1)) = seq.inputs[k - 1];
    p.w.segment<6>(r0) = seq.transfer_weights[k - 1];
  }
  const int ra = nx + nt;
  const int ca = nx + 3 * (N - 1);
  p.Ealpha.block(ra, ca, ny, ny).setIdentity();
  for (int k = 0; k < N; ++k) {
    p.Ex.block<8, 6>(ra + 8 * k, 6 * k) = seq.observations[k];
    p.alpha.segment<8>(ca + 8 * k) = seq.measurements[k];
    p.w.segment<8>(ra + 8 * k) = seq.measurement_weights[k];
  }
  if ((p.w.array() < 0.0).any() || !p.w.allFinite()) {
    throw std::invalid_argument("build_problem: weights must be finite and non-negative");
  }
  return p;
}

Eigen::MatrixXd polynomial_basis(const std::vector<double>& times, int kt) {
  const int n = static_cast<int>(times.size());
  if (n == 0) throw std::invalid_argument("polynomial_basis: empty time list");
  if (kt < 0 || kt > n - 1) throw std::invalid_argument("polynomial_basis: kt must lie in [0, ticks - 1]");
  for (int k = 1; k < n; ++k) {
    if (!(times[k] > times[k - 1])) throw std::invalid_argument("polynomial_basis: times must be strictly increasing");
  }
  const double span = n > 1 ? times.back() - times.front() : 1.0;
  const int m = kt + 1;
  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(6 * n, 6 * m);
  for (int k = 0; k < n; ++k) {
    const double s = (times[k] - times.front()) / span;
    double pw = 1.0;
    for (int j = 0; j < m; ++j) {
      for (int c = 0; c < 6; ++c) tau(6 * k + c, c * m + j) = pw;
      pw *= s;
    }
  }
  return tau;
}

SolveResult solve_full(const WindowProblem& p) { return solve_normal(p.Ex, p); }

SolveResult solve_reduced(const WindowProblem& p, const Eigen::MatrixXd& tau) {
  if (tau.rows() != p.Ex.cols()) throw std::invalid_argument("solve_reduced: basis does not match the window");
  SolveResult r = solve_normal(p.Ex * tau, p);
  if (r.status != SolveStatus::Failed) {
    r.coefficients = r.x;
    r.x = tau * r.coefficients;
  }
  return r;
}

SlidingWindowEstimator::SlidingWindowEstimator(WindowConfig window, DynamicsParams dynamics,
                                               ConfidenceParams confidence, EstimatorOptions options)
    : window_(window), dynamics_(dynamics), confidence_(confidence), options_(options) {
  window_.validate();
  dynamics_.dt = window_.dt;
  dynamics_.validate();
  confidence_.tw = window_.tw;
  confidence_.validate();
  st_ = discretize(dynamics_);
}

std::vector<Vector6d> SlidingWindowEstimator::priors() const {
  std::vector<Vector6d> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.prior);
  return out;
}

WeightSet SlidingWindowEstimator::evaluate_confidence(const Entry& newest) {
  const std::array<bool, kConfidenceSensors> enabled{true, options_.use_uwb, options_.use_altimeter,
                                                     options_.use_optical, options_.use_visual};
  SensorDiagonals sf, sq, gamma;
  std::array<Eigen::MatrixXd, kConfidenceSensors> P;

  // Inertial channel: the input history, each axis shared by p and v.
  {
    std::vector<Eigen::VectorXd> hist;
    for (const auto& u : u_history_) {
      Eigen::VectorXd e(6);
      e << u, u;
      hist.push_back(std::move(e));
    }
    sf[0] = failure_status(hist, confidence_.eps_f[0], confidence_.eps, confidence_.per_axis_failure);
    sq[0] = hist.size() >= 2 ? quality_status(hist.back(), hist[hist.size() - 2], confidence_.m, confidence_.omega0)
                             : Eigen::VectorXd::Ones(6);
    std::vector<Eigen::VectorXd> res;
    for (const auto& e : entries_) res.emplace_back(e.reference - e.prior);
    P[0] = moving_variance(res, 6);
  }
  for (int i = 1; i < kConfidenceSensors; ++i) {
    const auto [start, size] = kRows[i];
    std::vector<Eigen::VectorXd> hist;
    for (const auto& y : y_history_) hist.emplace_back(y.segment(start, size));
    sf[i] = failure_status(hist, confidence_.eps_f[i], confidence_.eps, confidence_.per_axis_failure);
    sq[i] = hist.size() >= 2 ? quality_status(hist.back(), hist[hist.size() - 2], confidence_.m, confidence_.omega0)
                             : Eigen::VectorXd::Ones(size);
    std::vector<Eigen::VectorXd> res;
    for (const auto& e : entries_) {
      Eigen::VectorXd r = (e.C * e.reference - e.y).segment(start, size);
      for (int j = 0; j < size; ++j) {
        if (!e.valid[start + j]) r(j) = 0.0;
      }
      res.push_back(std::move(r));
    }
    P[i] = moving_variance(res, size);
  }
  (void)newest;
  gamma = normalized_gamma(P);
  for (int i = 0; i < kConfidenceSensors; ++i) {
    if (options_.mode == WeightMode::Fixed) {
      sq[i].setOnes();
      gamma[i].setOnes();
    }
    if (!enabled[i]) sf[i].setZero();
  }
  return assemble_weights(sf, sq, gamma, confidence_);
}

Vector8d SlidingWindowEstimator::row_weights(const Entry& e) const {
  const auto& w = e.weights.sensor;
  Vector8d r;
  r << w[1](0), w[3](0), w[3](1), w[3](2), w[2](0), w[4](0), w[4](1), w[4](2);
  for (int j = 0; j < 8; ++j) {
    if (!e.valid[j]) r(j) = 0.0;
  }
  return r;
}

EstimatorOutput SlidingWindowEstimator::step(const TickInput& in) {
  const auto t0 = std::chrono::steady_clock::now();

  Entry e;
  e.t = in.t;
  e.input = in.input;
  e.y = in.bundle.stacked();
  e.valid = in.bundle.row_valid();
  e.age = in.bundle.row_age();
  if (!options_.use_uwb) e.valid[0] = false;
  if (!options_.use_optical) e.valid[1] = e.valid[2] = e.valid[3] = false;
  if (!options_.use_altimeter) e.valid[4] = false;
  if (!options_.use_visual) e.valid[5] = e.valid[6] = e.valid[7] = false;

  if (in.reference) last_reference_ = in.reference->stacked();
  if (last_estimate_) {
    e.prior = propagate(*last_estimate_, in.input, st_);
  } else if (last_reference_) {
    e.prior = *last_reference_;
  }
  e.reference = last_reference_ ? *last_reference_ : e.prior;

  entries_.push_back(e);
  while (static_cast<int>(entries_.size()) > window_.tw + 1) entries_.pop_front();
  y_history_.push_back(e.y);
  while (static_cast<int>(y_history_.size()) > window_.tw + 2) y_history_.pop_front();
  u_history_.emplace_back(in.input);
  while (static_cast<int>(u_history_.size()) > window_.tw + 2) u_history_.pop_front();

  // Relinearize the range row around the current priors.
  for (auto& en : entries_) {
    const auto rho = uwb_direction(en.prior.head<3>());
    en.C = assemble_observation(rho.value_or(Vec3::UnitX())).C;
    if (!rho) en.valid[0] = false;
    if (options_.latency_compensation) en.C = apply_sample_age(en.C, en.age);
  }

  Entry& newest = entries_.back();
  newest.weights = evaluate_confidence(newest);
  newest.row_weights = row_weights(newest);

  const int n = static_cast<int>(entries_.size());
  WindowSequences seq;
  for (int k = 0; k < n; ++k) {
    const auto& en = entries_[k];
    seq.priors.push_back(en.prior);
    seq.measurements.push_back(en.y);
    seq.observations.push_back(en.C);
    seq.prior_weights.push_back(en.weights.prior);
    seq.measurement_weights.push_back(row_weights(en));
    seq.times.push_back(en.t);
    if (k > 0) {
      seq.inputs.push_back(en.input);
      seq.transitions.push_back(st_);
      seq.transfer_weights.push_back(en.weights.sensor[0]);
    }
  }
  const WindowProblem problem = build_problem(seq);
  const int kt = std::min(window_.kt, n - 1);
  const SolveResult sol = solve_reduced(problem, polynomial_basis(seq.times, kt));

  EstimatorOutput out;
  out.t = in.t;
  out.prior = newest.prior;
  out.weights = newest.weights;
  out.window_ticks = n;
  out.status = sol.status;
  out.coefficients = sol.coefficients;
  for (int k = 0; k < n; ++k) {
    const Vector6d x = sol.status == SolveStatus::Failed ? entries_[k].prior : Vector6d(sol.x.segment<6>(6 * k));
    out.posterior.push_back(x);
    entries_[k].prior = x;
  }
  out.estimate = out.posterior.back();
  last_estimate_ = out.estimate;
  out.solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace galoc
