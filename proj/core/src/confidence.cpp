#include "galoc/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace galoc {

std::string_view to_string(Sensor sensor) {
  switch (sensor) {
    case Sensor::Inertial: return "inertial";
    case Sensor::Uwb: return "uwb";
    case Sensor::Altimeter: return "altimeter";
    case Sensor::Optical: return "optical";
    case Sensor::Visual: return "visual";
  }
  return "unknown";
}

void ConfidenceParams::set_failure_thresholds(const std::array<double, kConfidenceSensors>& sigma) {
  for (int i = 0; i < kConfidenceSensors; ++i) {
    eps_f[i] = 0.01 * static_cast<double>(tw + 1) * sigma[i];
  }
}

void ConfidenceParams::validate() const {
  if (!(eps > 0.0 && eps <= 1e-3)) throw std::invalid_argument("confidence: eps must lie in (0, 1e-3]");
  if (!(m > 0.0)) throw std::invalid_argument("confidence: m must be positive");
  if (!(xi > 0.0)) throw std::invalid_argument("confidence: Xi must be positive");
  if (tw < 1) throw std::invalid_argument("confidence: Tw must be at least 1");
  if (!(prior_weight >= 0.0)) throw std::invalid_argument("confidence: prior weight must be non-negative");
  for (double e : eps_f) {
    if (!(e >= 0.0)) throw std::invalid_argument("confidence: eps_f must be non-negative");
  }
}

Eigen::VectorXd failure_status(std::span<const Eigen::VectorXd> history, double eps_f, double eps, bool per_axis) {
  if (history.empty()) return {};
  const auto dim = history.front().size();
  if (history.size() < 2) return Eigen::VectorXd::Ones(dim);
  Eigen::VectorXd omega = Eigen::VectorXd::Zero(dim);
  for (std::size_t k = 1; k < history.size(); ++k) {
    omega += (history[k] - history[k - 1]).cwiseAbs();
  }
  if (per_axis) {
    return omega.unaryExpr([&](double w) { return w <= eps_f ? eps : 1.0; });
  }
  return Eigen::VectorXd::Constant(dim, omega.minCoeff() <= eps_f ? eps : 1.0);
}

Eigen::VectorXd quality_status(const Eigen::VectorXd& y, const Eigen::VectorXd& y_prev, double m, double omega0) {
  return (y - y_prev).cwiseAbs().unaryExpr([&](double w) { return 1.0 - 1.0 / (1.0 + std::exp(-m * (w - omega0))); });
}

Eigen::MatrixXd moving_variance(std::span<const Eigen::VectorXd> residuals, int dim) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& r : residuals) P.noalias() += r * r.transpose();
  return P;
}

SensorDiagonals normalized_gamma(const std::array<Eigen::MatrixXd, kConfidenceSensors>& P) {
  double total = 0.0;
  for (const auto& p : P) total += p.trace();
  SensorDiagonals gamma;
  for (int i = 0; i < kConfidenceSensors; ++i) {
    if (!(total > 0.0)) {
      gamma[i] = Eigen::VectorXd::Ones(P[i].rows());
    } else {
      gamma[i] = (1.0 - P[i].diagonal().array() / total).cwiseMax(0.0).cwiseMin(1.0).matrix();
    }
  }
  return gamma;
}

double WeightSet::total() const {
  double s = 0.0;
  for (const auto& w : sensor) s += w.sum();
  return s;
}

WeightSet uniform_weights(const ConfidenceParams& params) {
  WeightSet w;
  w.prior.setConstant(params.prior_weight);
  for (int i = 0; i < kConfidenceSensors; ++i) {
    w.sensor[i] = Eigen::VectorXd::Constant(kSensorDims[i], params.xi / kTotalWeightDim);
  }
  return w;
}

WeightSet assemble_weights(const SensorDiagonals& sf, const SensorDiagonals& sq, const SensorDiagonals& gamma,
                           const ConfidenceParams& params) {
  WeightSet w;
  w.prior.setConstant(params.prior_weight);
  double denom = 0.0;
  for (int i = 0; i < kConfidenceSensors; ++i) {
    if (sf[i].size() != kSensorDims[i] || sq[i].size() != kSensorDims[i] || gamma[i].size() != kSensorDims[i]) {
      throw std::invalid_argument("assemble_weights: factor dimension mismatch");
    }
    w.sensor[i] = sf[i].cwiseProduct(sq[i]).cwiseProduct(gamma[i]);
    denom += w.sensor[i].sum();
  }
  if (!(denom > params.eps * params.eps)) {
    for (auto& s : w.sensor) s.setZero();
    w.degraded = true;
    return w;
  }
  for (auto& s : w.sensor) s *= params.xi / denom;
  return w;
}

}  // namespace galoc
