#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace galoc {

/// The n_l confidence-weighted sensors. Inertial weights the state-transfer
/// rows; the others weight their observation rows.
enum class Sensor { Inertial, Uwb, Altimeter, Optical, Visual };

inline constexpr int kConfidenceSensors = 5;
inline constexpr std::array<int, kConfidenceSensors> kSensorDims{6, 1, 1, 3, 3};
inline constexpr int kTotalWeightDim = 14;

std::string_view to_string(Sensor sensor);

struct ConfidenceParams {
  double eps{1e-6};
  double m{10.0};
  double omega0{0.5};
  double xi{10.0};
  int tw{8};
  /// Per-sensor failure thresholds in sensor units.
  std::array<double, kConfidenceSensors> eps_f{0.0, 0.0, 0.0, 0.0, 0.0};
  bool per_axis_failure{false};
  double prior_weight{0.1};

  /// eps_f_i = 0.01 (Tw + 1) sigma_i.
  void set_failure_thresholds(const std::array<double, kConfidenceSensors>& sigma);
  void validate() const;
};

/// Diagonal factors are stored as vectors.
Eigen::VectorXd failure_status(std::span<const Eigen::VectorXd> history, double eps_f, double eps,
                               bool per_axis = false);

Eigen::VectorXd quality_status(const Eigen::VectorXd& y, const Eigen::VectorXd& y_prev, double m, double omega0);

/// Sum of outer products of the residuals.
Eigen::MatrixXd moving_variance(std::span<const Eigen::VectorXd> residuals, int dim);

using SensorDiagonals = std::array<Eigen::VectorXd, kConfidenceSensors>;

/// gamma_d = 1 - P_dd / sum_j tr(P_j), clamped to [0, 1]. All ones when the
/// total variance is zero.
SensorDiagonals normalized_gamma(const std::array<Eigen::MatrixXd, kConfidenceSensors>& P);

struct WeightSet {
  Eigen::Matrix<double, 6, 1> prior{Eigen::Matrix<double, 6, 1>::Constant(0.1)};
  SensorDiagonals sensor;
  bool degraded{false};  ///< every sensor failed; only the prior term is weighted

  double trace(Sensor s) const { return sensor[static_cast<std::size_t>(s)].sum(); }
  double total() const;
};

WeightSet uniform_weights(const ConfidenceParams& params);

/// W_i = Xi (S_f . S_q . gamma)_i / sum_j tr(S_f . S_q . gamma)_j.
WeightSet assemble_weights(const SensorDiagonals& sf, const SensorDiagonals& sq, const SensorDiagonals& gamma,
                           const ConfidenceParams& params);

}  // namespace galoc
