#pragma once

#include <array>
#include <deque>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "galoc/confidence.hpp"
#include "galoc/dynamics.hpp"
#include "galoc/measurement.hpp"
#include "galoc/synchronizer.hpp"

namespace galoc {

struct WindowConfig {
  int tw{8};
  int kt{3};
  double dt{0.04};

  void validate() const;
};

/// Per-tick inputs of one window, oldest first. Transfer-related sequences
/// (inputs, transitions, transfer weights) have one entry fewer: entry k-1
/// links tick k-1 to tick k.
struct WindowSequences {
  std::vector<Vector6d> priors;
  std::vector<Vec3> inputs;
  std::vector<StateTransition> transitions;
  std::vector<Vector8d> measurements;
  std::vector<Matrix86> observations;
  std::vector<Vector6d> prior_weights;
  std::vector<Vector6d> transfer_weights;
  std::vector<Vector8d> measurement_weights;
  std::vector<double> times;
};

/// Stacked least-squares system: minimize |Ex x - Ealpha alpha|^2_W.
struct WindowProblem {
  Eigen::MatrixXd Ex;
  Eigen::MatrixXd Ealpha;
  Eigen::VectorXd w;  ///< diagonal of W
  Eigen::VectorXd alpha;
  std::vector<double> times;

  int ticks() const { return static_cast<int>(times.size()); }
  /// Weighted objective J(x).
  double objective(const Eigen::VectorXd& x) const;
};

WindowProblem build_problem(const WindowSequences& seq);

/// Block-diagonal polynomial basis. Times are measured from the window start
/// and scaled by the window span, so coefficients are in scaled time.
Eigen::MatrixXd polynomial_basis(const std::vector<double>& times, int kt);

enum class SolveStatus { Ok, Regularized, Failed };

struct SolveResult {
  Eigen::VectorXd x;             ///< stacked state sequence
  Eigen::VectorXd coefficients;  ///< reduced coefficients (reduced solve only)
  SolveStatus status{SolveStatus::Failed};
};

SolveResult solve_full(const WindowProblem& p);
SolveResult solve_reduced(const WindowProblem& p, const Eigen::MatrixXd& tau);

enum class WeightMode { Adaptive, Fixed };

struct EstimatorOptions {
  WeightMode mode{WeightMode::Adaptive};
  bool latency_compensation{true};
  bool use_uwb{true};
  bool use_optical{true};
  bool use_altimeter{true};
  bool use_visual{true};
};

struct EstimatorOutput {
  double t{0.0};
  Vector6d estimate{Vector6d::Zero()};
  Vector6d prior{Vector6d::Zero()};
  std::vector<Vector6d> posterior;
  Eigen::VectorXd coefficients;
  WeightSet weights;
  SolveStatus status{SolveStatus::Ok};
  int window_ticks{0};
  double solve_ms{0.0};
};

/// Sliding-window estimator with adaptive confidence and polynomial state
/// reduction. One instance per run; call step once per tick.
class SlidingWindowEstimator {
 public:
  SlidingWindowEstimator(WindowConfig window, DynamicsParams dynamics, ConfidenceParams confidence,
                         EstimatorOptions options = {});

  EstimatorOutput step(const TickInput& in);

  /// Current window priors, oldest first.
  std::vector<Vector6d> priors() const;
  const WindowConfig& window() const { return window_; }
  const EstimatorOptions& options() const { return options_; }

 private:
  struct Entry {
    double t{0.0};
    Vector6d prior{Vector6d::Zero()};
    Vector6d reference{Vector6d::Zero()};
    Vec3 input{Vec3::Zero()};
    Vector8d y{Vector8d::Zero()};
    std::array<bool, 8> valid{};
    std::array<double, 8> age{};
    Matrix86 C{Matrix86::Zero()};
    WeightSet weights;
    Vector8d row_weights{Vector8d::Zero()};
  };

  WeightSet evaluate_confidence(const Entry& newest);
  Vector8d row_weights(const Entry& e) const;

  WindowConfig window_;
  DynamicsParams dynamics_;
  ConfidenceParams confidence_;
  EstimatorOptions options_;
  StateTransition st_;
  std::deque<Entry> entries_;
  std::deque<Vector8d> y_history_;
  std::deque<Eigen::VectorXd> u_history_;
  std::optional<Vector6d> last_reference_;
  std::optional<Vector6d> last_estimate_;
};

}  // namespace galoc
