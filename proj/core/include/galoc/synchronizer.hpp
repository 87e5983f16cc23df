#pragma once

#include <deque>
#include <limits>
#include <optional>
#include <vector>

#include "galoc/dynamics.hpp"
#include "galoc/measurement.hpp"

namespace galoc {

struct SyncConfig {
  double dt{0.04};
  double start_time{0.0};
  double ground_height{0.0};  ///< h_g, height of the reference origin above the take-off plane
  double max_hold{0.1};       ///< a held value older than this is reported invalid (s)
  double gravity{9.81};
};

/// Everything the estimator consumes at one tick.
struct TickInput {
  long index{0};
  double t{0.0};
  MeasurementBundle bundle;
  Vec3 input{Vec3::Zero()};  ///< mean IMU acceleration input over (t_prev, t]
  int imu_count{0};
  Mat3 attitude{Mat3::Identity()};
  Vec3 ugv_velocity{Vec3::Zero()};
  std::optional<RelativeState> reference;
  std::optional<RelativeState> truth;
};

/// Aligns multi-rate raw samples onto the estimator grid with a zero-order
/// hold. Both the simulator and log replay feed raw samples through this
/// class, so identical sample streams yield identical tick inputs.
class Synchronizer {
 public:
  explicit Synchronizer(SyncConfig config);

  /// Samples must arrive in non-decreasing time order.
  void push(const RawSample& sample);

  /// Consumes every pushed sample with t_s <= t and emits the tick.
  TickInput tick(double t);

  double tick_time(long index) const { return config_.start_time + static_cast<double>(index) * config_.dt; }
  long ticks_emitted() const { return next_index_; }
  const SyncConfig& config() const { return config_; }

 private:
  template <int N>
  struct Held {
    Eigen::Matrix<double, N, 1> value{Eigen::Matrix<double, N, 1>::Zero()};
    double sample_time{0.0};
    bool have{false};
    bool latest_valid{false};
    bool fresh{false};
    int staleness{0};
  };

  template <int N>
  Channel<N> emit(Held<N>& held, double t) const;

  void consume(const RawSample& sample);

  SyncConfig config_;
  std::deque<RawSample> pending_;
  double last_pushed_{-std::numeric_limits<double>::infinity()};
  long next_index_{0};

  UnitQuaternion attitude_q_;
  Mat3 attitude_{Mat3::Identity()};
  std::vector<ImuSample> imu_batch_;
  Vec3 last_input_{Vec3::Zero()};

  Held<1> uwb_;
  Held<1> altimeter_;
  Held<3> camera_;
  Held<3> optical_;
  bool optical_degraded_{false};
  Vec3 ugv_velocity_{Vec3::Zero()};

  double raw_height_{0.0};
  bool have_height_{false};
  std::optional<double> height_at_last_optical_;
  double last_optical_time_{0.0};

  std::optional<std::pair<double, Vec3>> ref_pos_, ref_vel_, truth_pos_, truth_vel_;
};

}  // namespace galoc
