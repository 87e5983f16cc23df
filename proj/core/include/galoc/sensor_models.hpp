#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "galoc/dynamics.hpp"
#include "galoc/measurement.hpp"
#include "galoc/synchronizer.hpp"

namespace galoc {

inline constexpr double kMinRangeForDirection = 1e-3;  // m

/// Stacked observation matrix, rows [UWB; OPT(3); ALT; CAM(3)].
struct ObservationMatrix {
  Matrix86 C{Matrix86::Zero()};
  Vec3 rho{Vec3::UnitX()};
  Vec3 beta{Vec3::UnitZ()};
};

/// Unit line-of-sight used to linearize the range. Empty when |r| is at or
/// below 1 mm; the caller then drops the range row for that tick.
std::optional<Vec3> uwb_direction(const Vec3& r);

ObservationMatrix assemble_observation(const Vec3& rho);

/// Refers position-type rows to the capture time of a held sample:
/// row_j <- row_j * [[I, -age_j I], [0, I]] for the UWB, altimeter and camera
/// rows. Zero ages leave C untouched.
Matrix86 apply_sample_age(const Matrix86& C, const std::array<double, 8>& row_age);

struct OpticalObservation {
  Vec3 y{Vec3::Zero()};
  bool degraded{false};
};

/// R [v_body_x, v_body_y, (h - h_prev) / dt]^T - v_ugv. Without a previous
/// height the vertical rate is taken as zero and the result is flagged.
OpticalObservation optical_observation(const Vec3& v_body, double h, std::optional<double> h_prev, double dt,
                                       const Mat3& body_to_initial, const Vec3& v_ugv);

inline double altimeter_observation(double h, double ground_height) { return h - ground_height; }

struct SensorNoiseSpec {
  double imu_accel_sigma{0.05};  // m/s^2
  double uwb_sigma{0.05};        // m
  double optical_sigma{0.05};    // m/s
  double altimeter_sigma{0.01};  // m
  double camera_sigma{0.02};     // m, added to the vision-chain position
  double pixel_sigma{0.5};       // px, used by the vision chain
  double encoder_resolution_deg{0.088};

  double imu_rate{100.0};
  double uwb_rate{50.0};
  double optical_rate{25.0};
  double altimeter_rate{25.0};
  double camera_rate{30.0};
  double ugv_rate{25.0};

  Vec3 imu_accel_bias{Vec3::Zero()};  // m/s^2, injected only
  double uwb_bias{0.0};               // m

  static SensorNoiseSpec noiseless();
  void validate() const;
};

enum class FaultMode { Frozen, Dropped, Inflated };

struct Fault {
  SensorId sensor{SensorId::Camera};
  double start{0.0};
  double end{0.0};
  FaultMode mode{FaultMode::Dropped};
  double sigma_multiplier{1.0};
  /// Gain on the clean signal while an inflated fault is active.
  double scale{1.0};
};

struct FaultSchedule {
  std::vector<Fault> faults;

  void validate() const;
  /// First fault active for `sensor` at time t, if any.
  const Fault* active(SensorId sensor, double t) const;
};

/// Scripted truth at one instant. Positions/velocities in the initial ground
/// frame unless stated otherwise.
struct TruthSnapshot {
  double t{0.0};
  Vec3 uav_position{Vec3::Zero()};
  Vec3 uav_velocity{Vec3::Zero()};
  Vec3 uav_acceleration{Vec3::Zero()};
  Mat3 uav_attitude{Mat3::Identity()};  ///< body -> initial ground
  Vec3 ugv_position{Vec3::Zero()};
  Vec3 ugv_velocity{Vec3::Zero()};
  double ugv_yaw{0.0};                   ///< heading change since start
  RelativeState reference;               ///< planner reference (relative)

  RelativeState relative() const { return {uav_position - ugv_position, uav_velocity - ugv_velocity}; }
};

using TruthFunction = std::function<TruthSnapshot(double)>;

struct CameraReading {
  Vec3 position{Vec3::Zero()};
  bool valid{false};
};

/// Produces the relative-position camera sample for a capture instant. The
/// scenario wires the active-vision chain in here; the default adds
/// Gaussian noise to the true relative position.
using CameraFunction = std::function<CameraReading(const TruthSnapshot&, std::mt19937_64&)>;

struct SimulatedTick {
  std::vector<RawSample> samples;  ///< raw samples in (t_prev, t], time ordered
  TickInput input;
};

/// Deterministic multi-rate sensor simulator with fault injection. Each
/// sensor draws from its own seeded stream, so disabling one sensor never
/// changes the noise seen by another.
class SensorSimulator {
 public:
  SensorSimulator(TruthFunction truth, SensorNoiseSpec noise, FaultSchedule faults, SyncConfig sync,
                  std::uint64_t seed, Vec3 drag);

  void set_camera(CameraFunction camera) { camera_ = std::move(camera); }

  /// Generates every raw sample up to t, feeds them through the internal
  /// synchronizer and returns both.
  SimulatedTick simulate_tick(double t);

  const SensorNoiseSpec& noise() const { return noise_; }

 private:
  struct Stream {
    double rate{1.0};
    long next{0};
    std::mt19937_64 rng;
    std::optional<std::array<double, 3>> last;
  };

  void emit(Stream& stream, SensorId id, double t, std::array<double, 3> clean, double sigma, int dims,
            std::vector<RawSample>& out, bool source_valid = true);
  void generate(double t_to, std::vector<RawSample>& out);

  TruthFunction truth_;
  SensorNoiseSpec noise_;
  FaultSchedule faults_;
  Synchronizer sync_;
  Vec3 drag_;
  double gravity_;
  CameraFunction camera_;
  std::mt19937_64 camera_rng_;
  std::array<Stream, kSensorIdCount> streams_;
  double last_t_{-1.0};
  bool started_{false};
};

}  // namespace galoc
