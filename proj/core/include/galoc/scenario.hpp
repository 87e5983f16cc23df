#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "galoc/active_vision.hpp"
#include "galoc/confidence.hpp"
#include "galoc/estimator.hpp"
#include "galoc/sensor_models.hpp"
#include "galoc/trajectory.hpp"

namespace galoc {

enum class AblationMode { Adaptive, Fixed, NoOptical, NoUwb };

std::string_view to_string(AblationMode mode);
std::optional<AblationMode> ablation_mode_from_string(std::string_view name);

struct ScenarioConfig {
  std::string name{"custom"};
  UavSpec uav;
  UgvSpec ugv;
  TrackingDeviation deviation;
  double duration{60.0};
  SensorNoiseSpec noise;
  FaultSchedule faults;
  ConfidenceParams confidence;
  WindowConfig window;
  DynamicsParams dynamics;
  EstimatorOptions estimator;
  VisionConfig vision;
  /// Camera samples come from the marker pipeline; otherwise the true
  /// relative position plus camera noise.
  bool active_vision{true};
  double max_hold{0.1};
  double warmup{2.0};  ///< seconds excluded from metrics
  std::uint64_t seed{1};

  void validate() const;
  SyncConfig sync() const;
  /// eps_f from the sensor sigmas, vision noise from the noise spec.
  void derive();
};

ScenarioConfig apply_mode(ScenarioConfig cfg, AblationMode mode);

std::vector<std::string> preset_names();
/// Throws std::invalid_argument for unknown names.
ScenarioConfig preset(std::string_view name);

struct TickRecord {
  double t{0.0};
  Vector6d estimate{Vector6d::Zero()};
  Vector6d prior{Vector6d::Zero()};
  std::optional<RelativeState> truth;
  std::optional<RelativeState> reference;
  std::array<double, kConfidenceSensors> weight_trace{};
  SolveStatus status{SolveStatus::Ok};
  bool camera_valid{false};
  GimbalState gimbal;
  double solve_ms{0.0};

  /// Everything except wall time.
  bool same_result(const TickRecord& o) const;
};

struct RunLog {
  std::string scenario;
  std::uint64_t seed{0};
  std::vector<RawSample> samples;
  std::vector<TickRecord> ticks;
  std::vector<VisionStatus> frame_status;  ///< per camera capture
  int frames_out_of_view{0};              ///< captures with the target outside the image
};

/// Closed loop: truth, sensors, vision chain, confidence, estimator, gimbal.
RunLog run_scenario(const ScenarioConfig& cfg);

/// Drives the estimator from recorded raw samples. Tick times follow the
/// configured grid up to the last sample.
RunLog replay_samples(const std::vector<RawSample>& samples, const ScenarioConfig& cfg);

}  // namespace galoc
