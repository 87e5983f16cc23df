#include "galoc/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "galoc/logging.hpp"

namespace galoc {

namespace {

constexpr double kTimeSlack = 1e-9;

std::array<double, kConfidenceSensors> weight_traces(const WeightSet& w) {
  std::array<double, kConfidenceSensors> out{};
  for (int i = 0; i < kConfidenceSensors; ++i) out[i] = w.sensor[i].sum();
  return out;
}

TickRecord make_record(const TickInput& in, const EstimatorOutput& out) {
  TickRecord r;
  r.t = in.t;
  r.estimate = out.estimate;
  r.prior = out.prior;
  r.truth = in.truth;
  r.reference = in.reference;
  r.weight_trace = weight_traces(out.weights);
  r.status = out.status;
  r.camera_valid = in.bundle.camera.valid;
  r.solve_ms = out.solve_ms;
  return r;
}

ScenarioConfig base_preset() {
  ScenarioConfig c;
  c.name = "s1_clear";
  c.derive();
  return c;
}

}  // namespace

std::string_view to_string(AblationMode mode) {
  switch (mode) {
    case AblationMode::Adaptive: return "adaptive";
    case AblationMode::Fixed: return "fixed";
    case AblationMode::NoOptical: return "no-optical";
    case AblationMode::NoUwb: return "no-uwb";
  }
  return "unknown";
}

std::optional<AblationMode> ablation_mode_from_string(std::string_view name) {
  for (auto m : {AblationMode::Adaptive, AblationMode::Fixed, AblationMode::NoOptical, AblationMode::NoUwb}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

void ScenarioConfig::validate() const {
  if (!(duration > 0.0)) throw std::invalid_argument("scenario: duration must be positive");
  if (!(warmup >= 0.0)) throw std::invalid_argument("scenario: warmup must be non-negative");
  if (!(max_hold > 0.0)) throw std::invalid_argument("scenario: max_hold must be positive");
  uav.validate();
  ugv.validate();
  noise.validate();
  faults.validate();
  window.validate();
  DynamicsParams d = dynamics;
  d.dt = window.dt;
  d.validate();
  ConfidenceParams c = confidence;
  c.tw = window.tw;
  c.validate();
  vision.camera.validate();
  vision.markers.validate();
  vision.gimbal.validate();
}

SyncConfig ScenarioConfig::sync() const {
  SyncConfig s;
  s.dt = window.dt;
  s.max_hold = max_hold;
  s.gravity = dynamics.gravity;
  s.ground_height = ugv.position.z();
  return s;
}

void ScenarioConfig::derive() {
  confidence.tw = window.tw;
  const double imu_per_tick = noise.imu_accel_sigma / std::sqrt(std::max(1.0, noise.imu_rate * window.dt));
  confidence.set_failure_thresholds(
      {imu_per_tick, noise.uwb_sigma, noise.altimeter_sigma, noise.optical_sigma, noise.camera_sigma});
  dynamics.dt = window.dt;
  vision.pixel_sigma = noise.pixel_sigma;
  vision.encoder_resolution = noise.encoder_resolution_deg * std::numbers::pi / 180.0;
}

ScenarioConfig apply_mode(ScenarioConfig cfg, AblationMode mode) {
  switch (mode) {
    case AblationMode::Adaptive:
      cfg.estimator.mode = WeightMode::Adaptive;
      break;
    case AblationMode::Fixed:
      cfg.estimator.mode = WeightMode::Fixed;
      break;
    case AblationMode::NoOptical:
      cfg.estimator.use_optical = false;
      break;
    case AblationMode::NoUwb:
      cfg.estimator.use_uwb = false;
      break;
  }
  return cfg;
}

std::vector<std::string> preset_names() {
  return {"s1_clear",          "s2_harsh",           "l1_visual_loss",    "l2_visual_loss",
          "m1_relative_hover", "m2_dual_trajectory", "outdoor_longrange", "ablation_optical"};
}

ScenarioConfig preset(std::string_view name) {
  ScenarioConfig c = base_preset();
  c.name = std::string(name);
  if (name == "s1_clear") {
  } else if (name == "s2_harsh") {
    c.uav.altitude = 0.7;
    c.noise.pixel_sigma *= 3.0;
    c.noise.camera_sigma *= 2.0;
    c.faults.faults = {{SensorId::Camera, 10.0, 11.0, FaultMode::Dropped, 1.0},
                       {SensorId::Camera, 25.0, 26.5, FaultMode::Dropped, 1.0},
                       {SensorId::Camera, 40.0, 41.0, FaultMode::Dropped, 1.0},
                       {SensorId::Optical, 0.0, 60.0, FaultMode::Inflated, 3.0}};
  } else if (name == "l1_visual_loss") {
    c.duration = 70.0;
    c.faults.faults = {{SensorId::Camera, 30.0, 40.0, FaultMode::Dropped, 1.0},
                       {SensorId::Camera, 50.0, 60.0, FaultMode::Dropped, 1.0}};
  } else if (name == "l2_visual_loss") {
    c.duration = 45.0;
    c.faults.faults = {{SensorId::Camera, 15.0, 30.0, FaultMode::Dropped, 1.0}};
  } else if (name == "m1_relative_hover") {
    c.ugv.kind = UgvSpec::Kind::Shuttle;
    c.ugv.amplitude = 1.5;
    c.ugv.period = 20.0;
    c.uav.kind = UavSpec::Kind::RelativeHover;
    c.uav.offset = Vec3(1.2, 0.3, 0.5);
  } else if (name == "m2_dual_trajectory") {
    c.ugv.kind = UgvSpec::Kind::Shuttle;
    c.ugv.amplitude = 1.0;
    c.ugv.period = 20.0;
    c.uav.center = Vec2(0.0, 2.0);
  } else if (name == "outdoor_longrange") {
    c.ugv.position = Vec3(-6.5, 0.0, 0.0);
    c.uav.radius = 5.5;
    c.uav.altitude = 2.0;
    c.uav.speed = 1.0;
  } else if (name == "ablation_optical") {
    c.faults.faults = {{SensorId::Optical, 20.0, 40.0, FaultMode::Inflated, 5.0, 0.5}};
  } else {
    throw std::invalid_argument(fmt::format("unknown preset '{}'", name));
  }
  c.derive();
  return c;
}

bool TickRecord::same_result(const TickRecord& o) const {
  auto same_state = [](const std::optional<RelativeState>& a, const std::optional<RelativeState>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || (a->p == b->p && a->v == b->v);
  };
  return t == o.t && estimate == o.estimate && prior == o.prior && same_state(truth, o.truth) &&
         same_state(reference, o.reference) && weight_trace == o.weight_trace && status == o.status &&
         camera_valid == o.camera_valid;
}

RunLog run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const TruthFunction truth = make_truth(cfg.uav, cfg.ugv, cfg.deviation, cfg.dynamics.drag, cfg.dynamics.gravity);
  const SyncConfig sync = cfg.sync();
  SensorSimulator sim(truth, cfg.noise, cfg.faults, sync, cfg.seed, cfg.dynamics.drag);
  ActiveVision vision(cfg.vision);
  vision.aim(truth(0.0).reference.p, cfg.ugv.yaw);

  RunLog log;
  log.scenario = cfg.name;
  log.seed = cfg.seed;
  if (cfg.active_vision) {
    sim.set_camera([&vision, &log](const TruthSnapshot& s, std::mt19937_64& rng) {
      if (!vision.target_in_view(s)) ++log.frames_out_of_view;
      const VisionObservation obs = vision.observe(s, rng);
      log.frame_status.push_back(obs.status);
      return CameraReading{obs.position, obs.status == VisionStatus::Ok};
    });
  }

  SlidingWindowEstimator est(cfg.window, cfg.dynamics, cfg.confidence, cfg.estimator);
  const long ticks = static_cast<long>(std::floor(cfg.duration / sync.dt + kTimeSlack));
  log_info(fmt::format("running '{}' seed {} for {} ticks", cfg.name, cfg.seed, ticks + 1));
  log.ticks.reserve(static_cast<std::size_t>(ticks + 1));
  for (long k = 0; k <= ticks; ++k) {
    const double t = sync.start_time + static_cast<double>(k) * sync.dt;
    SimulatedTick tick = sim.simulate_tick(t);
    log.samples.insert(log.samples.end(), tick.samples.begin(), tick.samples.end());
    const EstimatorOutput out = est.step(tick.input);
    TickRecord rec = make_record(tick.input, out);
    vision.track(RelativeState::from_stacked(out.estimate), sync.dt, cfg.ugv.yaw);
    rec.gimbal = vision.state();
    log.ticks.push_back(std::move(rec));
  }
  return log;
}

RunLog replay_samples(const std::vector<RawSample>& samples, const ScenarioConfig& cfg) {
  cfg.validate();
  RunLog log;
  log.scenario = cfg.name;
  log.seed = cfg.seed;
  log.samples = samples;
  if (samples.empty()) return log;

  Synchronizer sync(cfg.sync());
  for (const auto& s : samples) sync.push(s);
  SlidingWindowEstimator est(cfg.window, cfg.dynamics, cfg.confidence, cfg.estimator);
  const double last = samples.back().t;
  for (long k = 0; sync.tick_time(k) <= last + kTimeSlack; ++k) {
    const TickInput in = sync.tick(sync.tick_time(k));
    log.ticks.push_back(make_record(in, est.step(in)));
  }
  return log;
}

}  // namespace galoc
