#include <gtest/gtest.h>

#include <algorithm>

#include "galoc/metrics.hpp"
#include "galoc/scenario.hpp"

namespace galoc {
namespace {

ScenarioConfig short_preset(const char* name, double duration) {
  auto c = preset(name);
  c.duration = duration;
  return c;
}

ScenarioConfig noiseless(ScenarioConfig c) {
  c.noise = SensorNoiseSpec::noiseless();
  c.derive();
  return c;
}

TEST(Presets, AllValidAndNamed) {
  for (const auto& name : preset_names()) {
    const auto c = preset(name);
    EXPECT_EQ(c.name, name);
    EXPECT_NO_THROW(c.validate()) << name;
  }
  EXPECT_THROW(preset("nope"), std::invalid_argument);
}

TEST(Presets, CircleDefaults) {
  const auto c = preset("s1_clear");
  EXPECT_EQ(c.uav.kind, UavSpec::Kind::Circle);
  EXPECT_DOUBLE_EQ(c.uav.radius, 1.0);
  EXPECT_DOUBLE_EQ(c.uav.speed, 0.6);
  EXPECT_DOUBLE_EQ(c.uav.altitude, 0.5);
  EXPECT_EQ(c.window.tw, 8);
  EXPECT_EQ(c.window.kt, 3);
  EXPECT_DOUBLE_EQ(c.window.dt, 0.04);
  EXPECT_DOUBLE_EQ(c.duration, 60.0);
}

TEST(Modes, ApplyAndParse) {
  const auto base = preset("s1_clear");
  EXPECT_EQ(apply_mode(base, AblationMode::Fixed).estimator.mode, WeightMode::Fixed);
  EXPECT_FALSE(apply_mode(base, AblationMode::NoOptical).estimator.use_optical);
  EXPECT_FALSE(apply_mode(base, AblationMode::NoUwb).estimator.use_uwb);
  for (auto m : {AblationMode::Adaptive, AblationMode::Fixed, AblationMode::NoOptical, AblationMode::NoUwb}) {
    EXPECT_EQ(ablation_mode_from_string(to_string(m)), m);
  }
  EXPECT_FALSE(ablation_mode_from_string("fixed-weights").has_value());
}

TEST(Run, NoiselessCircleIsConsistent) {
  const auto log = run_scenario(noiseless(short_preset("s1_clear", 15.0)));
  const auto m = compute_metrics(log.ticks, 2.0);
  ASSERT_TRUE(m.has_truth);
  EXPECT_LT(m.rmse.maxCoeff(), 1e-3);
}

TEST(Run, OneRecordPerTickWithMonotoneTime) {
  const auto log = run_scenario(short_preset("s1_clear", 4.0));
  ASSERT_EQ(log.ticks.size(), 101u);
  for (std::size_t k = 1; k < log.ticks.size(); ++k) EXPECT_GT(log.ticks[k].t, log.ticks[k - 1].t);
  EXPECT_TRUE(std::is_sorted(log.samples.begin(), log.samples.end(),
                             [](const RawSample& a, const RawSample& b) { return a.t < b.t; }));
}

TEST(Run, SeedDeterminism) {
  const auto cfg = short_preset("s2_harsh", 12.0);
  const auto a = run_scenario(cfg);
  const auto b = run_scenario(cfg);
  ASSERT_EQ(a.samples, b.samples);
  ASSERT_EQ(a.ticks.size(), b.ticks.size());
  for (std::size_t k = 0; k < a.ticks.size(); ++k) {
    EXPECT_TRUE(a.ticks[k].same_result(b.ticks[k]));
    EXPECT_EQ(a.ticks[k].gimbal.pan, b.ticks[k].gimbal.pan);
  }
  auto other = cfg;
  other.seed = cfg.seed + 1;
  EXPECT_FALSE(run_scenario(other).samples == a.samples);
}

TEST(Run, ReplayReproducesEstimates) {
  const auto cfg = short_preset("l1_visual_loss", 35.0);
  const auto log = run_scenario(cfg);
  const auto rep = replay_samples(log.samples, cfg);
  ASSERT_EQ(rep.ticks.size(), log.ticks.size());
  for (std::size_t k = 0; k < log.ticks.size(); ++k) {
    ASSERT_TRUE(log.ticks[k].same_result(rep.ticks[k])) << "tick " << k;
  }
}

TEST(Run, VisualLossStaysBounded) {
  const auto log = run_scenario(preset("l1_visual_loss"));
  const auto m = compute_metrics(log.ticks, 2.0);
  EXPECT_LT(m.max_error, 0.4);
  int lost = 0;
  for (const auto& r : log.ticks) {
    if ((r.t > 30.5 && r.t < 39.9) || (r.t > 50.5 && r.t < 59.9)) {
      EXPECT_FALSE(r.camera_valid) << r.t;
      ++lost;
    }
  }
  EXPECT_GT(lost, 400);
}

TEST(Run, ActiveTrackingKeepsTargetInView) {
  const auto log = run_scenario(short_preset("s1_clear", 30.0));
  EXPECT_EQ(log.frames_out_of_view, 0);
  EXPECT_GT(log.frame_status.size(), 800u);
  const auto ok = std::count(log.frame_status.begin(), log.frame_status.end(), VisionStatus::Ok);
  EXPECT_EQ(static_cast<std::size_t>(ok), log.frame_status.size());
}

TEST(Run, PassiveCameraModeUsesTruthPlusNoise) {
  auto cfg = short_preset("s1_clear", 10.0);
  cfg.active_vision = false;
  const auto log = run_scenario(cfg);
  EXPECT_TRUE(log.frame_status.empty());
  EXPECT_LT(compute_metrics(log.ticks, 2.0).ate, 0.1);
}

TEST(Ablation, OpticalLossHurtsMoreThanUwbLossUnderImuBias) {
  auto cfg = preset("l1_visual_loss");
  cfg.noise.imu_accel_bias = Vec3(0.05, -0.05, 0.0);
  const double no_opt = compute_metrics(run_scenario(apply_mode(cfg, AblationMode::NoOptical)).ticks, 2.0).ate;
  const double no_uwb = compute_metrics(run_scenario(apply_mode(cfg, AblationMode::NoUwb)).ticks, 2.0).ate;
  const double full = compute_metrics(run_scenario(cfg).ticks, 2.0).ate;
  EXPECT_GT(no_opt, no_uwb);
  EXPECT_LT(no_uwb, 2.0 * full);
}

TEST(Ablation, AdaptiveBeatsFixedUnderOpticalDegradation) {
  const auto cfg = preset("ablation_optical");
  const double adaptive = compute_metrics(run_scenario(cfg).ticks, cfg.warmup).ate;
  const double fixed = compute_metrics(run_scenario(apply_mode(cfg, AblationMode::Fixed)).ticks, cfg.warmup).ate;
  EXPECT_LE(adaptive, fixed);
}

TEST(Config, ValidationRejectsBadValues) {
  auto c = preset("s1_clear");
  c.duration = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = preset("s1_clear");
  c.window.kt = 9;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = preset("s1_clear");
  c.max_hold = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Config, DeriveSetsThresholdsFromNoise) {
  auto c = preset("s1_clear");
  c.noise.uwb_sigma = 0.1;
  c.derive();
  EXPECT_NEAR(c.confidence.eps_f[1], 0.01 * 9 * 0.1, 1e-15);
  EXPECT_NEAR(c.confidence.eps_f[0], 0.01 * 9 * 0.05 / 2.0, 1e-15);
}

}  // namespace
}  // namespace galoc
