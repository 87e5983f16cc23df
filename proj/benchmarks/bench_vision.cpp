#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>

#include "galoc/active_vision.hpp"

namespace {

using namespace galoc;

std::array<Vec2, 4> sample_pixels(const MarkerArray& markers, const CameraModel& cam) {
  const PoseTransform T(Eigen::AngleAxisd(0.3, Vec3(1, 1, 0).normalized()).toRotationMatrix(), Vec3(0.1, -0.05, 1.5),
                        FrameId::Body, FrameId::Camera);
  return project_markers(T, markers, cam).pixels;
}

void BM_SolvePnp(benchmark::State& state) {
  const auto markers = MarkerArray::rectangle(0.20, 0.15);
  const CameraModel cam;
  const auto px = sample_pixels(markers, cam);
  for (auto _ : state) benchmark::DoNotOptimize(solve_pnp(px, markers, cam).rms_px);
}
BENCHMARK(BM_SolvePnp);

void BM_EstimateMarkerPose(benchmark::State& state) {
  const auto markers = MarkerArray::rectangle(0.20, 0.15);
  const CameraModel cam;
  auto px = sample_pixels(markers, cam);
  std::mt19937_64 rng(3);
  std::shuffle(px.begin(), px.end(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_marker_pose(px, markers, cam).rms_px);
}
BENCHMARK(BM_EstimateMarkerPose);

void BM_InverseKinematics(benchmark::State& state) {
  const GimbalGeometry geo;
  const Vec3 target(0.7, -0.4, 1.1);
  for (auto _ : state) benchmark::DoNotOptimize(inverse_kinematics(target, geo));
}
BENCHMARK(BM_InverseKinematics);

}  // namespace
