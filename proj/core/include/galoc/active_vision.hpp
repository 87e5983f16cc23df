#pragma once

#include <array>
#include <optional>
#include <random>

#include "galoc/dynamics.hpp"
#include "galoc/geometry.hpp"
#include "galoc/sensor_models.hpp"

namespace galoc {

/// Pan-tilt joint angles. Pan is continuous over (-pi, pi], tilt spans
/// [-pi/2, pi/2] with positive values looking up.
struct GimbalState {
  double pan{0.0};
  double tilt{0.0};

  GimbalState normalized() const;
};

/// Encoder readback with the given angular resolution (rad); zero disables.
GimbalState quantize(const GimbalState& state, double resolution);

/// Pinhole camera, pixels with origin top-left, x right, y down.
struct CameraModel {
  double fx{600.0};
  double fy{600.0};
  double cx{320.0};
  double cy{240.0};
  int width{640};
  int height{480};

  void validate() const;
  Vec2 project(const Vec3& p_camera) const {
    return {fx * p_camera.x() / p_camera.z() + cx, fy * p_camera.y() / p_camera.z() + cy};
  }
  bool in_image(const Vec2& px) const {
    return px.x() >= 0.0 && px.x() <= static_cast<double>(width) && px.y() >= 0.0 &&
           px.y() <= static_cast<double>(height);
  }
};

/// Four coplanar markers on the body, in cyclic order around the rectangle.
struct MarkerArray {
  std::array<Vec3, 4> points;

  /// Rectangle centred on the body origin in the body x-y plane.
  static MarkerArray rectangle(double width, double height);
  void validate() const;
};

/// Pan about the base z axis, then tilt about the rotated y axis, then the
/// fixed camera mount. The mount rotation must put the optical axis along
/// the tilt link's +x; offsets default to zero (concentric axes).
struct GimbalGeometry {
  Vec3 pan_offset{Vec3::Zero()};   ///< tilt axis origin in the panned frame (m)
  Vec3 tilt_offset{Vec3::Zero()};  ///< mount origin in the tilted frame (m)
  PoseTransform mount{default_mount()};

  static PoseTransform default_mount();
  void validate() const;
};

/// ^M_C T for the given joint angles.
PoseTransform forward_kinematics(const GimbalState& state, const GimbalGeometry& geometry);

/// Joint angles that put `target` (mechanism base frame) on the optical axis.
/// Empty when the target coincides with the camera centre. A target on the
/// pan axis yields tilt = +-pi/2 and keeps `previous_pan`.
std::optional<GimbalState> inverse_kinematics(const Vec3& target, const GimbalGeometry& geometry,
                                              double previous_pan = 0.0);

struct MarkerProjection {
  std::array<Vec2, 4> pixels{};
  std::array<bool, 4> observable{};

  bool complete() const { return observable[0] && observable[1] && observable[2] && observable[3]; }
};

MarkerProjection project_markers(const PoseTransform& body_to_camera, const MarkerArray& markers,
                                 const CameraModel& camera);

/// Canonical (top-left, top-right, bottom-right, bottom-left) image order.
/// Empty for repeated, collinear or non-convex configurations.
std::optional<std::array<Vec2, 4>> order_correspondences(const std::array<Vec2, 4>& points);

enum class PnpStatus { Ok, IllConditioned, Failed };

struct PnpResult {
  PnpStatus status{PnpStatus::Failed};
  std::optional<PoseTransform> pose;  ///< Body -> Camera
  double rms_px{0.0};
  double condition{0.0};
};

/// Planar pose from four ordered correspondences: normalized DLT homography,
/// decomposition, then Levenberg-Marquardt on the reprojection error from
/// both planar-ambiguity branches. The branch with every marker in front of
/// the camera and the smaller residual wins.
PnpResult solve_pnp(const std::array<Vec2, 4>& pixels, const MarkerArray& markers, const CameraModel& camera);

/// Orders unlabeled detections and tries every cyclic labeling in both
/// windings, keeping the lowest-residual pose. Needed because the marker
/// rectangle looks alike under in-plane rotation and from either side.
PnpResult estimate_marker_pose(const std::array<Vec2, 4>& detections, const MarkerArray& markers,
                               const CameraModel& camera);

/// Translation of ^G'_G T * ^G_M T * ^M_C T * ^C_B T.
Vec3 camera_position_feedback(const PoseTransform& ground_to_reference, const PoseTransform& mechanism_to_ground,
                              const PoseTransform& camera_to_mechanism, const PoseTransform& body_to_camera);

struct TrackingLimits {
  double max_rate{2.0};  // rad/s per joint
};

/// One gimbal command: aim at the fused position predicted one tick ahead,
/// rate-limited from the current joint state. Keeps working without vision.
GimbalState track_step(const RelativeState& fused, const GimbalState& current, const GimbalGeometry& geometry,
                       const TrackingLimits& limits, double dt, const PoseTransform& reference_to_mechanism);

enum class VisionStatus { Ok, OutOfView, OrderingFailure, PoseFailure };

std::string_view to_string(VisionStatus status);

struct VisionConfig {
  CameraModel camera;
  MarkerArray markers{MarkerArray::rectangle(0.20, 0.15)};
  GimbalGeometry gimbal;
  PoseTransform mechanism_to_ground{Mat3::Identity(), Vec3(0.0, 0.0, 0.1), FrameId::MechanismBase, FrameId::Ground};
  TrackingLimits limits;
  double pixel_sigma{0.5};
  double encoder_resolution{0.088 * 3.14159265358979323846 / 180.0};
  double max_reprojection_px{5.0};
};

struct VisionObservation {
  VisionStatus status{VisionStatus::OutOfView};
  Vec3 position{Vec3::Zero()};
  GimbalState encoder;
  double rms_px{0.0};
};

/// Ground-vehicle side of the system: the pan-tilt camera, its marker
/// pipeline and the tracking loop.
class ActiveVision {
 public:
  explicit ActiveVision(VisionConfig config);

  /// Captures the markers at the truth pose with the current joint state.
  VisionObservation observe(const TruthSnapshot& truth, std::mt19937_64& rng) const;

  /// Re-aims the camera from the fused relative estimate.
  void track(const RelativeState& fused, double dt, double ugv_yaw);

  /// Points the camera straight at a relative position (initialization).
  void aim(const Vec3& relative_position, double ugv_yaw);

  /// True when the body origin projects inside the image.
  bool target_in_view(const TruthSnapshot& truth) const;

  const GimbalState& state() const { return state_; }
  void set_state(const GimbalState& state) { state_ = state.normalized(); }
  const VisionConfig& config() const { return config_; }

  PoseTransform reference_to_mechanism(double ugv_yaw) const;
  PoseTransform camera_in_reference(const GimbalState& state, double ugv_yaw) const;

 private:
  VisionConfig config_;
  GimbalState state_;
};

PoseTransform ground_to_reference(double ugv_yaw);

}  // namespace galoc
