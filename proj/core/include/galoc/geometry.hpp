#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace galoc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Named coordinate frames of the ground-aerial system.
///
///   Body            - aerial robot body (markers and IMU live here)
///   Ground          - ground vehicle frame, rotates with the vehicle
///   GroundInitial   - initial pose of Ground, used as the inertial frame
///   GroundReference - translates with Ground, keeps the initial orientation
///   Camera          - pan-tilt camera (z optical axis, x right, y down)
///   MechanismBase   - base of the pan-tilt mechanism, fixed to Ground
enum class FrameId { Body, Ground, GroundInitial, GroundReference, Camera, MechanismBase };

std::string_view to_string(FrameId frame);

/// Raised when two transforms are chained across incompatible frames.
class FrameMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kOrthonormalTolerance = 1e-9;
inline constexpr double kRepairTolerance = 1e-6;

struct UnitQuaternion {
  double w{1.0};
  double x{0.0};
  double y{0.0};
  double z{0.0};

  static UnitQuaternion identity() { return {}; }
  static UnitQuaternion from_axis_angle(const Vec3& axis, double angle);
  static UnitQuaternion from_rotation_vector(const Vec3& rotation_vector);
  static UnitQuaternion from_rotation(const Mat3& rotation);

  double norm() const;
  Vec3 rotation_vector() const;
};

/// Rotation matrix of a unit quaternion (Hamilton convention, w first).
/// A quaternion whose norm is off by more than 1e-9 is renormalized and
/// `renormalized` (when given) is set; a zero quaternion throws.
Mat3 quat_to_rotation(const UnitQuaternion& q, bool* renormalized = nullptr);

Mat3 skew(const Vec3& v);
Mat3 rotation_x(double angle);
Mat3 rotation_y(double angle);
Mat3 rotation_z(double angle);
Mat3 exp_so3(const Vec3& rotation_vector);
Vec3 log_so3(const Mat3& rotation);

/// Angle wrapped into (-pi, pi].
double wrap_angle(double angle);

/// Rigid transform mapping coordinates expressed in `from` into `to`,
/// i.e. ^to_from T with p_to = R p_from + t.
class PoseTransform {
 public:
  /// Rotations within 1e-6 of SO(3) are projected onto it; anything further
  /// away throws std::invalid_argument.
  PoseTransform(const Mat3& rotation, const Vec3& translation, FrameId from, FrameId to);

  static PoseTransform identity(FrameId from, FrameId to);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  FrameId from() const { return from_; }
  FrameId to() const { return to_; }
  bool repaired() const { return repaired_; }

  Vec3 apply(const Vec3& point) const { return rotation_ * point + translation_; }
  PoseTransform inverse() const;

  bool is_approx(const PoseTransform& other, double tol) const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
  FrameId from_;
  FrameId to_;
  bool repaired_{false};
};

/// a * b: first b (b.from -> b.to), then a (a.from -> a.to). Requires
/// a.from == b.to; throws FrameMismatch otherwise.
PoseTransform compose(const PoseTransform& a, const PoseTransform& b);

inline PoseTransform operator*(const PoseTransform& a, const PoseTransform& b) { return compose(a, b); }

/// Position of the body relative to the dynamic reference frame. The
/// reference frame only translates, so its rotation w.r.t. the initial
/// ground frame is the identity and this is a plain difference.
Vec3 to_reference_frame(const Vec3& p_body_in_initial, const Vec3& p_reference_in_initial);

}  // namespace galoc
