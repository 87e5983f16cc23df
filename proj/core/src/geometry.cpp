#include "galoc/geometry.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/SVD>
#include <fmt/format.h>

namespace galoc {

std::string_view to_string(FrameId frame) {
  switch (frame) {
    case FrameId::Body:
      return "Body";
    case FrameId::Ground:
      return "Ground";
    case FrameId::GroundInitial:
      return "GroundInitial";
    case FrameId::GroundReference:
      return "GroundReference";
    case FrameId::Camera:
      return "Camera";
    case FrameId::MechanismBase:
      return "MechanismBase";
  }
  return "Unknown";
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (n == 0.0) {
    return identity();
  }
  const Vec3 a = axis / n;
  const double s = std::sin(0.5 * angle);
  return {std::cos(0.5 * angle), a.x() * s, a.y() * s, a.z() * s};
}

UnitQuaternion UnitQuaternion::from_rotation_vector(const Vec3& rotation_vector) {
  const double angle = rotation_vector.norm();
  if (angle < 1e-12) {
    // first-order expansion, then renormalize
    UnitQuaternion q{1.0, 0.5 * rotation_vector.x(), 0.5 * rotation_vector.y(), 0.5 * rotation_vector.z()};
    const double n = q.norm();
    return {q.w / n, q.x / n, q.y / n, q.z / n};
  }
  return from_axis_angle(rotation_vector / angle, angle);
}

UnitQuaternion UnitQuaternion::from_rotation(const Mat3& rotation) {
  const Eigen::Quaterniond q(rotation);
  return {q.w(), q.x(), q.y(), q.z()};
}

double UnitQuaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

Vec3 UnitQuaternion::rotation_vector() const { return log_so3(quat_to_rotation(*this)); }

Mat3 quat_to_rotation(const UnitQuaternion& q, bool* renormalized) {
  const double n = q.norm();
  if (n == 0.0 || !std::isfinite(n)) {
    throw std::invalid_argument("quat_to_rotation: zero or non-finite quaternion");
  }
  const bool off_unit = std::abs(n - 1.0) > kOrthonormalTolerance;
  if (renormalized != nullptr) {
    *renormalized = off_unit;
  }
  const double w = q.w / n;
  const double x = q.x / n;
  const double y = q.y / n;
  const double z = q.z / n;

  Mat3 r;
  r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),  //
      2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),    //
      2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
  return r;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return m;
}

Mat3 rotation_x(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 r;
  r << 1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c;
  return r;
}

Mat3 rotation_y(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 r;
  r << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
  return r;
}

Mat3 rotation_z(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

Mat3 exp_so3(const Vec3& rotation_vector) {
  const double angle = rotation_vector.norm();
  const Mat3 k = skew(rotation_vector);
  if (angle < 1e-8) {
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  return Mat3::Identity() + (std::sin(angle) / angle) * k + ((1.0 - std::cos(angle)) / (angle * angle)) * k * k;
}

Vec3 log_so3(const Mat3& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  return aa.angle() * aa.axis();
}

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, two_pi);
  if (a <= -std::numbers::pi) {
    a += two_pi;
  } else if (a > std::numbers::pi) {
    a -= two_pi;
  }
  return a;
}

namespace {

double orthonormality_error(const Mat3& r) {
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = std::abs(r.determinant() - 1.0);
  return std::max(ortho, det);
}

Mat3 nearest_rotation(const Mat3& r) {
  const Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

}  // namespace

PoseTransform::PoseTransform(const Mat3& rotation, const Vec3& translation, FrameId from, FrameId to)
    : rotation_(rotation), translation_(translation), from_(from), to_(to) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw std::invalid_argument("PoseTransform: non-finite rotation or translation");
  }
  const double err = orthonormality_error(rotation);
  if (err > kOrthonormalTolerance) {
    if (err > kRepairTolerance) {
      throw std::invalid_argument(
          fmt::format("PoseTransform {}->{}: rotation is {:.3e} away from SO(3)", to_string(from), to_string(to), err));
    }
    rotation_ = nearest_rotation(rotation);
    repaired_ = true;
  }
}

PoseTransform PoseTransform::identity(FrameId from, FrameId to) {
  return PoseTransform(Mat3::Identity(), Vec3::Zero(), from, to);
}

PoseTransform PoseTransform::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return PoseTransform(rt, -rt * translation_, to_, from_);
}

bool PoseTransform::is_approx(const PoseTransform& other, double tol) const {
  return from_ == other.from_ && to_ == other.to_ &&
         (rotation_ - other.rotation_).cwiseAbs().maxCoeff() <= tol &&
         (translation_ - other.translation_).cwiseAbs().maxCoeff() <= tol;
}

PoseTransform compose(const PoseTransform& a, const PoseTransform& b) {
  if (a.from() != b.to()) {
    throw FrameMismatch(fmt::format("compose: cannot chain {}->{} after {}->{}", to_string(a.from()),
                                    to_string(a.to()), to_string(b.from()), to_string(b.to())));
  }
  return PoseTransform(a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation(), b.from(),
                       a.to());
}

Vec3 to_reference_frame(const Vec3& p_body_in_initial, const Vec3& p_reference_in_initial) {
  return p_body_in_initial - p_reference_in_initial;
}

}  // namespace galoc
