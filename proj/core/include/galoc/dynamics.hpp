#pragma once

#include <span>

#include "galoc/geometry.hpp"

namespace galoc {

using Matrix63 = Eigen::Matrix<double, 6, 3>;

/// Relative position/velocity of the body w.r.t. the dynamic reference
/// frame, expressed in that frame. Stacked order is always [p; v].
struct RelativeState {
  Vec3 p{Vec3::Zero()};
  Vec3 v{Vec3::Zero()};

  Vector6d stacked() const {
    Vector6d x;
    x << p, v;
    return x;
  }
  static RelativeState from_stacked(const Vector6d& x) { return {x.head<3>(), x.tail<3>()}; }
  bool finite() const { return p.allFinite() && v.allFinite(); }
};

/// One IMU reading: normalized specific force in g-units (body frame) and
/// the body attitude w.r.t. the initial ground frame.
struct ImuSample {
  Vec3 accel{0.0, 0.0, 1.0};
  UnitQuaternion attitude;
  double t{0.0};
};

struct DynamicsParams {
  Vec3 drag{0.2, 0.2, 0.2};  ///< diagonal of the drag matrix, 1/s
  double dt{0.04};
  double gravity{9.81};

  /// Throws std::invalid_argument on dt <= 0, negative drag, g <= 0 or
  /// dt * max(drag) >= 1.
  void validate() const;
};

struct StateTransition {
  Matrix6d A;
  Matrix63 B;
};

/// u = g R a - [0, 0, g]^T, the acceleration input in the initial ground frame.
Vec3 compute_input(const ImuSample& sample, const DynamicsParams& params);

/// Mean of compute_input over a batch (one estimator tick of IMU samples).
/// An empty batch yields zero.
Vec3 average_input(std::span<const ImuSample> batch, const DynamicsParams& params);

StateTransition discretize(const DynamicsParams& params);

RelativeState propagate(const RelativeState& x, const Vec3& u, const StateTransition& st);
Vector6d propagate(const Vector6d& x, const Vec3& u, const StateTransition& st);

/// Rate of the relative position: R * v_body - v_ugv.
Vec3 relative_velocity_reference(const Vec3& v_body, const Mat3& body_to_initial, const Vec3& v_ugv);

}  // namespace galoc
