#include "galoc/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace galoc {

void DynamicsParams::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument(fmt::format("dynamics: dt must be positive, got {}", dt));
  }
  if (!(gravity > 0.0)) {
    throw std::invalid_argument(fmt::format("dynamics: gravity must be positive, got {}", gravity));
  }
  if ((drag.array() < 0.0).any() || !drag.allFinite()) {
    throw std::invalid_argument("dynamics: drag coefficients must be finite and non-negative");
  }
  if (dt * drag.maxCoeff() >= 1.0) {
    throw std::invalid_argument(
        fmt::format("dynamics: dt * max(drag) = {} >= 1 makes the velocity block non-contractive", dt * drag.maxCoeff()));
  }
}

Vec3 compute_input(const ImuSample& sample, const DynamicsParams& params) {
  const Mat3 r = quat_to_rotation(sample.attitude);
  return params.gravity * (r * sample.accel) - Vec3(0.0, 0.0, params.gravity);
}

Vec3 average_input(std::span<const ImuSample> batch, const DynamicsParams& params) {
  if (batch.empty()) {
    return Vec3::Zero();
  }
  Vec3 sum = Vec3::Zero();
  for (const auto& s : batch) {
    sum += compute_input(s, params);
  }
  return sum / static_cast<double>(batch.size());
}

StateTransition discretize(const DynamicsParams& params) {
  params.validate();
  const double dt = params.dt;
  StateTransition st;
  st.A.setIdentity();
  st.A.topRightCorner<3, 3>() = dt * Mat3::Identity();
  st.A.bottomRightCorner<3, 3>() = Mat3::Identity() - dt * Mat3(params.drag.asDiagonal());
  st.B.topRows<3>() = 0.5 * dt * dt * Mat3::Identity();
  st.B.bottomRows<3>() = dt * Mat3::Identity();
  return st;
}

Vector6d propagate(const Vector6d& x, const Vec3& u, const StateTransition& st) { return st.A * x + st.B * u; }

RelativeState propagate(const RelativeState& x, const Vec3& u, const StateTransition& st) {
  return RelativeState::from_stacked(propagate(x.stacked(), u, st));
}

Vec3 relative_velocity_reference(const Vec3& v_body, const Mat3& body_to_initial, const Vec3& v_ugv) {
  return body_to_initial * v_body - v_ugv;
}

}  // namespace galoc
