#include "galoc/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace galoc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Closed tour through the waypoints, one smootherstep per leg so velocity
// and acceleration vanish at every waypoint.
Kinematics waypoint_tour(const std::vector<Vec3>& wp, double speed, double t) {
  if (wp.size() == 1) return {wp.front(), Vec3::Zero(), Vec3::Zero()};
  std::vector<double> dur(wp.size());
  double total = 0.0;
  for (std::size_t i = 0; i < wp.size(); ++i) {
    // Smootherstep peaks at 1.875x the mean speed; scale so the peak is `speed`.
    dur[i] = 1.875 * (wp[(i + 1) % wp.size()] - wp[i]).norm() / speed;
    total += dur[i];
  }
  double local = std::fmod(std::max(t, 0.0), total);
  std::size_t i = 0;
  while (i + 1 < wp.size() && local >= dur[i]) {
    local -= dur[i];
    ++i;
  }
  const Vec3 d = wp[(i + 1) % wp.size()] - wp[i];
  if (dur[i] <= 0.0) return {wp[i], Vec3::Zero(), Vec3::Zero()};
  const double T = dur[i];
  const double s = std::clamp(local / T, 0.0, 1.0);
  const double f = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
  const double df = 30.0 * s * s * (1.0 - s) * (1.0 - s) / T;
  const double ddf = 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (T * T);
  return {wp[i] + f * d, df * d, ddf * d};
}

}  // namespace

Kinematics UgvSpec::at(double t) const {
  switch (kind) {
    case Kind::Stationary:
      return {position, Vec3::Zero(), Vec3::Zero()};
    case Kind::Shuttle: {
      const double w = kTwoPi / period;
      return {position + Vec3(amplitude * std::sin(w * t), 0.0, 0.0), Vec3(amplitude * w * std::cos(w * t), 0.0, 0.0),
              Vec3(-amplitude * w * w * std::sin(w * t), 0.0, 0.0)};
    }
    case Kind::Waypoints:
      return waypoint_tour(waypoints, speed, t);
  }
  return {};
}

void UgvSpec::validate() const {
  if (kind == Kind::Shuttle && !(period > 0.0)) throw std::invalid_argument("ugv: shuttle period must be positive");
  if (kind == Kind::Waypoints && (waypoints.empty() || !(speed > 0.0))) {
    throw std::invalid_argument("ugv: waypoint tour needs waypoints and a positive speed");
  }
}

Kinematics UavSpec::at(double t, const UgvSpec& ugv) const {
  switch (kind) {
    case Kind::Circle: {
      const double w = speed / radius;
      const double c = std::cos(w * t);
      const double s = std::sin(w * t);
      return {Vec3(center.x() + radius * c, center.y() + radius * s, altitude), Vec3(-speed * s, speed * c, 0.0),
              Vec3(-speed * w * c, -speed * w * s, 0.0)};
    }
    case Kind::RelativeHover: {
      Kinematics k = ugv.at(t);
      k.p += offset;
      return k;
    }
    case Kind::Waypoints:
      return waypoint_tour(waypoints, speed, t);
  }
  return {};
}

void UavSpec::validate() const {
  if (kind == Kind::Circle && (!(radius > 0.0) || !(speed > 0.0))) {
    throw std::invalid_argument("uav: circle radius and speed must be positive");
  }
  if (kind == Kind::Waypoints && (waypoints.empty() || !(speed > 0.0))) {
    throw std::invalid_argument("uav: waypoint tour needs waypoints and a positive speed");
  }
}

Kinematics TrackingDeviation::at(double t) const {
  // Incommensurate frequencies so the deviation never repeats in a run.
  constexpr double wx = 0.7, wy = 0.9, wz = 1.3;
  const double h = horizontal;
  const double z = vertical;
  return {Vec3(h * std::sin(wx * t + 0.3), h * std::cos(wy * t), z * std::sin(wz * t)),
          Vec3(h * wx * std::cos(wx * t + 0.3), -h * wy * std::sin(wy * t), z * wz * std::cos(wz * t)),
          Vec3(-h * wx * wx * std::sin(wx * t + 0.3), -h * wy * wy * std::cos(wy * t), -z * wz * wz * std::sin(wz * t))};
}

Mat3 thrust_attitude(const Vec3& velocity, const Vec3& acceleration, const Vec3& drag, double gravity, double yaw) {
  const Vec3 thrust = acceleration + drag.cwiseProduct(velocity) + Vec3(0.0, 0.0, gravity);
  const Vec3 zb = thrust.normalized();
  const Vec3 xc(std::cos(yaw), std::sin(yaw), 0.0);
  const Vec3 yb = zb.cross(xc).normalized();
  const Vec3 xb = yb.cross(zb);
  Mat3 R;
  R << xb, yb, zb;
  return R;
}

TruthFunction make_truth(const UavSpec& uav, const UgvSpec& ugv, const TrackingDeviation& deviation,
                         const Vec3& drag, double gravity) {
  uav.validate();
  ugv.validate();
  return [uav, ugv, deviation, drag, gravity](double t) {
    const Kinematics g = ugv.at(t);
    const Kinematics plan = uav.at(t, ugv);
    const Kinematics dev = deviation.at(t);
    TruthSnapshot s;
    s.t = t;
    s.ugv_position = g.p;
    s.ugv_velocity = g.v;
    s.ugv_yaw = ugv.yaw;
    s.uav_position = plan.p + dev.p;
    s.uav_velocity = plan.v + dev.v;
    s.uav_acceleration = plan.a + dev.a;
    s.uav_attitude = thrust_attitude(s.uav_velocity, s.uav_acceleration, drag, gravity, uav.yaw);
    s.reference = RelativeState{plan.p - g.p, plan.v - g.v};
    return s;
  };
}

UgvSpec::Kind ugv_kind_from_string(std::string_view name) {
  if (name == "stationary") return UgvSpec::Kind::Stationary;
  if (name == "shuttle") return UgvSpec::Kind::Shuttle;
  if (name == "waypoints") return UgvSpec::Kind::Waypoints;
  throw std::invalid_argument("unknown ugv trajectory kind: " + std::string(name));
}

UavSpec::Kind uav_kind_from_string(std::string_view name) {
  if (name == "circle") return UavSpec::Kind::Circle;
  if (name == "relative_hover") return UavSpec::Kind::RelativeHover;
  if (name == "waypoints") return UavSpec::Kind::Waypoints;
  throw std::invalid_argument("unknown uav trajectory kind: " + std::string(name));
}

std::string_view to_string(UgvSpec::Kind kind) {
  switch (kind) {
    case UgvSpec::Kind::Stationary: return "stationary";
    case UgvSpec::Kind::Shuttle: return "shuttle";
    case UgvSpec::Kind::Waypoints: return "waypoints";
  }
  return "unknown";
}

std::string_view to_string(UavSpec::Kind kind) {
  switch (kind) {
    case UavSpec::Kind::Circle: return "circle";
    case UavSpec::Kind::RelativeHover: return "relative_hover";
    case UavSpec::Kind::Waypoints: return "waypoints";
  }
  return "unknown";
}

}  // namespace galoc
