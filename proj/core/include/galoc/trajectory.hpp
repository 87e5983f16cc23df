#pragma once

#include <string_view>
#include <vector>

#include "galoc/geometry.hpp"
#include "galoc/sensor_models.hpp"

namespace galoc {

/// Position, velocity and acceleration of a point at one instant.
struct Kinematics {
  Vec3 p{Vec3::Zero()};
  Vec3 v{Vec3::Zero()};
  Vec3 a{Vec3::Zero()};
};

struct UgvSpec {
  enum class Kind { Stationary, Shuttle, Waypoints };
  Kind kind{Kind::Stationary};
  Vec3 position{Vec3::Zero()};
  double amplitude{0.0};  ///< shuttle half-stroke along x (m)
  double period{20.0};    ///< shuttle period (s)
  std::vector<Vec3> waypoints;
  double speed{0.5};
  double yaw{0.0};  ///< constant heading (rad)

  Kinematics at(double t) const;
  void validate() const;
};

struct UavSpec {
  enum class Kind { Circle, RelativeHover, Waypoints };
  Kind kind{Kind::Circle};
  Vec2 center{Vec2::Zero()};
  double radius{1.0};
  double speed{0.6};
  double altitude{0.5};
  Vec3 offset{Vec3::Zero()};  ///< relative hover offset from the UGV
  std::vector<Vec3> waypoints;
  double yaw{0.0};

  /// Planned motion in the initial ground frame.
  Kinematics at(double t, const UgvSpec& ugv) const;
  void validate() const;
};

/// Smooth tracking deviation of the flown path from the plan.
struct TrackingDeviation {
  double horizontal{0.02};
  double vertical{0.005};

  Kinematics at(double t) const;
};

/// Attitude whose body z axis is along the thrust direction for the given
/// motion, with the requested heading.
Mat3 thrust_attitude(const Vec3& velocity, const Vec3& acceleration, const Vec3& drag, double gravity, double yaw);

/// Truth generator for the simulator: planned relative motion is the
/// reference; the flown path adds the tracking deviation.
TruthFunction make_truth(const UavSpec& uav, const UgvSpec& ugv, const TrackingDeviation& deviation,
                         const Vec3& drag, double gravity);

UgvSpec::Kind ugv_kind_from_string(std::string_view name);
UavSpec::Kind uav_kind_from_string(std::string_view name);
std::string_view to_string(UgvSpec::Kind kind);
std::string_view to_string(UavSpec::Kind kind);

}  // namespace galoc
