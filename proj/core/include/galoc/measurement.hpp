#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "galoc/geometry.hpp"

namespace galoc {

using Vector8d = Eigen::Matrix<double, 8, 1>;
using Matrix86 = Eigen::Matrix<double, 8, 6>;

/// Raw sample streams. The enumeration order is also the processing order of
/// samples sharing a timestamp (attitude before acceleration, altimeter and
/// UGV velocity before optical flow).
enum class SensorId {
  ImuAttitude,        ///< v = body->initial rotation vector (rad)
  ImuAccel,           ///< v = specific force, g-units, body frame
  UgvVelocity,        ///< v = ground vehicle velocity in the initial frame (m/s)
  Altimeter,          ///< v1 = height above the take-off plane (m)
  Uwb,                ///< v1 = range (m)
  Optical,            ///< v1, v2 = body-frame horizontal velocity (m/s)
  Camera,             ///< v = relative position from the vision chain (m)
  ReferencePosition,  ///< planner reference, relative position (m)
  ReferenceVelocity,  ///< planner reference, relative velocity (m/s)
  TruthPosition,      ///< ground truth relative position (m)
  TruthVelocity,      ///< ground truth relative velocity (m/s)
};

inline constexpr std::size_t kSensorIdCount = 11;

std::string_view to_string(SensorId id);
std::optional<SensorId> sensor_id_from_string(std::string_view name);

/// One row of the replay CSV: t, sensor_id, v1, v2, v3, valid.
struct RawSample {
  double t{0.0};
  SensorId sensor{SensorId::Uwb};
  std::array<double, 3> v{0.0, 0.0, 0.0};
  bool valid{true};

  Vec3 vec() const { return {v[0], v[1], v[2]}; }
  bool operator==(const RawSample&) const = default;
};

template <int N>
struct Channel {
  Eigen::Matrix<double, N, 1> value{Eigen::Matrix<double, N, 1>::Zero()};
  bool valid{false};
  double age{0.0};    ///< tick time minus capture time of the held value (s)
  int staleness{0};   ///< estimator ticks since a fresh valid sample arrived
};

/// One estimator tick worth of measurements after zero-order hold. Invalid
/// channels keep their last held value; they are never NaN.
struct MeasurementBundle {
  double t{0.0};
  Channel<1> uwb;
  Channel<3> optical;
  Channel<1> altimeter;
  Channel<3> camera;
  bool optical_degraded{false};  ///< vertical rate unavailable (no previous height)

  /// Row layout [UWB; OPT(3); ALT; CAM(3)].
  Vector8d stacked() const;
  std::array<bool, 8> row_valid() const;
  std::array<double, 8> row_age() const;
};

}  // namespace galoc
