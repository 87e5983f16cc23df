#include "galoc/sensor_models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace galoc {

namespace {

constexpr std::array<std::string_view, kSensorIdCount> kSensorNames = {
    "imu_att", "imu_acc", "ugv_vel", "alt", "uwb", "opt", "cam", "ref_pos", "ref_vel", "truth_pos", "truth_vel"};

constexpr double kTimeSlack = 1e-9;

std::mt19937_64 seeded_stream(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

}  // namespace

std::string_view to_string(SensorId id) { return kSensorNames[static_cast<std::size_t>(id)]; }

std::optional<SensorId> sensor_id_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kSensorNames.size(); ++i) {
    if (kSensorNames[i] == name) {
      return static_cast<SensorId>(i);
    }
  }
  return std::nullopt;
}

Vector8d MeasurementBundle::stacked() const {
  Vector8d y;
  y << uwb.value, optical.value, altimeter.value, camera.value;
  return y;
}

std::array<bool, 8> MeasurementBundle::row_valid() const {
  return {uwb.valid, optical.valid, optical.valid, optical.valid && !optical_degraded, altimeter.valid,
          camera.valid, camera.valid, camera.valid};
}

std::array<double, 8> MeasurementBundle::row_age() const {
  return {uwb.age, optical.age, optical.age, optical.age, altimeter.age, camera.age, camera.age, camera.age};
}

std::optional<Vec3> uwb_direction(const Vec3& r) {
  const double n = r.norm();
  if (!(n > kMinRangeForDirection)) {
    return std::nullopt;
  }
  return r / n;
}

ObservationMatrix assemble_observation(const Vec3& rho) {
  ObservationMatrix obs;
  obs.rho = rho;
  obs.C.setZero();
  obs.C.block<1, 3>(0, 0) = rho.transpose();
  obs.C.block<3, 3>(1, 3).setIdentity();
  obs.C.block<1, 3>(4, 0) = obs.beta.transpose();
  obs.C.block<3, 3>(5, 0).setIdentity();
  return obs;
}

Matrix86 apply_sample_age(const Matrix86& C, const std::array<double, 8>& row_age) {
  Matrix86 out = C;
  for (int row : {0, 4, 5, 6, 7}) {
    const double age = row_age[static_cast<std::size_t>(row)];
    if (age != 0.0) {
      out.block<1, 3>(row, 3) -= age * C.block<1, 3>(row, 0);
    }
  }
  return out;
}

OpticalObservation optical_observation(const Vec3& v_body, double h, std::optional<double> h_prev, double dt,
                                       const Mat3& body_to_initial, const Vec3& v_ugv) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("optical_observation: dt must be positive");
  }
  OpticalObservation out;
  Vec3 v(v_body.x(), v_body.y(), 0.0);
  if (h_prev) {
    v.z() = (h - *h_prev) / dt;
  } else {
    out.degraded = true;
  }
  out.y = body_to_initial * v - v_ugv;
  return out;
}

SensorNoiseSpec SensorNoiseSpec::noiseless() {
  SensorNoiseSpec n;
  n.imu_accel_sigma = 0.0;
  n.uwb_sigma = 0.0;
  n.optical_sigma = 0.0;
  n.altimeter_sigma = 0.0;
  n.camera_sigma = 0.0;
  n.pixel_sigma = 0.0;
  n.encoder_resolution_deg = 0.0;
  return n;
}

void SensorNoiseSpec::validate() const {
  for (double s : {imu_accel_sigma, uwb_sigma, optical_sigma, altimeter_sigma, camera_sigma, pixel_sigma,
                   encoder_resolution_deg}) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("noise: sigmas and encoder resolution must be finite and non-negative");
    }
  }
  for (double r : {imu_rate, uwb_rate, optical_rate, altimeter_rate, camera_rate, ugv_rate}) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw std::invalid_argument("noise: sensor rates must be positive");
    }
  }
}

void FaultSchedule::validate() const {
  for (const auto& f : faults) {
    if (!(f.end >= f.start) || f.start < 0.0) {
      throw std::invalid_argument(
          fmt::format("fault on {}: interval [{}, {}] is invalid", to_string(f.sensor), f.start, f.end));
    }
    if (f.mode == FaultMode::Inflated && !(f.sigma_multiplier >= 0.0)) {
      throw std::invalid_argument(fmt::format("fault on {}: negative sigma multiplier", to_string(f.sensor)));
    }
    if (!std::isfinite(f.scale)) {
      throw std::invalid_argument(fmt::format("fault on {}: scale must be finite", to_string(f.sensor)));
    }
  }
}

const Fault* FaultSchedule::active(SensorId sensor, double t) const {
  for (const auto& f : faults) {
    if (f.sensor == sensor && t >= f.start - kTimeSlack && t < f.end - kTimeSlack) {
      return &f;
    }
  }
  return nullptr;
}

SensorSimulator::SensorSimulator(TruthFunction truth, SensorNoiseSpec noise, FaultSchedule faults, SyncConfig sync,
                                 std::uint64_t seed, Vec3 drag)
    : truth_(std::move(truth)),
      noise_(noise),
      faults_(std::move(faults)),
      sync_(sync),
      drag_(drag),
      gravity_(sync.gravity),
      camera_rng_(seeded_stream(seed, 100)) {
  noise_.validate();
  faults_.validate();
  for (std::size_t i = 0; i < streams_.size(); ++i) {
    streams_[i].rng = seeded_stream(seed, static_cast<std::uint32_t>(i));
  }
  const double tick_rate = 1.0 / sync.dt;
  auto set_rate = [this](SensorId id, double rate) { streams_[static_cast<std::size_t>(id)].rate = rate; };
  set_rate(SensorId::ImuAttitude, noise_.imu_rate);
  set_rate(SensorId::ImuAccel, noise_.imu_rate);
  set_rate(SensorId::UgvVelocity, noise_.ugv_rate);
  set_rate(SensorId::Altimeter, noise_.altimeter_rate);
  set_rate(SensorId::Uwb, noise_.uwb_rate);
  set_rate(SensorId::Optical, noise_.optical_rate);
  set_rate(SensorId::Camera, noise_.camera_rate);
  for (SensorId id : {SensorId::ReferencePosition, SensorId::ReferenceVelocity, SensorId::TruthPosition,
                      SensorId::TruthVelocity}) {
    set_rate(id, tick_rate);
  }
  camera_ = [](const TruthSnapshot& truth, std::mt19937_64&) { return CameraReading{truth.relative().p, true}; };
}

void SensorSimulator::emit(Stream& stream, SensorId id, double t, std::array<double, 3> clean, double sigma,
                           int dims, std::vector<RawSample>& out, bool source_valid) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::array<double, 3> draw{0.0, 0.0, 0.0};
  for (int i = 0; i < dims; ++i) {
    draw[static_cast<std::size_t>(i)] = gauss(stream.rng);
  }

  RawSample s;
  s.t = t;
  s.sensor = id;
  double multiplier = 1.0;
  double scale = 1.0;
  const Fault* fault = faults_.active(id, t);
  if (fault != nullptr && fault->mode == FaultMode::Inflated) {
    multiplier = fault->sigma_multiplier;
    scale = fault->scale;
  }
  for (std::size_t i = 0; i < 3; ++i) {
    s.v[i] = scale * clean[i] + sigma * multiplier * draw[i];
  }

  if (fault != nullptr && fault->mode == FaultMode::Frozen) {
    if (stream.last) {
      s.v = *stream.last;
    } else {
      stream.last = s.v;
    }
  } else if (!source_valid || (fault != nullptr && fault->mode == FaultMode::Dropped)) {
    s.valid = false;
    if (stream.last) {
      s.v = *stream.last;
    }
  } else {
    stream.last = s.v;
  }
  out.push_back(s);
}

void SensorSimulator::generate(double t_to, std::vector<RawSample>& out) {
  auto stream_of = [this](SensorId id) -> Stream& { return streams_[static_cast<std::size_t>(id)]; };
  auto due = [t_to](const Stream& s) { return static_cast<double>(s.next) / s.rate <= t_to + kTimeSlack; };
  auto when = [](const Stream& s) { return static_cast<double>(s.next) / s.rate; };

  // IMU: attitude and specific force share the same instants.
  for (Stream& att = stream_of(SensorId::ImuAttitude); due(att); ++att.next) {
    Stream& acc = stream_of(SensorId::ImuAccel);
    const double t = when(att);
    const TruthSnapshot truth = truth_(t);
    const Vec3 rv = log_so3(truth.uav_attitude);
    emit(att, SensorId::ImuAttitude, t, {rv.x(), rv.y(), rv.z()}, 0.0, 0, out);

    const Vec3 thrust_accel =
        truth.uav_acceleration + drag_.cwiseProduct(truth.uav_velocity) + Vec3(0.0, 0.0, gravity_);
    const Vec3 f = (truth.uav_attitude.transpose() * thrust_accel + noise_.imu_accel_bias) / gravity_;
    emit(acc, SensorId::ImuAccel, t, {f.x(), f.y(), f.z()}, noise_.imu_accel_sigma / gravity_, 3, out);
    acc.next = att.next + 1;
  }

  for (Stream& s = stream_of(SensorId::UgvVelocity); due(s); ++s.next) {
    const TruthSnapshot truth = truth_(when(s));
    emit(s, SensorId::UgvVelocity, when(s), {truth.ugv_velocity.x(), truth.ugv_velocity.y(), truth.ugv_velocity.z()},
         0.0, 0, out);
  }
  for (Stream& s = stream_of(SensorId::Altimeter); due(s); ++s.next) {
    const TruthSnapshot truth = truth_(when(s));
    emit(s, SensorId::Altimeter, when(s), {truth.uav_position.z(), 0.0, 0.0}, noise_.altimeter_sigma, 1, out);
  }
  for (Stream& s = stream_of(SensorId::Uwb); due(s); ++s.next) {
    const TruthSnapshot truth = truth_(when(s));
    const double range = truth.relative().p.norm() + noise_.uwb_bias;
    emit(s, SensorId::Uwb, when(s), {range, 0.0, 0.0}, noise_.uwb_sigma, 1, out);
    out.back().v[0] = std::max(out.back().v[0], 0.0);
  }
  for (Stream& s = stream_of(SensorId::Optical); due(s); ++s.next) {
    const TruthSnapshot truth = truth_(when(s));
    const Vec3 v_body = truth.uav_attitude.transpose() * truth.uav_velocity;
    emit(s, SensorId::Optical, when(s), {v_body.x(), v_body.y(), 0.0}, noise_.optical_sigma, 2, out);
  }
  for (Stream& s = stream_of(SensorId::Camera); due(s); ++s.next) {
    const TruthSnapshot truth = truth_(when(s));
    const CameraReading reading = camera_(truth, camera_rng_);
    emit(s, SensorId::Camera, when(s), {reading.position.x(), reading.position.y(), reading.position.z()},
         noise_.camera_sigma, 3, out, reading.valid);
  }
  for (SensorId id : {SensorId::ReferencePosition, SensorId::ReferenceVelocity, SensorId::TruthPosition,
                      SensorId::TruthVelocity}) {
    for (Stream& s = stream_of(id); due(s); ++s.next) {
      const TruthSnapshot truth = truth_(when(s));
      Vec3 v;
      switch (id) {
        case SensorId::ReferencePosition:
          v = truth.reference.p;
          break;
        case SensorId::ReferenceVelocity:
          v = truth.reference.v;
          break;
        case SensorId::TruthPosition:
          v = truth.relative().p;
          break;
        default:
          v = truth.relative().v;
          break;
      }
      emit(s, id, when(s), {v.x(), v.y(), v.z()}, 0.0, 0, out);
    }
  }
}

SimulatedTick SensorSimulator::simulate_tick(double t) {
  if (started_ && t <= last_t_) {
    throw std::invalid_argument("SensorSimulator: ticks must advance in time");
  }
  SimulatedTick tick;
  generate(t, tick.samples);
  std::stable_sort(tick.samples.begin(), tick.samples.end(), [](const RawSample& a, const RawSample& b) {
    return a.t < b.t || (a.t == b.t && static_cast<int>(a.sensor) < static_cast<int>(b.sensor));
  });
  for (const auto& s : tick.samples) {
    sync_.push(s);
  }
  tick.input = sync_.tick(t);
  started_ = true;
  last_t_ = t;
  return tick;
}

}  // namespace galoc
