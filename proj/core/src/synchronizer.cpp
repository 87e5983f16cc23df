#include "galoc/synchronizer.hpp"

#include <cmath>
#include <stdexcept>

#include "galoc/sensor_models.hpp"

namespace galoc {

namespace {
constexpr double kTimeSlack = 1e-9;
}

Synchronizer::Synchronizer(SyncConfig config) : config_(config) {
  if (!(config_.dt > 0.0)) {
    throw std::invalid_argument("Synchronizer: dt must be positive");
  }
}

void Synchronizer::push(const RawSample& sample) {
  if (sample.t < last_pushed_) {
    throw std::invalid_argument("Synchronizer: samples must be pushed in time order");
  }
  last_pushed_ = sample.t;
  pending_.push_back(sample);
}

void Synchronizer::consume(const RawSample& s) {
  auto update = [&s](auto& held, const auto& value) {
    if (s.valid) {
      held.value = value;
      held.sample_time = s.t;
      held.have = true;
      held.latest_valid = true;
      held.fresh = true;
    } else {
      held.latest_valid = false;
    }
  };

  switch (s.sensor) {
    case SensorId::ImuAttitude:
      if (s.valid) {
        attitude_q_ = UnitQuaternion::from_rotation_vector(s.vec());
        attitude_ = quat_to_rotation(attitude_q_);
      }
      break;
    case SensorId::ImuAccel:
      if (s.valid) {
        imu_batch_.push_back({s.vec(), attitude_q_, s.t});
      }
      break;
    case SensorId::UgvVelocity:
      if (s.valid) {
        ugv_velocity_ = s.vec();
      }
      break;
    case SensorId::Altimeter: {
      Eigen::Matrix<double, 1, 1> y;
      y(0) = altimeter_observation(s.v[0], config_.ground_height);
      update(altimeter_, y);
      if (s.valid) {
        raw_height_ = s.v[0];
        have_height_ = true;
      }
      break;
    }
    case SensorId::Uwb: {
      Eigen::Matrix<double, 1, 1> y;
      y(0) = s.v[0];
      update(uwb_, y);
      break;
    }
    case SensorId::Optical: {
      if (!s.valid) {
        optical_.latest_valid = false;
        break;
      }
      std::optional<double> h_prev;
      double interval = config_.dt;
      if (height_at_last_optical_ && have_height_ && s.t > last_optical_time_) {
        h_prev = height_at_last_optical_;
        interval = s.t - last_optical_time_;
      }
      const Vec3 v_body(s.v[0], s.v[1], 0.0);
      const auto obs = optical_observation(v_body, raw_height_, h_prev, interval, attitude_, ugv_velocity_);
      update(optical_, obs.y);
      optical_degraded_ = obs.degraded;
      if (have_height_) {
        height_at_last_optical_ = raw_height_;
        last_optical_time_ = s.t;
      }
      break;
    }
    case SensorId::Camera:
      update(camera_, s.vec());
      break;
    case SensorId::ReferencePosition:
      ref_pos_ = std::make_pair(s.t, s.vec());
      break;
    case SensorId::ReferenceVelocity:
      ref_vel_ = std::make_pair(s.t, s.vec());
      break;
    case SensorId::TruthPosition:
      truth_pos_ = std::make_pair(s.t, s.vec());
      break;
    case SensorId::TruthVelocity:
      truth_vel_ = std::make_pair(s.t, s.vec());
      break;
  }
}

template <int N>
Channel<N> Synchronizer::emit(Held<N>& held, double t) const {
  Channel<N> c;
  c.value = held.value;
  c.age = held.have ? t - held.sample_time : 0.0;
  held.staleness = held.fresh ? 0 : held.staleness + 1;
  held.fresh = false;
  c.staleness = held.staleness;
  c.valid = held.have && held.latest_valid && c.age <= config_.max_hold + kTimeSlack;
  return c;
}

TickInput Synchronizer::tick(double t) {
  while (!pending_.empty() && pending_.front().t <= t + kTimeSlack) {
    consume(pending_.front());
    pending_.pop_front();
  }

  TickInput in;
  in.index = next_index_++;
  in.t = t;
  in.imu_count = static_cast<int>(imu_batch_.size());
  if (!imu_batch_.empty()) {
    DynamicsParams params;
    params.gravity = config_.gravity;
    last_input_ = average_input(imu_batch_, params);
    imu_batch_.clear();
  }
  in.input = last_input_;
  in.attitude = attitude_;
  in.ugv_velocity = ugv_velocity_;

  in.bundle.t = t;
  in.bundle.uwb = emit(uwb_, t);
  in.bundle.optical = emit(optical_, t);
  in.bundle.altimeter = emit(altimeter_, t);
  in.bundle.camera = emit(camera_, t);
  in.bundle.optical_degraded = optical_degraded_;

  const double window = 0.5 * config_.dt;
  auto current = [&](const auto& p) { return p && std::abs(t - p->first) <= window; };
  if (current(ref_pos_) && current(ref_vel_)) {
    in.reference = RelativeState{ref_pos_->second, ref_vel_->second};
  }
  if (current(truth_pos_) && current(truth_vel_)) {
    in.truth = RelativeState{truth_pos_->second, truth_vel_->second};
  }
  return in;
}

}  // namespace galoc
