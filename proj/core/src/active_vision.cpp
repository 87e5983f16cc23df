#include "galoc/active_vision.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/SVD>

namespace galoc {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kMaxDltCondition = 1e8;

struct PlaneFrame {
  PoseTransform plane_to_body;
  std::array<Vec2, 4> coords;
};

PlaneFrame plane_frame(const MarkerArray& markers) {
  const Vec3& o = markers.points[0];
  const Vec3 e1 = (markers.points[1] - o).normalized();
  const Vec3 n = (markers.points[1] - o).cross(markers.points[3] - o).normalized();
  const Vec3 e2 = n.cross(e1);
  Mat3 R;
  R << e1, e2, n;
  PlaneFrame f{PoseTransform(R, o, FrameId::Body, FrameId::Body), {}};
  for (int i = 0; i < 4; ++i) {
    const Vec3 local = R.transpose() * (markers.points[i] - o);
    f.coords[i] = local.head<2>();
  }
  return f;
}

Eigen::Matrix3d normalizing_transform(const std::array<Vec2, 4>& pts) {
  Vec2 c = Vec2::Zero();
  for (const auto& p : pts) c += p;
  c /= 4.0;
  double d = 0.0;
  for (const auto& p : pts) d += (p - c).norm();
  d /= 4.0;
  const double s = d > 0.0 ? std::sqrt(2.0) / d : 1.0;
  Eigen::Matrix3d T;
  T << s, 0, -s * c.x(), 0, s, -s * c.y(), 0, 0, 1;
  return T;
}

Mat3 nearest_rotation(const Mat3& M) {
  Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 D = Mat3::Identity();
  D(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return svd.matrixU() * D * svd.matrixV().transpose();
}

struct PlanePose {
  Mat3 R;
  Vec3 t;
};

double reprojection_rms(const PlanePose& pose, const std::array<Vec2, 4>& plane, const std::array<Vec2, 4>& pixels,
                        const CameraModel& cam, bool* in_front) {
  double sum = 0.0;
  bool front = true;
  for (int i = 0; i < 4; ++i) {
    const Vec3 p = pose.R * Vec3(plane[i].x(), plane[i].y(), 0.0) + pose.t;
    if (!(p.z() > 0.0)) {
      front = false;
      continue;
    }
    sum += (cam.project(p) - pixels[i]).squaredNorm();
  }
  if (in_front != nullptr) *in_front = front;
  return std::sqrt(sum / 4.0);
}

PlanePose refine(PlanePose pose, const std::array<Vec2, 4>& plane, const std::array<Vec2, 4>& pixels,
                 const CameraModel& cam) {
  using Mat66 = Eigen::Matrix<double, 6, 6>;
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  auto cost = [&](const PlanePose& p) {
    double c = 0.0;
    for (int i = 0; i < 4; ++i) {
      const Vec3 q = p.R * Vec3(plane[i].x(), plane[i].y(), 0.0) + p.t;
      if (!(q.z() > 0.0)) return std::numeric_limits<double>::infinity();
      c += (cam.project(q) - pixels[i]).squaredNorm();
    }
    return c;
  };

  double lambda = 1e-3;
  double current = cost(pose);
  for (int iter = 0; iter < 100 && std::isfinite(current); ++iter) {
    Mat66 H = Mat66::Zero();
    Vec6 g = Vec6::Zero();
    for (int i = 0; i < 4; ++i) {
      const Vec3 rx = pose.R * Vec3(plane[i].x(), plane[i].y(), 0.0);
      const Vec3 q = rx + pose.t;
      const double iz = 1.0 / q.z();
      Eigen::Matrix<double, 2, 3> dproj;
      dproj << cam.fx * iz, 0.0, -cam.fx * q.x() * iz * iz, 0.0, cam.fy * iz, -cam.fy * q.y() * iz * iz;
      Eigen::Matrix<double, 2, 6> J;
      J.leftCols<3>() = -dproj * skew(rx);
      J.rightCols<3>() = dproj;
      const Vec2 r = cam.project(q) - pixels[i];
      H.noalias() += J.transpose() * J;
      g.noalias() += J.transpose() * r;
    }
    bool improved = false;
    for (int attempt = 0; attempt < 10; ++attempt) {
      Mat66 Hd = H;
      Hd.diagonal() += lambda * H.diagonal().cwiseMax(1e-12);
      const Vec6 step = -Hd.ldlt().solve(g);
      PlanePose trial{exp_so3(step.head<3>()) * pose.R, pose.t + step.tail<3>()};
      const double c = cost(trial);
      if (c < current) {
        const double gain = current - c;
        pose = trial;
        current = c;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (step.norm() < 1e-14 || gain < 1e-30) return pose;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return pose;
}

}  // namespace

GimbalState GimbalState::normalized() const {
  return {wrap_angle(pan), std::clamp(tilt, -kHalfPi, kHalfPi)};
}

GimbalState quantize(const GimbalState& state, double resolution) {
  if (!(resolution > 0.0)) return state;
  return GimbalState{std::round(state.pan / resolution) * resolution,
                     std::round(state.tilt / resolution) * resolution}
      .normalized();
}

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || width <= 0 || height <= 0) {
    throw std::invalid_argument("CameraModel: focal lengths and image size must be positive");
  }
}

MarkerArray MarkerArray::rectangle(double width, double height) {
  const double a = 0.5 * width;
  const double b = 0.5 * height;
  return MarkerArray{{Vec3(-a, b, 0.0), Vec3(a, b, 0.0), Vec3(a, -b, 0.0), Vec3(-a, -b, 0.0)}};
}

void MarkerArray::validate() const {
  const Vec3& o = points[0];
  const Vec3 n = (points[1] - o).cross(points[3] - o);
  if (n.norm() < 1e-9) {
    throw std::invalid_argument("MarkerArray: markers are degenerate");
  }
  if (std::abs(n.normalized().dot(points[2] - o)) > 1e-9) {
    throw std::invalid_argument("MarkerArray: markers must be coplanar");
  }
}

PoseTransform GimbalGeometry::default_mount() {
  Mat3 R;
  R << 0, 0, 1, -1, 0, 0, 0, -1, 0;
  return PoseTransform(R, Vec3::Zero(), FrameId::Camera, FrameId::Camera);
}

void GimbalGeometry::validate() const {
  if ((mount.rotation().col(2) - Vec3::UnitX()).norm() > 1e-9) {
    throw std::invalid_argument("GimbalGeometry: mount must align the optical axis with the tilt link x axis");
  }
}

PoseTransform forward_kinematics(const GimbalState& state, const GimbalGeometry& geometry) {
  const Mat3 Rp = rotation_z(state.pan);
  const Mat3 Rt = rotation_y(-state.tilt);
  const Mat3 R = Rp * Rt * geometry.mount.rotation();
  const Vec3 t = Rp * (geometry.pan_offset + Rt * (geometry.tilt_offset + geometry.mount.translation()));
  return PoseTransform(R, t, FrameId::Camera, FrameId::MechanismBase);
}

std::optional<GimbalState> inverse_kinematics(const Vec3& target, const GimbalGeometry& geometry,
                                              double previous_pan) {
  GimbalState s{previous_pan, 0.0};
  for (int iter = 0; iter < 100; ++iter) {
    const Vec3 c = forward_kinematics(s, geometry).translation();
    const Vec3 d = target - c;
    if (d.norm() < 1e-9) return std::nullopt;
    const double horiz = std::hypot(d.x(), d.y());
    GimbalState next;
    if (horiz <= 1e-12 * d.norm()) {
      next = {wrap_angle(previous_pan), d.z() > 0.0 ? kHalfPi : -kHalfPi};
    } else {
      next = {std::atan2(d.y(), d.x()), std::atan2(d.z(), horiz)};
    }
    const bool converged =
        std::abs(wrap_angle(next.pan - s.pan)) < 1e-15 && std::abs(next.tilt - s.tilt) < 1e-15;
    s = next;
    if (converged) break;
  }
  return s;
}

MarkerProjection project_markers(const PoseTransform& body_to_camera, const MarkerArray& markers,
                                 const CameraModel& camera) {
  MarkerProjection out;
  for (int i = 0; i < 4; ++i) {
    const Vec3 p = body_to_camera.apply(markers.points[i]);
    if (p.z() > 1e-6) {
      out.pixels[i] = camera.project(p);
      out.observable[i] = camera.in_image(out.pixels[i]);
    }
  }
  return out;
}

std::optional<std::array<Vec2, 4>> order_correspondences(const std::array<Vec2, 4>& points) {
  Vec2 c = Vec2::Zero();
  double scale = 0.0;
  for (const auto& p : points) {
    if (!p.allFinite()) return std::nullopt;
    c += p;
  }
  c /= 4.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) scale = std::max(scale, (points[i] - points[j]).norm());
  }
  if (scale <= 0.0) return std::nullopt;
  const double tol = 1e-9 * scale * scale;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      if ((points[i] - points[j]).norm() <= 1e-9 * scale) return std::nullopt;
      for (int k = j + 1; k < 4; ++k) {
        const Vec2 a = points[j] - points[i];
        const Vec2 b = points[k] - points[i];
        if (std::abs(a.x() * b.y() - a.y() * b.x()) <= tol) return std::nullopt;
      }
    }
  }

  std::array<int, 4> idx{0, 1, 2, 3};
  std::array<double, 4> ang{};
  for (int i = 0; i < 4; ++i) ang[i] = std::atan2(points[i].y() - c.y(), points[i].x() - c.x());
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return ang[a] < ang[b]; });

  std::array<Vec2, 4> ordered;
  for (int i = 0; i < 4; ++i) ordered[i] = points[idx[i]];
  for (int i = 0; i < 4; ++i) {
    const Vec2 a = ordered[(i + 1) % 4] - ordered[i];
    const Vec2 b = ordered[(i + 2) % 4] - ordered[(i + 1) % 4];
    if (a.x() * b.y() - a.y() * b.x() <= tol) return std::nullopt;
  }

  int start = 0;
  for (int i = 1; i < 4; ++i) {
    const double si = ordered[i].x() + ordered[i].y();
    const double ss = ordered[start].x() + ordered[start].y();
    if (si < ss || (si == ss && (ordered[i].x() < ordered[start].x() ||
                                 (ordered[i].x() == ordered[start].x() && ordered[i].y() < ordered[start].y())))) {
      start = i;
    }
  }
  std::array<Vec2, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = ordered[(start + i) % 4];
  return out;
}

PnpResult solve_pnp(const std::array<Vec2, 4>& pixels, const MarkerArray& markers, const CameraModel& camera) {
  PnpResult result;
  const PlaneFrame plane = plane_frame(markers);

  std::array<Vec2, 4> m;
  for (int i = 0; i < 4; ++i) {
    if (!pixels[i].allFinite()) return result;
    m[i] = Vec2((pixels[i].x() - camera.cx) / camera.fx, (pixels[i].y() - camera.cy) / camera.fy);
  }
  const Eigen::Matrix3d Tx = normalizing_transform(plane.coords);
  const Eigen::Matrix3d Tm = normalizing_transform(m);

  Eigen::Matrix<double, 8, 9> A = Eigen::Matrix<double, 8, 9>::Zero();
  for (int i = 0; i < 4; ++i) {
    const Vec3 X = Tx * Vec3(plane.coords[i].x(), plane.coords[i].y(), 1.0);
    const Vec3 x = Tm * Vec3(m[i].x(), m[i].y(), 1.0);
    A.block<1, 3>(2 * i, 3) = -x.z() * X.transpose();
    A.block<1, 3>(2 * i, 6) = x.y() * X.transpose();
    A.block<1, 3>(2 * i + 1, 0) = x.z() * X.transpose();
    A.block<1, 3>(2 * i + 1, 6) = -x.x() * X.transpose();
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 8, 9>> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  result.condition = sv(7) > 0.0 ? sv(0) / sv(7) : std::numeric_limits<double>::infinity();
  if (!(result.condition <= kMaxDltCondition)) {
    result.status = PnpStatus::IllConditioned;
    return result;
  }
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Eigen::Matrix3d Hn;
  Hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  const Eigen::Matrix3d H = Tm.inverse() * Hn * Tx;

  double lambda = 2.0 / (H.col(0).norm() + H.col(1).norm());
  if (H(2, 2) * lambda < 0.0) lambda = -lambda;
  Mat3 M;
  M.col(0) = lambda * H.col(0);
  M.col(1) = lambda * H.col(1);
  M.col(2) = M.col(0).cross(M.col(1));
  PlanePose first{nearest_rotation(M), lambda * H.col(2)};

  std::vector<PlanePose> candidates{first};
  const Vec3 n1 = first.R.col(2);
  const Vec3 ray = first.t.normalized();
  const Vec3 n2 = 2.0 * n1.dot(ray) * ray - n1;
  const Vec3 axis = n1.cross(n2);
  if (axis.norm() > 1e-12) {
    const double angle = std::atan2(axis.norm(), n1.dot(n2));
    candidates.push_back({exp_so3(axis.normalized() * angle) * first.R, first.t});
  }

  double best = std::numeric_limits<double>::infinity();
  std::optional<PlanePose> chosen;
  for (const auto& c : candidates) {
    const PlanePose refined = refine(c, plane.coords, pixels, camera);
    bool front = false;
    const double rms = reprojection_rms(refined, plane.coords, pixels, camera, &front);
    if (front && rms < best) {
      best = rms;
      chosen = refined;
    }
  }
  if (!chosen) return result;

  // ^C_B T = ^C_P T * ^P_B T, with P the marker-plane frame.
  const Mat3& Rbp = plane.plane_to_body.rotation();
  const Vec3& tbp = plane.plane_to_body.translation();
  const Mat3 R = chosen->R * Rbp.transpose();
  const Vec3 t = chosen->t - R * tbp;
  result.pose = PoseTransform(R, t, FrameId::Body, FrameId::Camera);
  result.rms_px = best;
  result.status = PnpStatus::Ok;
  return result;
}

PnpResult estimate_marker_pose(const std::array<Vec2, 4>& detections, const MarkerArray& markers,
                               const CameraModel& camera) {
  const auto ordered = order_correspondences(detections);
  if (!ordered) return {};
  PnpResult best;
  for (int shift = 0; shift < 4; ++shift) {
    for (int dir : {1, -1}) {
      std::array<Vec2, 4> labeled;
      for (int j = 0; j < 4; ++j) labeled[j] = (*ordered)[((shift + dir * j) % 4 + 4) % 4];
      PnpResult r = solve_pnp(labeled, markers, camera);
      if (r.status == PnpStatus::IllConditioned && best.status == PnpStatus::Failed) {
        best = r;
      }
      if (r.status == PnpStatus::Ok && (best.status != PnpStatus::Ok || r.rms_px < best.rms_px)) {
        best = r;
      }
    }
  }
  return best;
}

Vec3 camera_position_feedback(const PoseTransform& ground_to_reference, const PoseTransform& mechanism_to_ground,
                              const PoseTransform& camera_to_mechanism, const PoseTransform& body_to_camera) {
  return (ground_to_reference * mechanism_to_ground * camera_to_mechanism * body_to_camera).translation();
}

GimbalState track_step(const RelativeState& fused, const GimbalState& current, const GimbalGeometry& geometry,
                       const TrackingLimits& limits, double dt, const PoseTransform& reference_to_mechanism) {
  const Vec3 predicted = fused.p + fused.v * dt;
  const auto goal = inverse_kinematics(reference_to_mechanism.apply(predicted), geometry, current.pan);
  if (!goal) return current;
  const double max_step = limits.max_rate * dt;
  const double dpan = std::clamp(wrap_angle(goal->pan - current.pan), -max_step, max_step);
  const double dtilt = std::clamp(goal->tilt - current.tilt, -max_step, max_step);
  return GimbalState{current.pan + dpan, current.tilt + dtilt}.normalized();
}

std::string_view to_string(VisionStatus status) {
  switch (status) {
    case VisionStatus::Ok: return "ok";
    case VisionStatus::OutOfView: return "out_of_view";
    case VisionStatus::OrderingFailure: return "ordering_failure";
    case VisionStatus::PoseFailure: return "pose_failure";
  }
  return "unknown";
}

PoseTransform ground_to_reference(double ugv_yaw) {
  return PoseTransform(rotation_z(ugv_yaw), Vec3::Zero(), FrameId::Ground, FrameId::GroundReference);
}

ActiveVision::ActiveVision(VisionConfig config) : config_(std::move(config)) {
  config_.camera.validate();
  config_.markers.validate();
  config_.gimbal.validate();
  if (config_.mechanism_to_ground.from() != FrameId::MechanismBase || config_.mechanism_to_ground.to() != FrameId::Ground) {
    throw FrameMismatch("ActiveVision: mount transform must map MechanismBase to Ground");
  }
}

PoseTransform ActiveVision::reference_to_mechanism(double ugv_yaw) const {
  return (ground_to_reference(ugv_yaw) * config_.mechanism_to_ground).inverse();
}

PoseTransform ActiveVision::camera_in_reference(const GimbalState& state, double ugv_yaw) const {
  return ground_to_reference(ugv_yaw) * config_.mechanism_to_ground * forward_kinematics(state, config_.gimbal);
}

VisionObservation ActiveVision::observe(const TruthSnapshot& truth, std::mt19937_64& rng) const {
  VisionObservation obs;
  const PoseTransform body_in_reference(truth.uav_attitude, truth.relative().p, FrameId::Body, FrameId::GroundReference);
  const PoseTransform body_to_camera = camera_in_reference(state_, truth.ugv_yaw).inverse() * body_in_reference;
  MarkerProjection proj = project_markers(body_to_camera, config_.markers, config_.camera);

  // Noise is drawn even for unusable frames so the stream stays aligned.
  std::normal_distribution<double> noise(0.0, 1.0);
  for (auto& px : proj.pixels) {
    const double nx = noise(rng);
    const double ny = noise(rng);
    px += config_.pixel_sigma * Vec2(nx, ny);
  }
  obs.encoder = quantize(state_, config_.encoder_resolution);
  if (!proj.complete()) return obs;

  const PnpResult pose = estimate_marker_pose(proj.pixels, config_.markers, config_.camera);
  if (pose.status != PnpStatus::Ok) {
    obs.status = order_correspondences(proj.pixels) ? VisionStatus::PoseFailure : VisionStatus::OrderingFailure;
    return obs;
  }
  obs.rms_px = pose.rms_px;
  if (pose.rms_px > config_.max_reprojection_px) {
    obs.status = VisionStatus::PoseFailure;
    return obs;
  }
  obs.position = camera_position_feedback(ground_to_reference(truth.ugv_yaw), config_.mechanism_to_ground,
                                          forward_kinematics(obs.encoder, config_.gimbal), *pose.pose);
  obs.status = VisionStatus::Ok;
  return obs;
}

void ActiveVision::track(const RelativeState& fused, double dt, double ugv_yaw) {
  state_ = track_step(fused, state_, config_.gimbal, config_.limits, dt, reference_to_mechanism(ugv_yaw));
}

void ActiveVision::aim(const Vec3& relative_position, double ugv_yaw) {
  const auto goal = inverse_kinematics(reference_to_mechanism(ugv_yaw).apply(relative_position), config_.gimbal,
                                       state_.pan);
  if (goal) state_ = *goal;
}

bool ActiveVision::target_in_view(const TruthSnapshot& truth) const {
  const Vec3 p = camera_in_reference(state_, truth.ugv_yaw).inverse().apply(truth.relative().p);
  return p.z() > 0.0 && config_.camera.in_image(config_.camera.project(p));
}

}  // namespace galoc
