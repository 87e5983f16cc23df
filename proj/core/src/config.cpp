#include "galoc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace galoc {

namespace {

using nlohmann::json;

// Reads one JSON object, rejecting keys it was not asked about.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(fmt::format("{}: expected an object", where()));
  }

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError(fmt::format("{}: unknown key '{}'", where(), key));
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(fmt::format("{}.{}: expected a number", path_, key));
    out = v.get<double>();
  }

  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(fmt::format("{}.{}: expected an integer", path_, key));
    out = v.get<int>();
  }

  void unsigned_integer(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number_unsigned()) throw ConfigError(fmt::format("{}.{}: expected a non-negative integer", path_, key));
    out = v.get<std::uint64_t>();
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(fmt::format("{}.{}: expected true or false", path_, key));
    out = v.get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(fmt::format("{}.{}: expected a string", path_, key));
    out = v.get<std::string>();
  }

  template <int N>
  void vector(const std::string& key, Eigen::Matrix<double, N, 1>& out) {
    if (!has(key)) return;
    out = to_vector<N>(j_.at(key), fmt::format("{}.{}", path_, key));
  }

  void points(const std::string& key, std::vector<Vec3>& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(fmt::format("{}.{}: expected a list of points", path_, key));
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(to_vector<3>(v[i], fmt::format("{}.{}[{}]", path_, key, i)));
  }

  const json* child(const std::string& key) { return has(key) ? &j_.at(key) : nullptr; }
  const std::string& path() const { return path_; }

 private:
  template <int N>
  static Eigen::Matrix<double, N, 1> to_vector(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != N) throw ConfigError(fmt::format("{}: expected {} numbers", where, N));
    Eigen::Matrix<double, N, 1> out;
    for (int i = 0; i < N; ++i) {
      if (!v[static_cast<std::size_t>(i)].is_number()) throw ConfigError(fmt::format("{}: expected numbers", where));
      out(i) = v[static_cast<std::size_t>(i)].get<double>();
    }
    return out;
  }

  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

FaultMode fault_mode(const std::string& s, const std::string& where) {
  if (s == "frozen") return FaultMode::Frozen;
  if (s == "dropped") return FaultMode::Dropped;
  if (s == "inflated") return FaultMode::Inflated;
  throw ConfigError(fmt::format("{}: unknown fault mode '{}'", where, s));
}

std::string_view fault_mode_name(FaultMode m) {
  switch (m) {
    case FaultMode::Frozen: return "frozen";
    case FaultMode::Dropped: return "dropped";
    case FaultMode::Inflated: return "inflated";
  }
  return "dropped";
}

void read_uav(Section s, UavSpec& u) {
  std::string kind(to_string(u.kind));
  s.string("kind", kind);
  try {
    u.kind = uav_kind_from_string(kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("uav.kind: {}", e.what()));
  }
  s.vector("center", u.center);
  s.number("radius", u.radius);
  s.number("speed", u.speed);
  s.number("altitude", u.altitude);
  s.vector("offset", u.offset);
  s.points("waypoints", u.waypoints);
  s.number("yaw", u.yaw);
}

void read_ugv(Section s, UgvSpec& g) {
  std::string kind(to_string(g.kind));
  s.string("kind", kind);
  try {
    g.kind = ugv_kind_from_string(kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("ugv.kind: {}", e.what()));
  }
  s.vector("position", g.position);
  s.number("amplitude", g.amplitude);
  s.number("period", g.period);
  s.points("waypoints", g.waypoints);
  s.number("speed", g.speed);
  s.number("yaw", g.yaw);
}

void read_noise(Section s, SensorNoiseSpec& n) {
  s.number("imu_accel_sigma", n.imu_accel_sigma);
  s.number("uwb_sigma", n.uwb_sigma);
  s.number("optical_sigma", n.optical_sigma);
  s.number("altimeter_sigma", n.altimeter_sigma);
  s.number("camera_sigma", n.camera_sigma);
  s.number("pixel_sigma", n.pixel_sigma);
  s.number("encoder_resolution_deg", n.encoder_resolution_deg);
  s.number("imu_rate", n.imu_rate);
  s.number("uwb_rate", n.uwb_rate);
  s.number("optical_rate", n.optical_rate);
  s.number("altimeter_rate", n.altimeter_rate);
  s.number("camera_rate", n.camera_rate);
  s.number("ugv_rate", n.ugv_rate);
  s.vector("imu_accel_bias", n.imu_accel_bias);
  s.number("uwb_bias", n.uwb_bias);
}

void read_faults(const json& j, FaultSchedule& f) {
  if (!j.is_array()) throw ConfigError("faults: expected a list");
  f.faults.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string path = fmt::format("faults[{}]", i);
    Section s(j[i], path);
    Fault fault;
    std::string sensor = "cam";
    std::string mode = "dropped";
    s.string("sensor", sensor);
    s.string("mode", mode);
    s.number("start", fault.start);
    s.number("end", fault.end);
    s.number("sigma_multiplier", fault.sigma_multiplier);
    s.number("scale", fault.scale);
    const auto id = sensor_id_from_string(sensor);
    if (!id) throw ConfigError(fmt::format("{}.sensor: unknown sensor '{}'", path, sensor));
    fault.sensor = *id;
    fault.mode = fault_mode(mode, path + ".mode");
    f.faults.push_back(fault);
  }
}

void read_vision(Section s, VisionConfig& v) {
  if (const json* cam = s.child("camera")) {
    Section c(*cam, "vision.camera");
    c.number("fx", v.camera.fx);
    c.number("fy", v.camera.fy);
    c.number("cx", v.camera.cx);
    c.number("cy", v.camera.cy);
    c.integer("width", v.camera.width);
    c.integer("height", v.camera.height);
  }
  double mw = v.markers.points[1].x() - v.markers.points[0].x();
  double mh = v.markers.points[0].y() - v.markers.points[3].y();
  s.number("marker_width", mw);
  s.number("marker_height", mh);
  v.markers = MarkerArray::rectangle(mw, mh);
  Vec3 mount = v.mechanism_to_ground.translation();
  s.vector("mount_offset", mount);
  v.mechanism_to_ground = PoseTransform(Mat3::Identity(), mount, FrameId::MechanismBase, FrameId::Ground);
  s.number("max_rate", v.limits.max_rate);
  s.number("max_reprojection_px", v.max_reprojection_px);
}

}  // namespace

ScenarioConfig preset_config(std::string_view name) {
  try {
    return preset(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ScenarioConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  ScenarioConfig cfg;
  std::optional<std::array<double, kConfidenceSensors>> eps_f;
  {
    Section root(j, "");
    std::string base = "s1_clear";
    root.string("preset", base);
    cfg = preset_config(base);
    root.string("name", cfg.name);
    root.number("duration", cfg.duration);
    root.unsigned_integer("seed", cfg.seed);
    root.number("warmup", cfg.warmup);
    root.number("max_hold", cfg.max_hold);
    root.boolean("active_vision", cfg.active_vision);
    if (const json* v = root.child("uav")) read_uav(Section(*v, "uav"), cfg.uav);
    if (const json* v = root.child("ugv")) read_ugv(Section(*v, "ugv"), cfg.ugv);
    if (const json* v = root.child("deviation")) {
      Section s(*v, "deviation");
      s.number("horizontal", cfg.deviation.horizontal);
      s.number("vertical", cfg.deviation.vertical);
    }
    if (const json* v = root.child("noise")) read_noise(Section(*v, "noise"), cfg.noise);
    if (const json* v = root.child("faults")) read_faults(*v, cfg.faults);
    if (const json* v = root.child("confidence")) {
      Section s(*v, "confidence");
      s.number("eps", cfg.confidence.eps);
      s.number("m", cfg.confidence.m);
      s.number("omega0", cfg.confidence.omega0);
      s.number("xi", cfg.confidence.xi);
      s.boolean("per_axis_failure", cfg.confidence.per_axis_failure);
      s.number("prior_weight", cfg.confidence.prior_weight);
      if (const json* e = s.child("eps_f")) {
        if (!e->is_array() || e->size() != kConfidenceSensors) {
          throw ConfigError("confidence.eps_f: expected 5 numbers (inertial, uwb, altimeter, optical, visual)");
        }
        std::array<double, kConfidenceSensors> vals{};
        for (std::size_t i = 0; i < vals.size(); ++i) {
          if (!(*e)[i].is_number()) throw ConfigError("confidence.eps_f: expected numbers");
          vals[i] = (*e)[i].get<double>();
        }
        eps_f = vals;
      }
    }
    if (const json* v = root.child("window")) {
      Section s(*v, "window");
      s.integer("tw", cfg.window.tw);
      s.integer("kt", cfg.window.kt);
      s.number("dt", cfg.window.dt);
    }
    if (const json* v = root.child("dynamics")) {
      Section s(*v, "dynamics");
      s.vector("drag", cfg.dynamics.drag);
      s.number("gravity", cfg.dynamics.gravity);
    }
    if (const json* v = root.child("estimator")) {
      Section s(*v, "estimator");
      std::string mode = cfg.estimator.mode == WeightMode::Fixed ? "fixed" : "adaptive";
      s.string("mode", mode);
      if (mode != "adaptive" && mode != "fixed") throw ConfigError("estimator.mode: expected adaptive or fixed");
      cfg.estimator.mode = mode == "fixed" ? WeightMode::Fixed : WeightMode::Adaptive;
      s.boolean("latency_compensation", cfg.estimator.latency_compensation);
      s.boolean("use_uwb", cfg.estimator.use_uwb);
      s.boolean("use_optical", cfg.estimator.use_optical);
      s.boolean("use_altimeter", cfg.estimator.use_altimeter);
      s.boolean("use_visual", cfg.estimator.use_visual);
    }
    if (const json* v = root.child("vision")) read_vision(Section(*v, "vision"), cfg.vision);
  }
  try {
    cfg.derive();
    if (eps_f) cfg.confidence.eps_f = *eps_f;
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const ScenarioConfig& c) {
  auto vec = [](const auto& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
  };
  auto pts = [&](const std::vector<Vec3>& p) {
    json a = json::array();
    for (const auto& x : p) a.push_back(vec(x));
    return a;
  };
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["duration"] = c.duration;
  j["seed"] = c.seed;
  j["warmup"] = c.warmup;
  j["max_hold"] = c.max_hold;
  j["active_vision"] = c.active_vision;
  j["uav"] = {{"kind", to_string(c.uav.kind)}, {"center", vec(c.uav.center)}, {"radius", c.uav.radius},
              {"speed", c.uav.speed}, {"altitude", c.uav.altitude}, {"offset", vec(c.uav.offset)},
              {"waypoints", pts(c.uav.waypoints)}, {"yaw", c.uav.yaw}};
  j["ugv"] = {{"kind", to_string(c.ugv.kind)}, {"position", vec(c.ugv.position)}, {"amplitude", c.ugv.amplitude},
              {"period", c.ugv.period}, {"waypoints", pts(c.ugv.waypoints)}, {"speed", c.ugv.speed},
              {"yaw", c.ugv.yaw}};
  j["deviation"] = {{"horizontal", c.deviation.horizontal}, {"vertical", c.deviation.vertical}};
  const auto& n = c.noise;
  j["noise"] = {{"imu_accel_sigma", n.imu_accel_sigma}, {"uwb_sigma", n.uwb_sigma},
                {"optical_sigma", n.optical_sigma},     {"altimeter_sigma", n.altimeter_sigma},
                {"camera_sigma", n.camera_sigma},       {"pixel_sigma", n.pixel_sigma},
                {"encoder_resolution_deg", n.encoder_resolution_deg},
                {"imu_rate", n.imu_rate},               {"uwb_rate", n.uwb_rate},
                {"optical_rate", n.optical_rate},       {"altimeter_rate", n.altimeter_rate},
                {"camera_rate", n.camera_rate},         {"ugv_rate", n.ugv_rate},
                {"imu_accel_bias", vec(n.imu_accel_bias)}, {"uwb_bias", n.uwb_bias}};
  json faults = json::array();
  for (const auto& f : c.faults.faults) {
    faults.push_back({{"sensor", to_string(f.sensor)}, {"start", f.start}, {"end", f.end},
                      {"mode", fault_mode_name(f.mode)}, {"sigma_multiplier", f.sigma_multiplier}, {"scale", f.scale}});
  }
  j["faults"] = faults;
  j["confidence"] = {{"eps", c.confidence.eps}, {"m", c.confidence.m}, {"omega0", c.confidence.omega0},
                     {"xi", c.confidence.xi}, {"per_axis_failure", c.confidence.per_axis_failure},
                     {"prior_weight", c.confidence.prior_weight}, {"eps_f", c.confidence.eps_f}};
  j["window"] = {{"tw", c.window.tw}, {"kt", c.window.kt}, {"dt", c.window.dt}};
  j["dynamics"] = {{"drag", vec(c.dynamics.drag)}, {"gravity", c.dynamics.gravity}};
  j["estimator"] = {{"mode", c.estimator.mode == WeightMode::Fixed ? "fixed" : "adaptive"},
                    {"latency_compensation", c.estimator.latency_compensation},
                    {"use_uwb", c.estimator.use_uwb},
                    {"use_optical", c.estimator.use_optical},
                    {"use_altimeter", c.estimator.use_altimeter},
                    {"use_visual", c.estimator.use_visual}};
  const auto& v = c.vision;
  j["vision"] = {{"camera",
                  {{"fx", v.camera.fx}, {"fy", v.camera.fy}, {"cx", v.camera.cx}, {"cy", v.camera.cy},
                   {"width", v.camera.width}, {"height", v.camera.height}}},
                 {"marker_width", v.markers.points[1].x() - v.markers.points[0].x()},
                 {"marker_height", v.markers.points[0].y() - v.markers.points[3].y()},
                 {"mount_offset", vec(v.mechanism_to_ground.translation())},
                 {"max_rate", v.limits.max_rate},
                 {"max_reprojection_px", v.max_reprojection_px}};
  return j.dump(2);
}

}  // namespace galoc
