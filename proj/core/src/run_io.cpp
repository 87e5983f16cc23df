#include "galoc/run_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "galoc/logging.hpp"

namespace galoc {

namespace {

constexpr std::string_view kSampleHeader = "t,sensor_id,v1,v2,v3,valid";

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_bool(std::string_view s, bool& out) {
  s = trim(s);
  if (s == "1" || s == "true") return out = true, true;
  if (s == "0" || s == "false") return out = false, true;
  return false;
}

const std::vector<std::string> kTickColumns = {
    "t",        "est_px",   "est_py",   "est_pz",   "est_vx",      "est_vy",   "est_vz",      "prior_px",
    "prior_py", "prior_pz", "prior_vx", "prior_vy", "prior_vz",    "truth_px", "truth_py",    "truth_pz",
    "truth_vx", "truth_vy", "truth_vz", "ref_px",   "ref_py",      "ref_pz",   "ref_vx",      "ref_vy",
    "ref_vz",   "w_inertial", "w_uwb",  "w_altimeter", "w_optical", "w_visual", "status",     "camera_valid",
    "pan",      "tilt",     "solve_ms"};

std::string_view status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Ok: return "ok";
    case SolveStatus::Regularized: return "regularized";
    case SolveStatus::Failed: return "failed";
  }
  return "failed";
}

}  // namespace

void write_samples_csv(std::ostream& os, const std::vector<RawSample>& samples) {
  os << kSampleHeader << '\n';
  for (const auto& s : samples) {
    os << fmt::format("{},{},{},{},{},{}\n", s.t, to_string(s.sensor), s.v[0], s.v[1], s.v[2], s.valid ? 1 : 0);
  }
}

SampleReadResult read_samples_csv(std::istream& is) {
  SampleReadResult r;
  std::string line;
  if (!std::getline(is, line) || trim(line) != kSampleHeader) {
    throw RunError(fmt::format("sample log: expected header '{}'", kSampleHeader));
  }
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    ++r.rows;
    const auto f = split(trim(line));
    RawSample s;
    const auto id = f.size() == 6 ? sensor_id_from_string(trim(f[1])) : std::nullopt;
    if (!id || !parse_double(f[0], s.t) || !parse_double(f[2], s.v[0]) || !parse_double(f[3], s.v[1]) ||
        !parse_double(f[4], s.v[2]) || !parse_bool(f[5], s.valid)) {
      ++r.skipped;
      log_debug(fmt::format("sample log: skipping malformed row {}", r.rows));
      continue;
    }
    s.sensor = *id;
    if (!r.samples.empty() && s.t < r.samples.back().t) {
      throw RunError(fmt::format("sample log: row {} goes back in time", r.rows));
    }
    r.samples.push_back(s);
  }
  if (r.rows > 0 && static_cast<double>(r.skipped) > kMaxSkippedFraction * static_cast<double>(r.rows)) {
    throw RunError(fmt::format("sample log: {} of {} rows malformed", r.skipped, r.rows));
  }
  if (r.skipped > 0) log_warn(fmt::format("sample log: skipped {} malformed rows", r.skipped));
  return r;
}

void write_ticks_csv(std::ostream& os, const std::vector<TickRecord>& ticks) {
  for (std::size_t i = 0; i < kTickColumns.size(); ++i) os << (i ? "," : "") << kTickColumns[i];
  os << '\n';
  fmt::memory_buffer buf;
  auto out = std::back_inserter(buf);
  for (const auto& r : ticks) {
    buf.clear();
    fmt::format_to(out, "{}", r.t);
    for (int i = 0; i < 6; ++i) fmt::format_to(out, ",{}", r.estimate(i));
    for (int i = 0; i < 6; ++i) fmt::format_to(out, ",{}", r.prior(i));
    for (const auto* s : {&r.truth, &r.reference}) {
      for (int i = 0; i < 6; ++i) {
        if (*s) {
          fmt::format_to(out, ",{}", (*s)->stacked()(i));
        } else {
          fmt::format_to(out, ",");
        }
      }
    }
    for (double w : r.weight_trace) fmt::format_to(out, ",{}", w);
    fmt::format_to(out, ",{},{},{},{},{}\n", status_name(r.status), r.camera_valid ? 1 : 0, r.gimbal.pan,
                   r.gimbal.tilt, r.solve_ms);
    os << std::string_view(buf.data(), buf.size());
  }
}

std::vector<TickRecord> read_ticks_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw RunError("tick log: empty file");
  const auto header = split(trim(line));
  if (header.size() != kTickColumns.size()) throw RunError("tick log: unexpected header");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] != kTickColumns[i]) throw RunError(fmt::format("tick log: unexpected column '{}'", header[i]));
  }
  std::vector<TickRecord> out;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line));
    if (f.size() != kTickColumns.size()) throw RunError(fmt::format("tick log: row {} has {} fields", row, f.size()));
    auto num = [&](std::size_t i) {
      double v = 0.0;
      if (!parse_double(f[i], v)) throw RunError(fmt::format("tick log: row {} column {} is not a number", row, i));
      return v;
    };
    auto state = [&](std::size_t i) -> std::optional<RelativeState> {
      if (trim(f[i]).empty()) return std::nullopt;
      Vector6d x;
      for (int j = 0; j < 6; ++j) x(j) = num(i + static_cast<std::size_t>(j));
      return RelativeState::from_stacked(x);
    };
    TickRecord r;
    r.t = num(0);
    for (int j = 0; j < 6; ++j) {
      r.estimate(j) = num(1 + static_cast<std::size_t>(j));
      r.prior(j) = num(7 + static_cast<std::size_t>(j));
    }
    r.truth = state(13);
    r.reference = state(19);
    for (std::size_t j = 0; j < r.weight_trace.size(); ++j) r.weight_trace[j] = num(25 + j);
    const auto st = trim(f[30]);
    r.status = st == "ok" ? SolveStatus::Ok : st == "regularized" ? SolveStatus::Regularized : SolveStatus::Failed;
    if (!parse_bool(f[31], r.camera_valid)) throw RunError(fmt::format("tick log: row {} camera_valid", row));
    r.gimbal.pan = num(32);
    r.gimbal.tilt = num(33);
    r.solve_ms = num(34);
    out.push_back(r);
  }
  return out;
}

std::string metrics_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["has_truth"] = m.has_truth;
  j["rmse"] = {m.rmse.x(), m.rmse.y(), m.rmse.z()};
  j["mae"] = {m.mae.x(), m.mae.y(), m.mae.z()};
  j["max_error"] = m.max_error;
  j["ate"] = m.ate;
  j["mean_solve_ms"] = m.mean_solve_ms;
  j["max_solve_ms"] = m.max_solve_ms;
  j["visual_loss_pct"] = m.visual_loss_pct;
  j["ticks_total"] = m.ticks_total;
  j["ticks_evaluated"] = m.ticks_evaluated;
  return j.dump(2);
}

SampleReadResult read_samples_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RunError(fmt::format("cannot open '{}'", path.string()));
  return read_samples_csv(in);
}

std::vector<TickRecord> read_ticks_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RunError(fmt::format("cannot open '{}'", path.string()));
  return read_ticks_csv(in);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw RunError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw RunError(fmt::format("write to '{}' failed", path.string()));
}

void write_run(const std::filesystem::path& dir, const RunLog& log, const MetricsReport& report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw RunError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  std::ostringstream samples, ticks;
  write_samples_csv(samples, log.samples);
  write_ticks_csv(ticks, log.ticks);
  write_text_file(dir / "samples.csv", samples.str());
  write_text_file(dir / "ticks.csv", ticks.str());
  write_text_file(dir / "metrics.json", metrics_json(report) + "\n");
}

}  // namespace galoc
