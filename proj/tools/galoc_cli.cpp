#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "galoc/config.hpp"
#include "galoc/logging.hpp"
#include "galoc/metrics.hpp"
#include "galoc/run_io.hpp"
#include "galoc/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRun = 3;

struct CommonOptions {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string mode;
};

void add_common(CLI::App* app, CommonOptions& o, bool with_mode = true) {
  app->add_option("--config", o.config, "JSON scenario config");
  app->add_option("--preset", o.preset, "Built-in scenario preset");
  app->add_option("--seed", o.seed, "RNG seed");
  app->add_option("--out", o.out, "Output directory");
  if (with_mode) app->add_option("--mode", o.mode, "adaptive | fixed | no-optical | no-uwb");
}

galoc::AblationMode parse_mode(const std::string& name) {
  const auto m = galoc::ablation_mode_from_string(name);
  if (!m) throw galoc::ConfigError(fmt::format("unknown mode '{}'", name));
  return *m;
}

galoc::ScenarioConfig resolve(const CommonOptions& o) {
  if (!o.config.empty() && !o.preset.empty()) {
    throw galoc::ConfigError("--config and --preset are mutually exclusive; set \"preset\" inside the config");
  }
  galoc::ScenarioConfig cfg =
      !o.config.empty() ? galoc::load_config(o.config) : galoc::preset_config(o.preset.empty() ? "s1_clear" : o.preset);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.mode.empty()) cfg = galoc::apply_mode(cfg, parse_mode(o.mode));
  return cfg;
}

nlohmann::ordered_json metrics_object(const galoc::MetricsReport& m) {
  return nlohmann::ordered_json::parse(galoc::metrics_json(m));
}

void emit(const std::string& out_dir, const std::string& file, const std::string& text) {
  std::cout << text << '\n';
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    galoc::write_text_file(std::filesystem::path(out_dir) / file, text + "\n");
  }
}

int cmd_simulate(const CommonOptions& o) {
  const auto cfg = resolve(o);
  const auto log = galoc::run_scenario(cfg);
  const auto report = galoc::compute_metrics(log.ticks, cfg.warmup);
  const std::string out = o.out.empty() ? "out" : o.out;
  galoc::write_run(out, log, report);
  galoc::write_text_file(std::filesystem::path(out) / "config.json", galoc::config_to_json(cfg) + "\n");
  std::cout << galoc::metrics_json(report) << '\n';
  return 0;
}

int cmd_replay(const CommonOptions& o, const std::string& input) {
  const auto cfg = resolve(o);
  const auto read = galoc::read_samples_file(input);
  const auto log = galoc::replay_samples(read.samples, cfg);
  const auto report = galoc::compute_metrics(log.ticks, cfg.warmup);
  if (!o.out.empty()) galoc::write_run(o.out, log, report);
  std::cout << galoc::metrics_json(report) << '\n';
  return 0;
}

int cmd_metrics(const std::string& input, double warmup, const std::string& out) {
  const auto ticks = galoc::read_ticks_file(input);
  emit(out, "metrics.json", galoc::metrics_json(galoc::compute_metrics(ticks, warmup)));
  return 0;
}

int cmd_ablate(const CommonOptions& o) {
  CommonOptions base = o;
  base.mode.clear();
  const auto cfg = resolve(base);
  std::vector<galoc::AblationMode> modes;
  if (o.mode.empty()) {
    modes = {galoc::AblationMode::Adaptive, galoc::AblationMode::Fixed, galoc::AblationMode::NoOptical,
             galoc::AblationMode::NoUwb};
  } else {
    modes = {galoc::AblationMode::Adaptive, parse_mode(o.mode)};
  }
  nlohmann::ordered_json j;
  j["scenario"] = cfg.name;
  j["seed"] = cfg.seed;
  for (auto m : modes) {
    const auto log = galoc::run_scenario(galoc::apply_mode(cfg, m));
    j["modes"][std::string(galoc::to_string(m))] = metrics_object(galoc::compute_metrics(log.ticks, cfg.warmup));
  }
  emit(o.out, "ablation.json", j.dump(2));
  return 0;
}

int cmd_sweep(const CommonOptions& o, const std::vector<int>& tws, const std::vector<int>& kts) {
  const auto cfg = resolve(o);
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (int tw : tws) {
    for (int kt : kts) {
      if (kt > tw) continue;
      auto c = cfg;
      c.window.tw = tw;
      c.window.kt = kt;
      c.derive();
      try {
        c.validate();
      } catch (const std::invalid_argument& e) {
        throw galoc::ConfigError(e.what());
      }
      const auto log = galoc::run_scenario(c);
      j.push_back({{"tw", tw}, {"kt", kt}, {"metrics", metrics_object(galoc::compute_metrics(log.ticks, c.warmup))}});
    }
  }
  emit(o.out, "sweep.json", j.dump(2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  galoc::init_logging();
  CLI::App app{"Ground-aerial relative localization: simulation, replay and metrics"};
  app.require_subcommand(1);

  CommonOptions sim_opts, replay_opts, ablate_opts, sweep_opts;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario in closed loop and write its logs");
  add_common(simulate, sim_opts);

  auto* replay = app.add_subcommand("replay", "Run the estimator on a recorded sample log");
  std::string replay_input;
  replay->add_option("log", replay_input, "Sample CSV (t,sensor_id,v1,v2,v3,valid)")->required();
  add_common(replay, replay_opts);

  auto* metrics = app.add_subcommand("metrics", "Compute metrics from a tick log");
  std::string metrics_input, metrics_out;
  double warmup = 2.0;
  metrics->add_option("ticks", metrics_input, "Tick CSV written by simulate or replay")->required();
  metrics->add_option("--warmup", warmup, "Seconds excluded from error metrics");
  metrics->add_option("--out", metrics_out, "Output directory");

  auto* ablate = app.add_subcommand("ablate", "Compare the adaptive estimator with ablated variants");
  add_common(ablate, ablate_opts);

  auto* sweep = app.add_subcommand("sweep", "Grid over window width and polynomial order");
  add_common(sweep, sweep_opts);
  std::vector<int> tws{4, 6, 8, 10};
  std::vector<int> kts{1, 2, 3};
  sweep->add_option("--tw", tws, "Window widths")->delimiter(',');
  sweep->add_option("--kt", kts, "Polynomial orders")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(sim_opts);
    if (*replay) return cmd_replay(replay_opts, replay_input);
    if (*metrics) return cmd_metrics(metrics_input, warmup, metrics_out);
    if (*ablate) return cmd_ablate(ablate_opts);
    if (*sweep) return cmd_sweep(sweep_opts, tws, kts);
  } catch (const galoc::ConfigError& e) {
    galoc::log_error(e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    galoc::log_error(e.what());
    return kExitRun;
  }
  return 0;
}
