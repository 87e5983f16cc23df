#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "galoc/metrics.hpp"
#include "galoc/scenario.hpp"

namespace galoc {

/// A run could not be completed (unreadable or mostly malformed input).
class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMaxSkippedFraction = 0.05;

struct SampleReadResult {
  std::vector<RawSample> samples;
  std::size_t rows{0};
  std::size_t skipped{0};
};

/// Columns t,sensor_id,v1,v2,v3,valid. Doubles use the shortest
/// representation that round-trips exactly.
void write_samples_csv(std::ostream& os, const std::vector<RawSample>& samples);
/// Malformed rows are skipped and counted; more than 5% skipped, a missing
/// header or out-of-order timestamps raise RunError.
SampleReadResult read_samples_csv(std::istream& is);

void write_ticks_csv(std::ostream& os, const std::vector<TickRecord>& ticks);
std::vector<TickRecord> read_ticks_csv(std::istream& is);

std::string metrics_json(const MetricsReport& report);

SampleReadResult read_samples_file(const std::filesystem::path& path);
std::vector<TickRecord> read_ticks_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// samples.csv, ticks.csv and metrics.json under `dir`.
void write_run(const std::filesystem::path& dir, const RunLog& log, const MetricsReport& report);

}  // namespace galoc
