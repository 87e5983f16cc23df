#pragma once

#include <vector>

#include "galoc/scenario.hpp"

namespace galoc {

struct MetricsReport {
  bool has_truth{false};
  Vec3 rmse{Vec3::Zero()};
  Vec3 mae{Vec3::Zero()};
  double max_error{0.0};  ///< max 3D position error norm (m)
  double ate{0.0};        ///< RMS of the 3D position error norm (m)
  double mean_solve_ms{0.0};
  double max_solve_ms{0.0};
  double visual_loss_pct{0.0};  ///< ticks without a valid camera sample (%)
  int ticks_total{0};
  int ticks_evaluated{0};
};

/// Error metrics skip ticks before `warmup` seconds and ticks without truth.
/// Without any truth only timing and visual loss are reported.
MetricsReport compute_metrics(const std::vector<TickRecord>& ticks, double warmup);

}  // namespace galoc
