#include "galoc/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace galoc {

MetricsReport compute_metrics(const std::vector<TickRecord>& ticks, double warmup) {
  MetricsReport m;
  m.ticks_total = static_cast<int>(ticks.size());
  if (ticks.empty()) return m;

  const double t0 = ticks.front().t;
  Vec3 sq = Vec3::Zero();
  Vec3 abs = Vec3::Zero();
  double norm_sq = 0.0;
  double solve = 0.0;
  int lost = 0;
  for (const auto& r : ticks) {
    solve += r.solve_ms;
    m.max_solve_ms = std::max(m.max_solve_ms, r.solve_ms);
    if (!r.camera_valid) ++lost;
    if (!r.truth || r.t - t0 < warmup - 1e-9) continue;
    const Vec3 e = r.estimate.head<3>() - r.truth->p;
    sq += e.cwiseAbs2();
    abs += e.cwiseAbs();
    norm_sq += e.squaredNorm();
    m.max_error = std::max(m.max_error, e.norm());
    ++m.ticks_evaluated;
  }
  const double n = static_cast<double>(ticks.size());
  m.mean_solve_ms = solve / n;
  m.visual_loss_pct = 100.0 * lost / n;
  if (m.ticks_evaluated > 0) {
    const double k = static_cast<double>(m.ticks_evaluated);
    m.has_truth = true;
    m.rmse = (sq / k).cwiseSqrt();
    m.mae = abs / k;
    m.ate = std::sqrt(norm_sq / k);
  }
  return m;
}

}  // namespace galoc
