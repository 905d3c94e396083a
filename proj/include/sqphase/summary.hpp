#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "sqphase/adaptive.hpp"
#include "sqphase/fisher.hpp"
#include "sqphase/statistics.hpp"

// Campaign post-processing shared by the CLI and the acceptance suite.

namespace sqphase {

struct PointSummary {
  double theta = 0.0;
  double holevo_var = 0.0;
  double normalized_var = 0.0;  // holevo * N * F_Q (lossy F_Q when T < 1)
  double batch_std = 0.0;       // std-dev of per-batch normalized variances
  std::size_t runs = 0;
  std::size_t failures = 0;
};

inline std::vector<PointSummary> summarize_campaign(const CampaignResult& campaign,
                                                    const StrategyConfig& config) {
  const double n_total = static_cast<double>(config.n_total);
  const double fq = qfi_lossy(config.probe.r, config.probe.transmission);
  const double period = period_value(config.period());
  std::vector<PointSummary> out;
  out.reserve(campaign.points.size());
  for (const PointResult& pt : campaign.points) {
    PointSummary s;
    s.theta = pt.theta;
    s.runs = campaign.runs_per_point;
    s.failures = pt.failures;
    std::vector<double> valid;
    valid.reserve(pt.estimates.size());
    for (const double e : pt.estimates) {
      if (std::isfinite(e)) valid.push_back(e);
    }
    s.holevo_var = holevo_variance(valid, pt.theta, period);
    s.normalized_var = s.holevo_var * n_total * fq;

    const std::size_t per_batch = campaign.runs_per_point / campaign.batches;
    std::vector<double> batch_vals;
    for (std::size_t b = 0; b < campaign.batches; ++b) {
      std::vector<double> chunk;
      chunk.reserve(per_batch);
      for (std::size_t j = b * per_batch; j < (b + 1) * per_batch; ++j) {
        if (std::isfinite(pt.estimates[j])) chunk.push_back(pt.estimates[j]);
      }
      if (chunk.empty()) continue;
      const double hv = holevo_variance(chunk, pt.theta, period);
      if (std::isfinite(hv)) batch_vals.push_back(hv * n_total * fq);
    }
    if (batch_vals.size() >= 2) {
      double mean = 0.0;
      for (const double v : batch_vals) mean += v;
      mean /= static_cast<double>(batch_vals.size());
      double ss = 0.0;
      for (const double v : batch_vals) ss += (v - mean) * (v - mean);
      s.batch_std = std::sqrt(ss / static_cast<double>(batch_vals.size() - 1));
    }
    out.push_back(s);
  }
  return out;
}

// mean of normalized variances over the grid, skipping non-finite entries
inline double grid_mean_normalized(std::span<const PointSummary> points) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const PointSummary& p : points) {
    if (std::isfinite(p.normalized_var)) {
      acc += p.normalized_var;
      ++n;
    }
  }
  return n ? acc / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace sqphase
