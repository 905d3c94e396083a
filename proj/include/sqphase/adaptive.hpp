#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqphase/estimation.hpp"
#include "sqphase/gaussian.hpp"
#include "sqphase/kernels.hpp"
#include "sqphase/measurements.hpp"

// The adaptive strategies. A run is a pure function of (config, theta_true,
// stream): samplers draw from per-step substreams, estimates feed the next
// step's POVM setting, and the final estimate comes from the configured MLE
// scope (joint likelihood of all accumulated samples by default).

namespace sqphase {

enum class StrategyKind { aqse_homodyne, chh, nonadaptive_homodyne, two_step };
enum class MleScope { joint, latest };

const char* to_string(StrategyKind kind);
const char* to_string(MleScope scope);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::aqse_homodyne;
  std::size_t n_total = 3705;  // N
  std::size_t steps = 15;      // m (includes the heterodyne step for chh)
  std::size_t nu = 247;        // probes per step; N = nu*m for equal-split kinds
  SqueezedProbe probe;
  double first_step_fraction = 0.5;  // two_step only
  MleScope mle_scope = MleScope::joint;
  std::uint64_t root_seed = 1;
  GridSearchPolicy search;

  Period period() const { return kind == StrategyKind::chh ? Period::pi : Period::half_pi; }
  void validate() const;  // throws std::invalid_argument naming the offending fields
};

struct TraceStep {
  bool heterodyne = false;
  double povm_setting = 0.0;  // unused for heterodyne steps
  std::size_t n_outcomes = 0;
  double sum_sq = 0.0;                // homodyne sufficient statistic
  kernels::ComplexSums het_sums{};    // heterodyne sufficient statistics
  double next_setting = 0.0;          // running estimate = next step's setting
  bool flat_fallback = false;
};

struct AdaptiveTrace {
  std::vector<TraceStep> steps;
  EstimateResult final_estimate;
};

AdaptiveTrace run_aqse_homodyne(const StrategyConfig& config, double theta_true,
                                const RngStream& stream);
AdaptiveTrace run_chh(const StrategyConfig& config, double theta_true, const RngStream& stream);
AdaptiveTrace run_nonadaptive_homodyne(const StrategyConfig& config, double theta_true,
                                       const RngStream& stream);
AdaptiveTrace run_two_step(const StrategyConfig& config, double theta_true,
                           const RngStream& stream);
AdaptiveTrace run_strategy(const StrategyConfig& config, double theta_true,
                           const RngStream& stream);

// stream used for run `run_index` at grid point `point_index`
RngStream campaign_stream(std::uint64_t root_seed, std::size_t point_index,
                          std::size_t run_index);

struct PointResult {
  double theta = 0.0;
  std::vector<double> estimates;  // indexed by run; NaN for failed runs
  std::size_t failures = 0;
  std::string first_error;
};

struct CampaignResult {
  std::vector<PointResult> points;
  std::size_t runs_per_point = 0;
  std::size_t batches = 1;
};

// Executes runs_per_point independent runs per grid point. Results are a pure
// function of (config, theta_grid, runs_per_point); the worker count only
// affects scheduling. Per-run failures are recorded, not fatal.
CampaignResult run_campaign(const StrategyConfig& config, const std::vector<double>& theta_grid,
                            std::size_t runs_per_point, std::size_t batches,
                            std::size_t workers = 1);

// optional raw-outcome capture for --dump-traces
struct TraceSink {
  // (run, step, index, value_re, value_im)
  virtual void outcome(std::size_t run, std::size_t step, std::size_t index, double re,
                       double im) = 0;
  virtual ~TraceSink() = default;
};
AdaptiveTrace run_strategy_traced(const StrategyConfig& config, double theta_true,
                                  const RngStream& stream, std::size_t run_index,
                                  TraceSink* sink);

}  // namespace sqphase
