#include "sqphase/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace sqphase {

namespace {

constexpr std::uint64_t kSaltGuess = 0;      // initial random setting / fallbacks
constexpr std::uint64_t kSaltStepBase = 100; // sampler stream for step i is child(100 + i)

struct Runner {
  const StrategyConfig& cfg;
  RngStream stream;
  TraceSink* sink = nullptr;
  std::size_t run_index = 0;
  std::vector<double> scratch;

  void dump(std::size_t step, const HomodyneBatch& b) {
    if (!sink) return;
    for (std::size_t i = 0; i < b.outcomes.size(); ++i) {
      sink->outcome(run_index, step, i, b.outcomes[i], 0.0);
    }
  }
  void dump(std::size_t step, const HeterodyneBatch& b) {
    if (!sink) return;
    for (std::size_t i = 0; i < b.size(); ++i) {
      sink->outcome(run_index, step, i, b.re[i], b.im[i]);
    }
  }

  AdaptiveTrace aqse() {
    const double r = cfg.probe.r;
    const double t = cfg.probe.transmission;
    const bool joint = cfg.mle_scope == MleScope::joint;
    double setting = stream.child(kSaltGuess).uniform01(0) * kHalfPi;
    AccumulatedLikelihood lik(r, t);
    const double grid_h = kHalfPi / static_cast<double>(cfg.search.grid_points);
    if (joint) scratch.assign(cfg.search.grid_points, 0.0);
    AdaptiveTrace trace;
    trace.steps.reserve(cfg.steps);
    EstimateResult est;
    for (std::size_t i = 0; i < cfg.steps; ++i) {
      const HomodyneBatch batch =
          sample_homodyne(cfg.probe, theta_, setting, cfg.nu, stream.child(kSaltStepBase + i));
      dump(i, batch);
      const double q = batch.sum_squares();
      lik.add_homodyne(static_cast<double>(cfg.nu), q, batch.povm_setting.value);
      if (joint) lik.accumulate_batch_grid(i, 0.0, grid_h, scratch.data(), scratch.size());
      if (i == 0 || !joint) {
        est = mle_homodyne_truncated(batch, r, t);
      } else {
        est = maximize_from_grid(lik, Period::half_pi, scratch, cfg.search);
      }
      TraceStep ts;
      ts.povm_setting = setting;
      ts.n_outcomes = cfg.nu;
      ts.sum_sq = q;
      ts.next_setting = est.estimate.value;
      trace.steps.push_back(ts);
      setting = est.estimate.value;
    }
    trace.final_estimate = est;
    return trace;
  }

  AdaptiveTrace chh() {
    const double r = cfg.probe.r;
    const double t = cfg.probe.transmission;
    AdaptiveTrace trace;
    trace.steps.reserve(cfg.steps);
    AccumulatedLikelihood lik(r, t);

    const bool joint = cfg.mle_scope == MleScope::joint;
    const double grid_h = kPi / static_cast<double>(cfg.search.grid_points);

    const HeterodyneBatch het =
        sample_heterodyne(cfg.probe, theta_, cfg.nu, stream.child(kSaltStepBase));
    dump(0, het);
    const kernels::ComplexSums sums =
        kernels::active().complex_sums(het.re.data(), het.im.data(), het.size());
    lik.set_heterodyne(static_cast<double>(cfg.nu), sums);
    if (joint) {
      scratch.assign(cfg.search.grid_points, 0.0);
      lik.accumulate_heterodyne_grid(0.0, grid_h, scratch.data(), scratch.size());
    }

    EstimateResult est;
    double setting = 0.0;
    TraceStep first;
    first.heterodyne = true;
    first.n_outcomes = cfg.nu;
    first.het_sums = sums;
    try {
      est = mle_heterodyne_closed_form(het, r, t);
      setting = est.estimate.value;
    } catch (const FlatLikelihoodError&) {
      setting = stream.child(kSaltGuess).uniform01(0) * kPi;
      est.estimate = Phase{setting, Period::pi};
      est.stationary = false;
      first.flat_fallback = true;
    }
    first.next_setting = setting;
    trace.steps.push_back(first);

    for (std::size_t i = 1; i < cfg.steps; ++i) {
      const HomodyneBatch batch =
          sample_homodyne(cfg.probe, theta_, setting, cfg.nu, stream.child(kSaltStepBase + i));
      dump(i, batch);
      const double q = batch.sum_squares();
      lik.add_homodyne(static_cast<double>(cfg.nu), q, batch.povm_setting.value);
      if (joint) {
        lik.accumulate_batch_grid(i - 1, 0.0, grid_h, scratch.data(), scratch.size());
        est = maximize_from_grid(lik, Period::pi, scratch, cfg.search);
      } else {
        // single-batch estimate is pi/2-periodic; lift it to [0, pi) with the
        // heterodyne likelihood deciding between the two candidates
        const EstimateResult local = mle_homodyne_truncated(batch, r, t);
        const double lo = local.estimate.value;
        const double hi = wrap_phase_value(lo + kHalfPi, kPi);
        const double f_lo = loglik_heterodyne(het, r, lo, t);
        const double f_hi = loglik_heterodyne(het, r, hi, t);
        est = local;
        est.estimate = Phase{f_lo >= f_hi ? lo : hi, Period::pi};
        est.loglik_at_estimate = lik.eval(est.estimate.value);
      }
      TraceStep ts;
      ts.povm_setting = setting;
      ts.n_outcomes = cfg.nu;
      ts.sum_sq = q;
      ts.next_setting = est.estimate.value;
      trace.steps.push_back(ts);
      setting = est.estimate.value;
    }
    trace.final_estimate = est;
    return trace;
  }

  AdaptiveTrace nonadaptive() {
    const double setting = optimal_phase_value(cfg.probe.r);
    const HomodyneBatch batch =
        sample_homodyne(cfg.probe, theta_, setting, cfg.n_total, stream.child(kSaltStepBase));
    dump(0, batch);
    const EstimateResult est =
        mle_homodyne_truncated(batch, cfg.probe.r, cfg.probe.transmission);
    AdaptiveTrace trace;
    TraceStep ts;
    ts.povm_setting = setting;
    ts.n_outcomes = cfg.n_total;
    ts.sum_sq = batch.sum_squares();
    ts.next_setting = est.estimate.value;
    trace.steps.push_back(ts);
    trace.final_estimate = est;
    return trace;
  }

  AdaptiveTrace two_step() {
    const double r = cfg.probe.r;
    const double t = cfg.probe.transmission;
    const auto n1 = static_cast<std::size_t>(
        std::floor(cfg.first_step_fraction * static_cast<double>(cfg.n_total)));
    const std::size_t first = std::clamp<std::size_t>(n1, 1, cfg.n_total - 1);
    const std::size_t second = cfg.n_total - first;

    const double setting1 = optimal_phase_value(r);
    const HomodyneBatch b1 =
        sample_homodyne(cfg.probe, theta_, setting1, first, stream.child(kSaltStepBase));
    dump(0, b1);
    const EstimateResult est1 = mle_homodyne_truncated(b1, r, t);

    const double setting2 = est1.estimate.value;
    const HomodyneBatch b2 =
        sample_homodyne(cfg.probe, theta_, setting2, second, stream.child(kSaltStepBase + 1));
    dump(1, b2);

    EstimateResult est;
    if (cfg.mle_scope == MleScope::joint) {
      AccumulatedLikelihood lik(r, t);
      lik.add_homodyne(static_cast<double>(first), b1.sum_squares(), b1.povm_setting.value);
      lik.add_homodyne(static_cast<double>(second), b2.sum_squares(), b2.povm_setting.value);
      est = maximize_accumulated(lik, Period::half_pi, cfg.search, scratch);
    } else {
      est = mle_homodyne_truncated(b2, r, t);
    }

    AdaptiveTrace trace;
    TraceStep s1;
    s1.povm_setting = setting1;
    s1.n_outcomes = first;
    s1.sum_sq = b1.sum_squares();
    s1.next_setting = setting2;
    trace.steps.push_back(s1);
    TraceStep s2;
    s2.povm_setting = setting2;
    s2.n_outcomes = second;
    s2.sum_sq = b2.sum_squares();
    s2.next_setting = est.estimate.value;
    trace.steps.push_back(s2);
    trace.final_estimate = est;
    return trace;
  }

  double theta_ = 0.0;
};

}  // namespace

const char* to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::aqse_homodyne: return "aqse_homodyne";
    case StrategyKind::chh: return "chh";
    case StrategyKind::nonadaptive_homodyne: return "nonadaptive_homodyne";
    case StrategyKind::two_step: return "two_step";
  }
  return "?";
}

const char* to_string(MleScope scope) {
  return scope == MleScope::joint ? "joint" : "latest";
}

void StrategyConfig::validate() const {
  probe.validate();
  if (!(probe.r > 0.0)) {
    throw std::invalid_argument("strategy.r: homodyne strategies require r > 0");
  }
  if (search.grid_points < 4) {
    throw std::invalid_argument("strategy.grid_points: must be >= 4");
  }
  switch (kind) {
    case StrategyKind::aqse_homodyne:
    case StrategyKind::chh:
      if (steps < 2) {
        throw std::invalid_argument("strategy.m: adaptive strategies require m >= 2");
      }
      if (nu == 0) throw std::invalid_argument("strategy.nu: must be >= 1");
      if (n_total != nu * steps) {
        throw std::invalid_argument("strategy.N, strategy.m: N must equal nu*m (nu = N/m)");
      }
      break;
    case StrategyKind::nonadaptive_homodyne:
      if (n_total == 0) throw std::invalid_argument("strategy.N: must be >= 1");
      break;
    case StrategyKind::two_step:
      if (n_total < 2) throw std::invalid_argument("strategy.N: two_step requires N >= 2");
      if (!(first_step_fraction > 0.0 && first_step_fraction < 1.0)) {
        throw std::invalid_argument("strategy.first_step_fraction: must lie in (0, 1)");
      }
      break;
  }
}

AdaptiveTrace run_strategy_traced(const StrategyConfig& config, double theta_true,
                                  const RngStream& stream, std::size_t run_index,
                                  TraceSink* sink) {
  Runner runner{config, stream, sink, run_index, {}};
  runner.theta_ = theta_true;
  switch (config.kind) {
    case StrategyKind::aqse_homodyne: return runner.aqse();
    case StrategyKind::chh: return runner.chh();
    case StrategyKind::nonadaptive_homodyne: return runner.nonadaptive();
    case StrategyKind::two_step: return runner.two_step();
  }
  throw std::logic_error("unknown strategy kind");
}

AdaptiveTrace run_strategy(const StrategyConfig& config, double theta_true,
                           const RngStream& stream) {
  return run_strategy_traced(config, theta_true, stream, 0, nullptr);
}

AdaptiveTrace run_aqse_homodyne(const StrategyConfig& config, double theta_true,
                                const RngStream& stream) {
  Runner runner{config, stream, nullptr, 0, {}};
  runner.theta_ = theta_true;
  return runner.aqse();
}

AdaptiveTrace run_chh(const StrategyConfig& config, double theta_true,
                      const RngStream& stream) {
  Runner runner{config, stream, nullptr, 0, {}};
  runner.theta_ = theta_true;
  return runner.chh();
}

AdaptiveTrace run_nonadaptive_homodyne(const StrategyConfig& config, double theta_true,
                                       const RngStream& stream) {
  Runner runner{config, stream, nullptr, 0, {}};
  runner.theta_ = theta_true;
  return runner.nonadaptive();
}

AdaptiveTrace run_two_step(const StrategyConfig& config, double theta_true,
                           const RngStream& stream) {
  Runner runner{config, stream, nullptr, 0, {}};
  runner.theta_ = theta_true;
  return runner.two_step();
}

RngStream campaign_stream(std::uint64_t root_seed, std::size_t point_index,
                          std::size_t run_index) {
  return RngStream::root(root_seed).child(point_index).child(run_index);
}

CampaignResult run_campaign(const StrategyConfig& config, const std::vector<double>& theta_grid,
                            std::size_t runs_per_point, std::size_t batches,
                            std::size_t workers) {
  config.validate();
  if (theta_grid.empty()) throw std::invalid_argument("campaign.theta_grid: empty");
  if (runs_per_point == 0) throw std::invalid_argument("campaign.runs: must be >= 1");
  if (batches == 0 || runs_per_point % batches != 0) {
    throw std::invalid_argument("campaign.runs, campaign.batches: runs must divide into batches");
  }

  CampaignResult result;
  result.runs_per_point = runs_per_point;
  result.batches = batches;
  result.points.resize(theta_grid.size());
  for (std::size_t p = 0; p < theta_grid.size(); ++p) {
    result.points[p].theta = theta_grid[p];
    result.points[p].estimates.assign(runs_per_point, 0.0);
  }
  std::vector<std::string> errors(theta_grid.size() * runs_per_point);

  const std::size_t total = theta_grid.size() * runs_per_point;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, total);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const std::size_t p = idx / runs_per_point;
      const std::size_t j = idx % runs_per_point;
      try {
        const AdaptiveTrace trace = run_strategy(
            config, theta_grid[p], campaign_stream(config.root_seed, p, j));
        result.points[p].estimates[j] = trace.final_estimate.estimate.value;
      } catch (const std::exception& e) {
        result.points[p].estimates[j] = std::nan("");
        errors[idx] = e.what();
      }
    }
  };

  if (workers <= 1) {
    work(0, total);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = total * w / workers;
      const std::size_t end = total * (w + 1) / workers;
      pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  for (std::size_t p = 0; p < theta_grid.size(); ++p) {
    for (std::size_t j = 0; j < runs_per_point; ++j) {
      const std::size_t idx = p * runs_per_point + j;
      if (!errors[idx].empty()) {
        result.points[p].failures += 1;
        if (result.points[p].first_error.empty()) result.points[p].first_error = errors[idx];
      }
    }
  }
  return result;
}

}  // namespace sqphase
