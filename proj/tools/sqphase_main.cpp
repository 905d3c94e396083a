#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sqphase/adaptive.hpp"
#include "sqphase/config.hpp"
#include "sqphase/csv.hpp"
#include "sqphase/fisher.hpp"
#include "sqphase/kernels.hpp"
#include "sqphase/statistics.hpp"
#include "sqphase/summary.hpp"

namespace fs = std::filesystem;
using namespace sqphase;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CommonOptions {
  std::string config_path;
  std::string preset;
  std::string out_dir = ".";
  std::string kernels = "auto";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t workers = 0;
  bool workers_set = false;
  std::size_t runs = 0;
  bool runs_set = false;
  bool dump_traces = false;
};

CampaignSpec load_spec(const CommonOptions& opt) {
  if (!opt.config_path.empty() && !opt.preset.empty()) {
    throw ConfigError("--config and --preset are mutually exclusive");
  }
  CampaignSpec spec;
  if (!opt.config_path.empty()) {
    spec = parse_config(read_file(opt.config_path));
  } else if (!opt.preset.empty()) {
    spec = preset_config(opt.preset);
  } else {
    throw ConfigError("one of --config or --preset is required");
  }
  if (opt.seed_set) spec.strategy.root_seed = opt.seed;
  if (opt.workers_set) spec.workers = opt.workers;
  if (opt.runs_set) {
    spec.runs = opt.runs;
    if (spec.runs % spec.batches != 0 && spec.runs >= spec.batches) {
      spec.runs -= spec.runs % spec.batches;
    }
    if (spec.runs < spec.batches) spec.batches = 1;
  }
  spec.validate();
  return spec;
}

void write_echo(const CampaignSpec& spec, const fs::path& dir, std::size_t total_failures) {
  std::ofstream out(dir / "config_echo.json", std::ios::binary);
  std::string body = config_json(spec);
  // append run provenance
  body.insert(body.rfind('}'),
              ",\n  \"kernel_backend\": \"" +
                  std::string(kernels::active_backend() == kernels::Backend::avx2 ? "avx2"
                                                                                  : "scalar") +
                  "\",\n  \"run_failures\": " + std::to_string(total_failures) + "\n");
  out << body << "\n";
}

class CsvTraceSink final : public TraceSink {
 public:
  explicit CsvTraceSink(const std::string& path)
      : writer_(path, {"run", "step", "index", "value_re", "value_im"}) {}
  void outcome(std::size_t run, std::size_t step, std::size_t index, double re,
               double im) override {
    writer_.field(run).field(step).field(index).field(re).field(im);
    writer_.end_row();
  }
  void close() { writer_.close(); }

 private:
  csv::Writer writer_;
};

int cmd_simulate(const CommonOptions& opt) {
  CampaignSpec spec = load_spec(opt);
  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);

  csv::Writer summary(
      (dir / "summary.csv").string(),
      {"theta", "kind", "m", "nu", "r", "T", "holevo_var", "normalized_var", "batch_std",
       "runs", "qcrb_bound", "crb_bound"});

  std::size_t total_failures = 0;
  for (const double t : spec.transmissions()) {
    StrategyConfig cfg = spec.strategy;
    cfg.probe.transmission = t;

    CampaignResult campaign;
    if (opt.dump_traces) {
      std::ostringstream name;
      name << "traces_T" << csv::format_double(t) << ".csv";
      CsvTraceSink sink((dir / name.str()).string());
      campaign.runs_per_point = spec.runs;
      campaign.batches = spec.batches;
      campaign.points.resize(spec.theta_grid.size());
      for (std::size_t p = 0; p < spec.theta_grid.size(); ++p) {
        campaign.points[p].theta = spec.theta_grid[p];
        campaign.points[p].estimates.assign(spec.runs, 0.0);
        for (std::size_t j = 0; j < spec.runs; ++j) {
          try {
            const AdaptiveTrace tr = run_strategy_traced(
                cfg, spec.theta_grid[p], campaign_stream(cfg.root_seed, p, j),
                p * spec.runs + j, &sink);
            campaign.points[p].estimates[j] = tr.final_estimate.estimate.value;
          } catch (const std::exception& e) {
            campaign.points[p].estimates[j] = std::nan("");
            campaign.points[p].failures += 1;
            if (campaign.points[p].first_error.empty()) {
              campaign.points[p].first_error = e.what();
            }
          }
        }
      }
      sink.close();
    } else {
      campaign = run_campaign(cfg, spec.theta_grid, spec.runs, spec.batches, spec.workers);
    }

    const double n_total = static_cast<double>(cfg.n_total);
    const double qcrb_bound = 1.0 / (n_total * qfi_lossy(cfg.probe.r, t));
    const double crb_bound = 1.0 / (n_total * fisher_homodyne_lossy_max(cfg.probe.r, t));
    for (const PointSummary& s : summarize_campaign(campaign, cfg)) {
      summary.field(s.theta)
          .field(std::string(to_string(cfg.kind)))
          .field(cfg.steps)
          .field(cfg.nu)
          .field(cfg.probe.r)
          .field(t)
          .field(s.holevo_var)
          .field(s.normalized_var)
          .field(s.batch_std)
          .field(s.runs)
          .field(qcrb_bound)
          .field(crb_bound);
      summary.end_row();
      total_failures += s.failures;
    }
  }
  summary.close();
  write_echo(spec, dir, total_failures);
  if (total_failures > 0) {
    std::cerr << "warning: " << total_failures
              << " run(s) failed; summary statistics exclude them (partial output)\n";
  }
  std::cout << "wrote " << (dir / "summary.csv").string() << "\n";
  return 0;
}

int cmd_fisher(double r, double transmission, double sigma_r, double sigma_lo,
               std::size_t grid_n, std::size_t n_probes, bool loss_sweep, bool lo_sweep,
               const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  const std::vector<double> grid = uniform_theta_grid(grid_n, kHalfPi);
  const FisherReport rep = build_fisher_report(r, grid, n_probes);

  csv::Writer w((dir / "fisher.csv").string(),
                {"theta", "cfi_homodyne", "qfi", "qcrb", "snl", "het_limit"});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    w.field(rep.theta_grid[i])
        .field(rep.cfi_homodyne[i])
        .field(rep.qfi)
        .field(rep.qcrb)
        .field(rep.snl)
        .field(rep.het_limit);
    w.end_row();
  }
  w.close();

  if (loss_sweep) {
    csv::Writer lw((dir / "loss.csv").string(),
                   {"r", "T", "qfi_lossy_ratio", "cfi_homodyne_lossy_ratio"});
    for (const double rr : {0.5, 1.0, 1.5}) {
      const double fq = qfi_squeezed_vacuum(rr);
      for (std::size_t i = 0; i <= 100; ++i) {
        const double tt = static_cast<double>(i) / 100.0;
        lw.field(rr).field(tt).field(qfi_lossy(rr, tt) / fq).field(
            fisher_homodyne_lossy_max(rr, tt) / fq);
        lw.end_row();
      }
    }
    lw.close();
  }

  if (lo_sweep || sigma_lo > 0.0) {
    csv::Writer nw((dir / "lo_noise.csv").string(), {"sigma_lo", "cfi_conditional"});
    if (lo_sweep) {
      for (std::size_t i = 1; i <= 30; ++i) {
        const double s = 0.005 * static_cast<double>(i);
        nw.field(s).field(conditional_fisher_lo_noise(r, s));
        nw.end_row();
      }
    } else {
      nw.field(sigma_lo).field(conditional_fisher_lo_noise(r, sigma_lo));
      nw.end_row();
    }
    nw.close();
  }

  if (sigma_r > 0.0) {
    csv::Writer sw((dir / "state_prep.csv").string(), {"theta", "cfi_conditional"});
    for (const double th : grid) {
      sw.field(th).field(conditional_fisher_state_prep(r, sigma_r, th));
      sw.end_row();
    }
    sw.close();
  }

  (void)transmission;
  std::cout << "wrote " << (dir / "fisher.csv").string() << "\n";
  return 0;
}

int cmd_probabilities(const std::vector<double>& r_list, const std::vector<std::size_t>& nu_list,
                      std::size_t grid_n, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  const std::vector<double> grid = uniform_theta_grid(grid_n, kHalfPi);

  csv::Writer w2((dir / "fig2.csv").string(), {"r", "nu", "theta", "p_nonstationary"});
  for (const double r : r_list) {
    for (const std::size_t nu : nu_list) {
      for (const double th : grid) {
        w2.field(r).field(nu).field(th).field(1.0 - stationary_point_prob(th, r, nu));
        w2.end_row();
      }
    }
  }
  w2.close();

  csv::Writer w3((dir / "fig3.csv").string(), {"r", "nu", "averaged_nonstationary_prob"});
  for (const double r : r_list) {
    std::vector<std::size_t> nus = nu_list;
    if (std::find(nus.begin(), nus.end(), std::size_t{1}) == nus.end()) {
      nus.insert(nus.begin(), 1);  // the nu = 1 upper-bound point
    }
    for (const std::size_t nu : nus) {
      w3.field(r).field(nu).field(averaged_nonstationary_prob(r, nu));
      w3.end_row();
    }
  }
  w3.close();
  std::cout << "wrote " << (dir / "fig2.csv").string() << " and fig3.csv\n";
  return 0;
}

int cmd_diagnose(const CommonOptions& opt, double theta0) {
  CampaignSpec spec = load_spec(opt);
  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);

  // Fig. 11-style moment sweep at fixed theta0
  csv::Writer mw((dir / "moments.csv").string(),
                 {"m", "nu", "samples", "bias", "holevo_var", "normalized_var", "skewness",
                  "excess_kurtosis"});
  for (const std::size_t m : spec.diagnose.m_list) {
    StrategyConfig cfg = spec.strategy;
    if (cfg.n_total % m != 0) {
      throw ConfigError("diagnose.m_list: m = " + std::to_string(m) +
                        " does not divide N = " + std::to_string(cfg.n_total));
    }
    cfg.steps = m;
    cfg.nu = cfg.n_total / m;
    const CampaignResult campaign =
        run_campaign(cfg, {theta0}, spec.diagnose.samples, 1, spec.workers);
    EstimateBatch batch;
    batch.theta_true = theta0;
    batch.period = cfg.period();
    for (const double e : campaign.points[0].estimates) {
      if (std::isfinite(e)) batch.estimates.push_back(e);
    }
    const MomentReport rep = moment_report(batch);
    const double norm = rep.holevo_variance * static_cast<double>(cfg.n_total) *
                        qfi_lossy(cfg.probe.r, cfg.probe.transmission);
    mw.field(m)
        .field(cfg.nu)
        .field(batch.estimates.size())
        .field(rep.bias)
        .field(rep.holevo_variance)
        .field(norm)
        .field(rep.skewness)
        .field(rep.excess_kurtosis);
    mw.end_row();
  }
  mw.close();

  // normality protocol: draws of theta0, AD against the asymptotic null,
  // Fisher-combined p per repetition
  csv::Writer nw((dir / "normality.csv").string(),
                 {"repetition", "draw", "theta0", "a2", "p_value", "combined_p"});
  StrategyConfig cfg = spec.strategy;
  cfg.kind = StrategyKind::chh;
  cfg.steps = spec.diagnose.normality_m;
  cfg.nu = spec.diagnose.normality_nu;
  cfg.n_total = cfg.steps * cfg.nu;
  const double null_var =
      1.0 / (static_cast<double>(cfg.n_total) * qfi_squeezed_vacuum(cfg.probe.r));
  for (std::size_t rep = 0; rep < spec.diagnose.normality_repetitions; ++rep) {
    RngStream draw_stream = RngStream::root(cfg.root_seed).child(7770 + rep);
    std::vector<double> thetas(spec.diagnose.normality_draws);
    std::vector<double> pvals;
    std::vector<AndersonDarlingResult> ads;
    for (std::size_t d = 0; d < spec.diagnose.normality_draws; ++d) {
      thetas[d] = draw_stream.uniform01(d) * kPi;
      StrategyConfig run_cfg = cfg;
      run_cfg.root_seed = cfg.root_seed + 1000003 * (rep + 1) + d;
      const CampaignResult campaign =
          run_campaign(run_cfg, {thetas[d]}, spec.diagnose.normality_samples, 1, spec.workers);
      std::vector<double> unwrapped;
      for (const double e : campaign.points[0].estimates) {
        if (!std::isfinite(e)) continue;
        double err = wrap_phase_value(e - thetas[d], kPi);
        if (err > kHalfPi) err -= kPi;
        unwrapped.push_back(thetas[d] + err);
      }
      ads.push_back(anderson_darling_normal(unwrapped, thetas[d], null_var));
      pvals.push_back(ads.back().p_value);
    }
    const double combined = fisher_combine(pvals);
    for (std::size_t d = 0; d < spec.diagnose.normality_draws; ++d) {
      nw.field(rep).field(d).field(thetas[d]).field(ads[d].a2).field(pvals[d]).field(combined);
      nw.end_row();
    }
    std::cout << "repetition " << rep << ": combined p = " << csv::format_double(combined)
              << "\n";
  }
  nw.close();
  write_echo(spec, dir, 0);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"squeezed-vacuum adaptive phase estimation simulator"};
  app.require_subcommand(1);

  CommonOptions sim_opt, diag_opt;
  double diag_theta0 = 1.0;

  auto* sim = app.add_subcommand("simulate", "run a Monte Carlo campaign and write summary.csv");
  sim->add_option("--config", sim_opt.config_path, "campaign config file");
  sim->add_option("--preset", sim_opt.preset, "named preset")->check(CLI::IsMember(preset_names()));
  sim->add_option("--out-dir", sim_opt.out_dir, "output directory");
  sim->add_option("--kernels", sim_opt.kernels, "kernel backend: auto|scalar|avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
  sim->add_option("--seed", sim_opt.seed, "override strategy seed")
      ->each([&](const std::string&) { sim_opt.seed_set = true; });
  sim->add_option("--workers", sim_opt.workers, "worker threads (0 = hardware)")
      ->each([&](const std::string&) { sim_opt.workers_set = true; });
  sim->add_option("--runs", sim_opt.runs, "override runs per grid point")
      ->each([&](const std::string&) { sim_opt.runs_set = true; });
  sim->add_flag("--dump-traces", sim_opt.dump_traces, "write raw outcome dump (serial)");

  double fr = 1.0, ft = 1.0, fsr = 0.0, fslo = 0.0;
  std::size_t fgrid = 200, fn = 3705;
  bool floss = false, flo = false;
  std::string fisher_out = ".";
  std::string fisher_kernels = "auto";
  auto* fish = app.add_subcommand("fisher", "write analytic Fisher information tables");
  fish->add_option("--r", fr, "squeezing strength");
  fish->add_option("--transmission", ft, "channel transmission");
  fish->add_option("--sigma-r", fsr, "state-prep noise std-dev");
  fish->add_option("--sigma-lo", fslo, "LO phase-noise std-dev");
  fish->add_option("--grid", fgrid, "theta grid size");
  fish->add_option("--n-probes", fn, "probe count N for the bounds");
  fish->add_flag("--loss-sweep", floss, "also write the loss-ratio sweep (loss.csv)");
  fish->add_flag("--lo-sweep", flo, "also write the LO-noise sweep (lo_noise.csv)");
  fish->add_option("--out-dir", fisher_out, "output directory");
  fish->add_option("--kernels", fisher_kernels)->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  std::vector<double> pr{1.0};
  std::vector<std::size_t> pnu{100, 1000, 3705};
  std::size_t pgrid = 64;
  std::string prob_out = ".";
  auto* prob = app.add_subcommand("probabilities", "stationary-point probability curves");
  prob->add_option("--r", pr, "squeezing strengths");
  prob->add_option("--nu", pnu, "per-step sample sizes");
  prob->add_option("--grid", pgrid, "theta grid size");
  prob->add_option("--out-dir", prob_out, "output directory");

  auto* diag = app.add_subcommand("diagnose", "moment sweep and normality protocol");
  diag->add_option("--config", diag_opt.config_path, "campaign config file");
  diag->add_option("--preset", diag_opt.preset, "named preset")
      ->check(CLI::IsMember(preset_names()));
  diag->add_option("--out-dir", diag_opt.out_dir, "output directory");
  diag->add_option("--kernels", diag_opt.kernels, "kernel backend")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
  diag->add_option("--seed", diag_opt.seed, "override strategy seed")
      ->each([&](const std::string&) { diag_opt.seed_set = true; });
  diag->add_option("--workers", diag_opt.workers, "worker threads")
      ->each([&](const std::string&) { diag_opt.workers_set = true; });
  diag->add_option("--theta0", diag_theta0, "true phase for the moment sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) {
      kernels::select_backend(sim_opt.kernels);
      return cmd_simulate(sim_opt);
    }
    if (fish->parsed()) {
      kernels::select_backend(fisher_kernels);
      return cmd_fisher(fr, ft, fsr, fslo, fgrid, fn, floss, flo, fisher_out);
    }
    if (prob->parsed()) {
      return cmd_probabilities(pr, pnu, pgrid, prob_out);
    }
    if (diag->parsed()) {
      kernels::select_backend(diag_opt.kernels);
      return cmd_diagnose(diag_opt, diag_theta0);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
