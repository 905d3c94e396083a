#include "sqphase/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "sqphase/csv.hpp"

namespace sqphase {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& v, std::size_t line, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    fail(line, key + ": expected a number, got '" + v + "'");
  }
}

std::size_t parse_size(const std::string& v, std::size_t line, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size() || x < 0) throw std::invalid_argument("");
    return static_cast<std::size_t>(x);
  } catch (...) {
    fail(line, key + ": expected a non-negative integer, got '" + v + "'");
  }
}

std::vector<std::string> split(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

std::vector<double> parse_theta_grid(const std::string& v, std::size_t line, double period) {
  if (v.rfind("uniform:", 0) == 0) {
    const std::size_t n = parse_size(v.substr(8), line, "campaign.theta_grid");
    if (n == 0) fail(line, "campaign.theta_grid: uniform grid needs n >= 1");
    return uniform_theta_grid(n, period);
  }
  if (v.rfind("linspace:", 0) == 0) {
    const auto parts = split(v.substr(9), ':');
    if (parts.size() != 3) fail(line, "campaign.theta_grid: linspace:a:b:n");
    const double a = parse_double(parts[0], line, "campaign.theta_grid");
    const double b = parse_double(parts[1], line, "campaign.theta_grid");
    const std::size_t n = parse_size(parts[2], line, "campaign.theta_grid");
    if (n < 2 || !(b > a)) fail(line, "campaign.theta_grid: need b > a and n >= 2");
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) {
      grid[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return grid;
  }
  std::vector<double> grid;
  for (const std::string& item : split(v, ',')) {
    if (item.empty()) continue;
    grid.push_back(parse_double(item, line, "campaign.theta_grid"));
  }
  if (grid.empty()) fail(line, "campaign.theta_grid: empty list");
  return grid;
}

StrategyKind parse_kind(const std::string& v, std::size_t line) {
  if (v == "aqse_homodyne") return StrategyKind::aqse_homodyne;
  if (v == "chh") return StrategyKind::chh;
  if (v == "nonadaptive_homodyne") return StrategyKind::nonadaptive_homodyne;
  if (v == "two_step") return StrategyKind::two_step;
  fail(line, "strategy.kind: unknown kind '" + v + "'");
}

}  // namespace

std::vector<double> uniform_theta_grid(std::size_t n, double period) {
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) {
    grid[k] = period * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
  }
  return grid;
}

void CampaignSpec::validate() const {
  strategy.validate();
  if (theta_grid.empty()) throw ConfigError("campaign.theta_grid: empty");
  const double period = period_value(strategy.period());
  for (const double th : theta_grid) {
    if (!(th >= 0.0 && th < period)) {
      throw ConfigError("campaign.theta_grid: value " + csv::format_double(th) +
                        " outside the strategy period [0, " + csv::format_double(period) + ")");
    }
  }
  if (runs == 0) throw ConfigError("campaign.runs: must be >= 1");
  if (batches == 0) throw ConfigError("campaign.batches: must be >= 1");
  if (runs % batches != 0) {
    throw ConfigError("campaign.runs, campaign.batches: runs must be divisible by batches");
  }
  for (const double t : transmission_sweep) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw ConfigError("campaign.transmission_sweep: values must lie in [0, 1]");
    }
  }
}

std::vector<double> CampaignSpec::transmissions() const {
  if (transmission_sweep.empty()) return {strategy.probe.transmission};
  return transmission_sweep;
}

CampaignSpec parse_config(const std::string& text) {
  CampaignSpec spec;
  spec.theta_grid.clear();

  std::string section;
  std::size_t line_no = 0;
  std::size_t n_value = spec.strategy.n_total;
  std::size_t m_value = spec.strategy.steps;
  std::string theta_grid_raw;
  std::size_t theta_grid_line = 0;
  std::map<std::string, std::size_t> seen;

  std::stringstream ss(text);
  std::string raw;
  while (std::getline(ss, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "strategy" && section != "campaign" && section != "diagnose") {
        fail(line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) fail(line_no, "key '" + key + "' outside any section");
    const std::string path = section + "." + key;
    if (seen.count(path)) {
      fail(line_no, path + ": duplicate key (first set on line " +
                        std::to_string(seen[path]) + ")");
    }
    seen[path] = line_no;

    if (section == "strategy") {
      if (key == "kind") spec.strategy.kind = parse_kind(value, line_no);
      else if (key == "N") n_value = parse_size(value, line_no, path);
      else if (key == "m") m_value = parse_size(value, line_no, path);
      else if (key == "r") spec.strategy.probe.r = parse_double(value, line_no, path);
      else if (key == "transmission") spec.strategy.probe.transmission = parse_double(value, line_no, path);
      else if (key == "sigma_r") spec.strategy.probe.sigma_r = parse_double(value, line_no, path);
      else if (key == "sigma_lo") spec.strategy.probe.sigma_lo = parse_double(value, line_no, path);
      else if (key == "mle_scope") {
        if (value == "joint") spec.strategy.mle_scope = MleScope::joint;
        else if (value == "latest") spec.strategy.mle_scope = MleScope::latest;
        else fail(line_no, path + ": expected joint or latest");
      } else if (key == "first_step_fraction") {
        spec.strategy.first_step_fraction = parse_double(value, line_no, path);
      } else if (key == "seed") {
        spec.strategy.root_seed = static_cast<std::uint64_t>(parse_size(value, line_no, path));
      } else if (key == "grid_points") {
        spec.strategy.search.grid_points = parse_size(value, line_no, path);
      } else {
        fail(line_no, "unknown key " + path);
      }
    } else if (section == "campaign") {
      if (key == "theta_grid") {
        theta_grid_raw = value;
        theta_grid_line = line_no;
      } else if (key == "runs") spec.runs = parse_size(value, line_no, path);
      else if (key == "batches") spec.batches = parse_size(value, line_no, path);
      else if (key == "workers") spec.workers = parse_size(value, line_no, path);
      else if (key == "transmission_sweep") {
        for (const std::string& item : split(value, ',')) {
          if (!item.empty()) {
            spec.transmission_sweep.push_back(parse_double(item, line_no, path));
          }
        }
      } else {
        fail(line_no, "unknown key " + path);
      }
    } else {  // diagnose
      if (key == "m_list") {
        spec.diagnose.m_list.clear();
        for (const std::string& item : split(value, ',')) {
          if (!item.empty()) spec.diagnose.m_list.push_back(parse_size(item, line_no, path));
        }
      } else if (key == "samples") spec.diagnose.samples = parse_size(value, line_no, path);
      else if (key == "normality_m") spec.diagnose.normality_m = parse_size(value, line_no, path);
      else if (key == "normality_nu") spec.diagnose.normality_nu = parse_size(value, line_no, path);
      else if (key == "normality_samples") spec.diagnose.normality_samples = parse_size(value, line_no, path);
      else if (key == "normality_draws") spec.diagnose.normality_draws = parse_size(value, line_no, path);
      else if (key == "normality_repetitions") spec.diagnose.normality_repetitions = parse_size(value, line_no, path);
      else fail(line_no, "unknown key " + path);
    }
  }

  spec.strategy.n_total = n_value;
  if (spec.strategy.kind == StrategyKind::aqse_homodyne || spec.strategy.kind == StrategyKind::chh) {
    spec.strategy.steps = m_value;
    if (m_value == 0 || n_value % m_value != 0) {
      throw ConfigError("strategy.N, strategy.m: N = " + std::to_string(n_value) +
                        " is not divisible by m = " + std::to_string(m_value));
    }
    spec.strategy.nu = n_value / m_value;
  } else if (spec.strategy.kind == StrategyKind::two_step) {
    spec.strategy.steps = 2;
    spec.strategy.nu = n_value / 2;
  } else {
    spec.strategy.steps = 1;
    spec.strategy.nu = n_value;
  }

  const double period = period_value(spec.strategy.period());
  if (theta_grid_raw.empty()) {
    spec.theta_grid = uniform_theta_grid(32, period);
  } else {
    spec.theta_grid = parse_theta_grid(theta_grid_raw, theta_grid_line, period);
  }

  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

std::string serialize_config(const CampaignSpec& spec) {
  std::ostringstream out;
  out << "[strategy]\n";
  out << "kind = " << to_string(spec.strategy.kind) << "\n";
  out << "N = " << spec.strategy.n_total << "\n";
  out << "m = " << spec.strategy.steps << "\n";
  out << "r = " << csv::format_double(spec.strategy.probe.r) << "\n";
  out << "transmission = " << csv::format_double(spec.strategy.probe.transmission) << "\n";
  out << "sigma_r = " << csv::format_double(spec.strategy.probe.sigma_r) << "\n";
  out << "sigma_lo = " << csv::format_double(spec.strategy.probe.sigma_lo) << "\n";
  out << "mle_scope = " << to_string(spec.strategy.mle_scope) << "\n";
  out << "first_step_fraction = " << csv::format_double(spec.strategy.first_step_fraction)
      << "\n";
  out << "seed = " << spec.strategy.root_seed << "\n";
  out << "grid_points = " << spec.strategy.search.grid_points << "\n";
  out << "\n[campaign]\n";
  out << "theta_grid = ";
  for (std::size_t i = 0; i < spec.theta_grid.size(); ++i) {
    if (i) out << ",";
    out << csv::format_double(spec.theta_grid[i]);
  }
  out << "\n";
  out << "runs = " << spec.runs << "\n";
  out << "batches = " << spec.batches << "\n";
  out << "workers = " << spec.workers << "\n";
  if (!spec.transmission_sweep.empty()) {
    out << "transmission_sweep = ";
    for (std::size_t i = 0; i < spec.transmission_sweep.size(); ++i) {
      if (i) out << ",";
      out << csv::format_double(spec.transmission_sweep[i]);
    }
    out << "\n";
  }
  out << "\n[diagnose]\n";
  out << "m_list = ";
  for (std::size_t i = 0; i < spec.diagnose.m_list.size(); ++i) {
    if (i) out << ",";
    out << spec.diagnose.m_list[i];
  }
  out << "\n";
  out << "samples = " << spec.diagnose.samples << "\n";
  out << "normality_m = " << spec.diagnose.normality_m << "\n";
  out << "normality_nu = " << spec.diagnose.normality_nu << "\n";
  out << "normality_samples = " << spec.diagnose.normality_samples << "\n";
  out << "normality_draws = " << spec.diagnose.normality_draws << "\n";
  out << "normality_repetitions = " << spec.diagnose.normality_repetitions << "\n";
  return out.str();
}

std::string config_json(const CampaignSpec& spec) {
  nlohmann::json j;
  j["strategy"] = {
      {"kind", to_string(spec.strategy.kind)},
      {"N", spec.strategy.n_total},
      {"m", spec.strategy.steps},
      {"nu", spec.strategy.nu},
      {"r", spec.strategy.probe.r},
      {"transmission", spec.strategy.probe.transmission},
      {"sigma_r", spec.strategy.probe.sigma_r},
      {"sigma_lo", spec.strategy.probe.sigma_lo},
      {"mle_scope", to_string(spec.strategy.mle_scope)},
      {"first_step_fraction", spec.strategy.first_step_fraction},
      {"seed", spec.strategy.root_seed},
      {"grid_points", spec.strategy.search.grid_points},
  };
  j["campaign"] = {
      {"theta_grid", spec.theta_grid},
      {"runs", spec.runs},
      {"batches", spec.batches},
      {"workers", spec.workers},
      {"transmission_sweep", spec.transmission_sweep},
  };
  j["diagnose"] = {
      {"m_list", spec.diagnose.m_list},
      {"samples", spec.diagnose.samples},
      {"normality_m", spec.diagnose.normality_m},
      {"normality_nu", spec.diagnose.normality_nu},
      {"normality_samples", spec.diagnose.normality_samples},
      {"normality_draws", spec.diagnose.normality_draws},
      {"normality_repetitions", spec.diagnose.normality_repetitions},
  };
  return j.dump(2);
}

namespace {
CampaignSpec base_preset(StrategyKind kind, std::size_t n, std::size_t m, double r,
                         std::size_t runs) {
  CampaignSpec spec;
  spec.strategy.kind = kind;
  spec.strategy.n_total = n;
  spec.strategy.steps = m;
  spec.strategy.nu = (kind == StrategyKind::aqse_homodyne || kind == StrategyKind::chh)
                         ? n / m
                         : n;
  spec.strategy.probe.r = r;
  spec.runs = runs;
  spec.batches = 5;
  spec.theta_grid = uniform_theta_grid(32, period_value(spec.strategy.period()));
  return spec;
}
}  // namespace

CampaignSpec preset_config(const std::string& name) {
  // full presets use the production-scale run counts; -small divides by ~25
  // so a desk run finishes in minutes
  if (name == "fig5") return base_preset(StrategyKind::aqse_homodyne, 3705, 15, 1.01, 50000);
  if (name == "fig5-small") return base_preset(StrategyKind::aqse_homodyne, 3705, 15, 1.01, 2000);
  if (name == "fig7") return base_preset(StrategyKind::chh, 3705, 15, 1.01, 50000);
  if (name == "fig7-small") return base_preset(StrategyKind::chh, 3705, 15, 1.01, 2000);
  if (name == "fig9" || name == "fig9-small") {
    CampaignSpec spec = base_preset(StrategyKind::chh, 3705, 15, 1.01,
                                    name == "fig9" ? 50000 : 2000);
    spec.transmission_sweep = {1.0, 0.99, 0.95};
    return spec;
  }
  if (name == "fig5-nonadaptive") {
    return base_preset(StrategyKind::nonadaptive_homodyne, 3705, 1, 1.01, 10000);
  }
  if (name == "two-step") {
    CampaignSpec spec = base_preset(StrategyKind::two_step, 3705, 2, 1.01, 10000);
    spec.strategy.first_step_fraction = 0.5;
    return spec;
  }
  if (name == "fig11" || name == "fig11-small") {
    CampaignSpec spec = base_preset(StrategyKind::chh, 3000, 20, 1.0,
                                    name == "fig11" ? 10000 : 2000);
    spec.diagnose.samples = spec.runs;
    return spec;
  }
  if (name == "normality") {
    CampaignSpec spec = base_preset(StrategyKind::chh, 1000, 20, 1.0, 1000);
    return spec;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
  return {"fig5", "fig5-small", "fig7", "fig7-small", "fig9", "fig9-small",
          "fig5-nonadaptive", "two-step", "fig11", "fig11-small", "normality"};
}

bool operator==(const StrategyConfig& a, const StrategyConfig& b) {
  return a.kind == b.kind && a.n_total == b.n_total && a.steps == b.steps && a.nu == b.nu &&
         a.probe.r == b.probe.r && a.probe.transmission == b.probe.transmission &&
         a.probe.sigma_r == b.probe.sigma_r && a.probe.sigma_lo == b.probe.sigma_lo &&
         a.first_step_fraction == b.first_step_fraction && a.mle_scope == b.mle_scope &&
         a.root_seed == b.root_seed && a.search.grid_points == b.search.grid_points;
}

bool operator==(const DiagnoseSpec& a, const DiagnoseSpec& b) {
  return a.m_list == b.m_list && a.samples == b.samples && a.normality_m == b.normality_m &&
         a.normality_nu == b.normality_nu && a.normality_samples == b.normality_samples &&
         a.normality_draws == b.normality_draws &&
         a.normality_repetitions == b.normality_repetitions;
}

bool operator==(const CampaignSpec& a, const CampaignSpec& b) {
  return a.strategy == b.strategy && a.theta_grid == b.theta_grid && a.runs == b.runs &&
         a.batches == b.batches && a.workers == b.workers &&
         a.transmission_sweep == b.transmission_sweep && a.diagnose == b.diagnose;
}

}  // namespace sqphase
