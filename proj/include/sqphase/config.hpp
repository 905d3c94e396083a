#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sqphase/adaptive.hpp"

// Campaign configuration: INI-style sections with strict validation. Unknown
// sections or keys are hard errors; constraint violations name the field.

namespace sqphase {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DiagnoseSpec {
  std::vector<std::size_t> m_list{2, 4, 6, 10, 15, 20};
  std::size_t samples = 2000;
  std::size_t normality_m = 20;
  std::size_t normality_nu = 50;
  std::size_t normality_samples = 1000;
  std::size_t normality_draws = 5;
  std::size_t normality_repetitions = 1;
};

struct CampaignSpec {
  StrategyConfig strategy;
  std::vector<double> theta_grid;  // resolved; defaults to 32 uniform interior points
  std::size_t runs = 10000;
  std::size_t batches = 5;
  std::size_t workers = 0;  // 0 = available parallelism
  std::vector<double> transmission_sweep;  // empty = just strategy.probe.transmission
  DiagnoseSpec diagnose;

  void validate() const;  // field-path errors
  std::vector<double> transmissions() const;
};

// uniform interior grid: period*(k+0.5)/n for k = 0..n-1
std::vector<double> uniform_theta_grid(std::size_t n, double period);

CampaignSpec parse_config(const std::string& text);
std::string serialize_config(const CampaignSpec& spec);
std::string config_json(const CampaignSpec& spec);  // provenance echo

// named desk-scale presets ("fig5", "fig5-small", "fig7-small", ...)
CampaignSpec preset_config(const std::string& name);
std::vector<std::string> preset_names();

bool operator==(const DiagnoseSpec& a, const DiagnoseSpec& b);
bool operator==(const CampaignSpec& a, const CampaignSpec& b);
bool operator==(const StrategyConfig& a, const StrategyConfig& b);

}  // namespace sqphase
