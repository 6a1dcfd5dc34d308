#pragma once

#include "cli/config.hpp"
#include "cli/report.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace psichain::cli {

struct RunOptions {
  unsigned threads = 0;  // 0 keeps the current setting
  std::optional<double> budget_secs;
};

struct RunContext {
  const ExperimentConfig& cfg;
  Report& report;
  std::chrono::steady_clock::time_point deadline;

  // Throws BudgetExceeded once the deadline has passed.
  void tick(const std::string& where) const;
};

// Runs one experiment. Budget exhaustion yields status "partial" with the
// rows gathered so far; config problems raise ConfigError.
Report run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {});

// Rough upfront cost in seconds on one core; 0 when no model exists.
double estimate_seconds(const ExperimentConfig& cfg);

// 0 when complete and every property passes, 1 otherwise.
int exit_status(const Report& r);

// (kind, mode) pairs accepted by run_experiment.
std::vector<std::pair<std::string, std::string>> supported_modes();

}  // namespace psichain::cli
