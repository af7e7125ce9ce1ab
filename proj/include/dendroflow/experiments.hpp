#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dendroflow/chains.hpp"

namespace dendroflow {

/// Pass/fail tolerance attached to a named report quantity. Range checks
/// require |value - target| <= tol; lower-bound checks require
/// value >= target (used for p-values).
struct ToleranceCheck {
  std::string name;
  double target = 0.0;
  double tol = 0.0;
  bool lower_bound_only = false;
};

struct ExperimentConfig {
  std::string kind;  // horton_tokunaga | forest | basins | gw | asymmetry | fbm
  KernelSpec kernel = GaussianKernel{};
  double hurst = 0.5;
  std::size_t chain_length = 1'000'000;
  std::size_t excursions = 100'000;
  std::size_t sample_budget = 30'000'000;
  std::size_t excursion_cap = 20'000;
  std::size_t fbm_length = std::size_t{1} << 20;
  int replicates = 20;
  int batches = 20;
  std::uint64_t master_seed = 1;
  bool complete_only = true;
  int threads = 1;
  std::vector<ToleranceCheck> checks;
};

/// Key-value config format, one `key = value` per line, `#` comments,
/// `check NAME = target tol` and `check_min NAME = threshold` entries.
/// Unknown keys and invalid values are all collected and reported together.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config(const std::string& text);

struct Estimate {
  double value = 0.0;
  double se = 0.0;
  long long n = 0;  // sample size behind the estimate
};

struct CheckResult {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tol = 0.0;
  bool lower_bound_only = false;
  bool pass = false;
};

struct ExperimentReport {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> meta;       // config echo
  std::vector<std::pair<std::string, Estimate>> quantities;    // ordered
  std::vector<CheckResult> checks;
  std::vector<std::string> notes;
  bool partial = false;

  bool passed() const;
  const Estimate* find(const std::string& name) const;
  void add(const std::string& name, double value, double se, long long n);
  std::string to_json() const;  // deterministic for a fixed config
  std::string to_csv() const;
};

/// Level-set tree statistics of whole chains: eta_r from raw branch counts,
/// Tokunaga ratios from the complete-branch estimator, interior-maximum
/// density. One chain per replicate.
ExperimentReport run_horton_tokunaga(const ExperimentConfig& cfg);

/// Forest-of-excursions estimator along the descending ladder of a single
/// long chain: cumulative N_r^n and N_ij^n over completed excursions. The
/// run is budgeted by sample count and flagged partial when fewer than the
/// requested excursions complete within the budget.
ExperimentReport run_forest(const ExperimentConfig& cfg);

/// Mean counts of low-order basins inside complete higher-order basins and
/// interior minima per order-2 basin.
ExperimentReport run_basin_counts(const ExperimentConfig& cfg);

/// Shape distribution of exponential-chain excursion trees against the
/// matching binary Galton-Watson law (chi-squared over shapes with up to 4
/// leaves), plus the same comparison after one pruning against the p2
/// recursion prediction.
ExperimentReport run_gw_equivalence(const ExperimentConfig& cfg);

/// eta_r drift of an asymmetric exponential chain, with the analytic
/// iterated parameter map reported alongside.
ExperimentReport run_asymmetric_decay(const ExperimentConfig& cfg);

/// Forest estimator over fractional Brownian paths (discrete-crossing
/// excursions, no interpolation refinement): side-branch ratio growth
/// c-hat from regressing log T_{1,1+k} on k, and eta-hat, reported against
/// 2H+1 and 2+H+sqrt(H^2+2). Exploratory.
ExperimentReport run_fbm_conjecture(const ExperimentConfig& cfg);

/// Dispatch on cfg.kind.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Conjectured side-branch ratio and branching ratio for Hurst index H.
double fbm_predicted_c(double hurst);
double fbm_predicted_eta(double hurst);

}  // namespace dendroflow
