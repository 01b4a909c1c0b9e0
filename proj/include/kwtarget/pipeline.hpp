#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kwtarget/baselines.hpp"
#include "kwtarget/campaign.hpp"
#include "kwtarget/imputation.hpp"
#include "kwtarget/solver.hpp"

namespace kwtarget {

struct RunConfig {
  std::vector<double> budgets{100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
  double alpha = 0.95;
  std::size_t t = 1000;        // solver scenarios
  std::size_t eval_t = 10000;  // fresh scenarios for out-of-sample evaluation
  std::uint64_t seed = 0;
  std::size_t node_limit = 2'000'000;
  double bound_tolerance = 1e-6;
  double tau = 0.01;
  std::vector<Strategy> strategies{Strategy::kBbKsm};

  // Throws InvalidArgument / OutOfRange.
  void validate() const;
  std::uint64_t solver_seed() const;
  std::uint64_t eval_seed() const;
};

struct StrategyReport {
  SolutionReport report;  // out of sample
  double in_sample_profit = 0.0;
  double in_sample_alpha = 0.0;
  TargetingDecision decision;
  std::optional<SearchStats> stats;  // BB-KSM only
};

// Runs every strategy at every budget on one shared in-sample scenario set and
// evaluates each decision on one shared fresh set. Output is ordered by
// strategy (as configured), then budget.
std::vector<StrategyReport> run_strategies(const std::vector<PerformanceRecord>& records,
                                           const std::vector<AdGroupPosterior>& posterior,
                                           const RunConfig& cfg);

// One row per retained draw per ad-group and family:
// adgroup_id,family,draw_index,theta_1..theta_3,sigma_11..sigma_33
std::string posterior_to_csv(const std::vector<AdGroupPosterior>& posterior);
// Rebuilds each ad-group's data from `records`. Throws MissingPosterior when
// an ad-group of `records` has no draws, ParseError on malformed rows.
std::vector<AdGroupPosterior> posterior_from_csv(std::string_view text,
                                                 const std::vector<PerformanceRecord>& records);

struct OracleInstance {
  OptionSet options;
  ScenarioSet scenarios;
  double budget = 0.0;
};

// Small random instance: one ad-group, three options per keyword, lognormal
// impressions and logit-normal CTR per option, budget a random fraction of
// the all-in expected cost.
OracleInstance random_instance(std::uint64_t seed, std::size_t keywords, std::size_t t);

struct OracleConfig {
  std::size_t instances = 20;
  std::size_t min_keywords = 2;
  std::size_t max_keywords = 8;
  std::size_t t = 500;
  double alpha = 0.95;
  std::uint64_t seed = 0;

  void validate() const;
};

struct OracleCase {
  std::uint64_t seed = 0;
  std::size_t keywords = 0;
  double budget = 0.0;
  double oracle_objective = 0.0;
  double solver_objective = 0.0;
  double root_bound = 0.0;
  bool solver_truncated = false;
  bool objectives_equal() const { return oracle_objective == solver_objective; }
  bool bound_valid(double tol) const {
    return root_bound + tol * (1.0 + std::abs(root_bound)) >= oracle_objective;
  }
};

std::vector<OracleCase> run_oracle_check(const OracleConfig& cfg);

}  // namespace kwtarget
