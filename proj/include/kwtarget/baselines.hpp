#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "kwtarget/campaign.hpp"
#include "kwtarget/solver.hpp"

namespace kwtarget {

enum class Strategy { kBbKsm, kBase1, kBase2, kBase3, kBase4, kBase5, kBase6, kBase7 };

std::string_view strategy_name(Strategy s);  // "BBKSM", "BASE1", ...
std::optional<Strategy> parse_strategy(std::string_view s);

struct BaselineConfig {
  double tau = 0.01;
  std::uint64_t seed = 0;
  SolverConfig solver;  // budget, alpha and t for BASE5; budget for the rest

  void validate() const;
};

// What the advertiser saw: every keyword under its most-used match type
// (ties go exact < phrase < broad), with the raw daily history.
struct ObservedHistory {
  OptionSet options;  // one option per keyword, same keyword order as the full set
  std::vector<std::vector<std::pair<double, double>>> samples;  // (impressions, ctr) per record
  std::vector<std::size_t> frequency;  // records of the keyword, all types
  std::vector<std::vector<double>> daily_impressions;  // day order, observed type
  std::vector<double> expected_profit;
  std::vector<double> expected_cost;
  std::vector<double> expected_impressions;
};

// Throws ValidationError if a keyword of `full` has no records.
ObservedHistory observe(const OptionSet& full,
                        const std::vector<PerformanceRecord>& records);

// Bootstrap of each keyword's own records; impressions and CTR stay paired.
ScenarioSet sample_observed_scenarios(const ObservedHistory& hist, std::size_t t,
                                      std::uint64_t seed);

double competitiveness_confidence(double impressions, double tau);

TargetingDecision base1_past(const ObservedHistory& hist, double budget);
TargetingDecision base2_prefix_order(const ObservedHistory& hist, double budget);
TargetingDecision base3_competitiveness(const ObservedHistory& hist, double budget,
                                        const BaselineConfig& cfg);
TargetingDecision base4_sharpe(const ObservedHistory& hist, double budget);
TargetingDecision base5_select_nomatch(const ObservedHistory& hist,
                                       const BaselineConfig& cfg);
TargetingDecision base6_rand_match(const ObservedHistory& hist, const OptionSet& full,
                                   const ScenarioSet& scenarios, double budget,
                                   const BaselineConfig& cfg);
TargetingDecision base7_opt_match(const OptionSet& full, const ScenarioSet& scenarios,
                                  double budget);

TargetingDecision run_baseline(Strategy which, const ObservedHistory& hist,
                               const OptionSet& full, const ScenarioSet& scenarios,
                               const BaselineConfig& cfg);

}  // namespace kwtarget
