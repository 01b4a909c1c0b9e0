#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "kwtarget/campaign.hpp"

namespace kwtarget {

struct SolverConfig {
  double budget = 0.0;
  double alpha = 0.95;
  std::size_t t = 1000;
  std::size_t node_limit = 2'000'000;
  double bound_tolerance = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Incumbent {
  TargetingDecision decision;
  double objective = 0.0;
  double alpha_hat = 1.0;
};

// Strict preference: higher objective, then fewer selected keywords, then the
// lexicographically smaller choice vector.
bool better_incumbent(const Incumbent& a, const Incumbent& b);

struct SearchStats {
  std::size_t nodes_explored = 0;
  std::size_t nodes_pruned = 0;
  std::size_t nodes_infeasible = 0;
  std::size_t max_queue = 0;
  bool truncated = false;
  double root_bound = 0.0;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::size_t, double>> incumbent_trace;  // (node, objective)
};

struct SolveResult {
  Incumbent incumbent;
  SearchStats stats;
};

// Options fixed in and out; every other option is undecided.
struct Subproblem {
  std::vector<std::size_t> accepted;
  std::vector<std::size_t> rejected;
};

struct Feasibility {
  bool feasible = true;
  double alpha_hat = 1.0;
};

// Options by decreasing expected profit, ties by (adgroup, keyword, match).
std::vector<std::size_t> rank_options(const OptionSet& options,
                                      const ScenarioSet& scenarios);

Feasibility stochastic_feasible(const TargetingDecision& decision,
                                const OptionSet& options,
                                const ScenarioSet& scenarios,
                                const SolverConfig& cfg);

// Upper bound on
//   max sum x pi  s.t.  sum x mu + z sqrt(sum x^2 sigma^2) <= B,
//   0 <= x <= 1, at most one unit per keyword, accepted x = 1, rejected x = 0,
// with z = normal_quantile(alpha). For any unit vector y >= 0 the cone term is
// at least y . (sqrt(V_accepted), sigma x), so each y gives a multiple-choice
// knapsack LP whose value bounds the problem; several y are tried and the
// smallest value is returned. Returns -infinity when the accepted options
// alone violate the constraint.
double relaxation_bound(const Subproblem& sub, const OptionSet& options,
                        const CostMoments& moments,
                        const std::vector<double>& option_profit,
                        const SolverConfig& cfg);

// Throws NoFeasibleSolution when budget <= 0.
SolveResult solve_bb_ksm(const OptionSet& options, const ScenarioSet& scenarios,
                         const SolverConfig& cfg);

inline constexpr std::size_t kOracleMaxKeywords = 12;

// Exhaustive search over all 4^K choices. Throws TooLarge above
// kOracleMaxKeywords keywords.
Incumbent brute_force_oracle(const OptionSet& options,
                             const ScenarioSet& scenarios,
                             const SolverConfig& cfg);

}  // namespace kwtarget
