#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kwtarget/imputation.hpp"
#include "kwtarget/records.hpp"

namespace kwtarget {

// A keyword is identified by (ad-group, keyword id): the same keyword text in
// two ad-groups is two keywords.
struct KeywordInfo {
  std::string keyword_id;
  std::string adgroup_id;
  double vpc = 0.0;
  double cpc = 0.0;
};

struct KeywordOption {
  std::size_t keyword = 0;  // index into OptionSet::keywords
  MatchType match = MatchType::kExact;
};

// Keywords and the keyword-matching combinations available for them. At most
// one option per (keyword, match type).
class OptionSet {
 public:
  OptionSet() = default;
  OptionSet(std::vector<KeywordInfo> keywords, std::vector<KeywordOption> options);

  // Three options per keyword, in keyword then match-type order.
  static OptionSet all_match_types(std::vector<KeywordInfo> keywords);

  const std::vector<KeywordInfo>& keywords() const { return keywords_; }
  const std::vector<KeywordOption>& options() const { return options_; }
  std::size_t keyword_count() const { return keywords_.size(); }
  std::size_t size() const { return options_.size(); }
  const KeywordOption& operator[](std::size_t i) const { return options_[i]; }
  const KeywordInfo& keyword_of(std::size_t option) const {
    return keywords_[options_[option].keyword];
  }
  double margin(std::size_t option) const {
    const auto& k = keyword_of(option);
    return k.vpc - k.cpc;
  }

  // Option index for (keyword, match), or nullopt.
  std::optional<std::size_t> find(std::size_t keyword, MatchType match) const;

 private:
  std::vector<KeywordInfo> keywords_;
  std::vector<KeywordOption> options_;
  std::vector<std::array<int, 3>> lookup_;
};

// t paired (impressions, ctr) draws per option, back-transformed.
struct ScenarioSet {
  std::size_t t = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> impressions;  // [option][scenario]
  std::vector<std::vector<double>> ctr;          // [option][scenario]

  double clicks(std::size_t option, std::size_t s) const {
    return impressions[option][s] * ctr[option][s];
  }
};

// One match-type choice per keyword; kNone means not selected. The
// one-choice-per-keyword constraint holds by construction.
class TargetingDecision {
 public:
  TargetingDecision() = default;
  explicit TargetingDecision(std::size_t keywords)
      : choice_(keywords, MatchType::kNone) {}
  // Throws InvalidArgument when a value is outside {0, 1, 2, 3}.
  static TargetingDecision from_codes(const std::vector<int>& codes);

  std::size_t size() const { return choice_.size(); }
  MatchType operator[](std::size_t k) const { return choice_[k]; }
  void set(std::size_t k, MatchType m) { choice_.at(k) = m; }
  std::size_t selected_count() const;
  const std::vector<MatchType>& choices() const { return choice_; }

  bool operator==(const TargetingDecision&) const = default;

 private:
  std::vector<MatchType> choice_;
};

struct CostMoments {
  std::vector<double> mean;
  std::vector<double> variance;  // unbiased (t - 1)
};

struct KeywordOutcome {
  std::string keyword_id;
  std::string adgroup_id;
  MatchType match = MatchType::kNone;
  double expected_profit = 0.0;
  double expected_cost = 0.0;
};

struct SolutionReport {
  std::string strategy;
  double budget = 0.0;
  double alpha = 0.0;
  double expected_profit = 0.0;
  double alpha_hat = 0.0;
  std::size_t n_selected = 0;
  // shares of exact / phrase / broad among selected keywords; all zero when
  // nothing is selected
  std::array<double, 3> match_share{0.0, 0.0, 0.0};
  std::vector<KeywordOutcome> keywords;
};

struct BuiltOptions {
  OptionSet options;
  ScenarioSet scenarios;
};

OptionSet make_option_set(const std::vector<AdGroupPosterior>& posterior);

// Draws t scenarios from the posterior predictive of each keyword's own rows:
// a retained (theta, Sigma) draw and one of the keyword's observed rows are
// picked at random, the row's unobserved cells are imputed, and the result is
// back-transformed. Impressions and CTR are drawn independently. Every keyword
// has its own stream, so the set is a pure function of (posterior, t, seed).
ScenarioSet sample_scenarios(const OptionSet& options,
                             const std::vector<AdGroupPosterior>& posterior,
                             std::size_t t, std::uint64_t seed);

// Throws MissingPosterior if a keyword in `records` has no posterior.
BuiltOptions build_options(const std::vector<PerformanceRecord>& records,
                           const std::vector<AdGroupPosterior>& posterior,
                           std::size_t t, std::uint64_t seed);

// Option index selected for keyword k under `decision`, or nullopt. Throws
// InvalidArgument if the chosen match type has no option.
std::optional<std::size_t> selected_option(const TargetingDecision& decision,
                                           const OptionSet& options,
                                           std::size_t k);

double profit(const TargetingDecision& decision, std::size_t scenario,
              const OptionSet& options, const ScenarioSet& scenarios);
double cost(const TargetingDecision& decision, std::size_t scenario,
            const OptionSet& options, const ScenarioSet& scenarios);

// Per-option sample-mean profit and cost.
std::vector<double> option_expected_profit(const OptionSet& options,
                                           const ScenarioSet& scenarios);
std::vector<double> option_expected_cost(const OptionSet& options,
                                         const ScenarioSet& scenarios);

// Sum of per-option sample-mean profits over selected keywords, in keyword
// order. Equal to the mean over scenarios of profit(); this form is the
// canonical objective so every caller rounds identically.
double decision_objective(const TargetingDecision& decision,
                          const OptionSet& options,
                          const std::vector<double>& option_profit);

double expected_profit(const TargetingDecision& decision,
                       const ScenarioSet& scenarios, const OptionSet& options);

// Fraction of scenarios whose total cost is <= budget.
double chance_probability(const TargetingDecision& decision,
                          const ScenarioSet& scenarios,
                          const OptionSet& options, double budget);

CostMoments cost_moments(const OptionSet& options, const ScenarioSet& scenarios);

SolutionReport evaluate_solution(const TargetingDecision& decision,
                                 const ScenarioSet& fresh_scenarios,
                                 const OptionSet& options, double budget,
                                 double alpha, std::string strategy = {});

}  // namespace kwtarget
