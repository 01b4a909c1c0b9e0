#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kwtarget/records.hpp"
#include "kwtarget/statcore.hpp"

namespace kwtarget {

struct GroupTruth {
  std::string adgroup_id;
  MvnParams impressions;  // log impressions
  MvnParams ctr;          // logit CTR
  MatchType favored = MatchType::kExact;
};

// Seeded stand-in for a real campaign log. Unless `truth` is given, each
// ad-group's means and covariances are drawn from the seed: one match type is
// favored with extra impressions, the favored type rotates across groups, and
// variances / correlations are drawn from the ranges below.
struct SyntheticSpec {
  int adgroups = 5;
  int keywords_per_group = 10;
  int days = 40;
  std::uint64_t seed = 0;
  Date start{2023, 1, 1};
  double mean_impressions = 50.0;
  double mean_ctr = 0.15;
  double favored_lift = 0.5;  // log-impression lift of the favored type
  double group_spread = 0.15;  // sd of the per-group log-impression shift
  std::array<double, 2> variance_range{0.06, 0.14};
  std::array<double, 2> correlation_range{0.3, 0.7};
  std::array<double, 2> vpc_range{0.5, 5.0};
  std::array<double, 2> cpc_range{0.2, 2.0};
  // probability that a keyword is logged under exact / phrase / broad
  std::array<double, 3> type_probs{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::vector<GroupTruth> truth;

  void validate() const;
};

struct SyntheticCampaign {
  std::vector<PerformanceRecord> records;
  std::vector<GroupTruth> truth;
  // observed match type per (adgroup, keyword), generation order
  std::vector<std::pair<std::string, std::string>> keywords;
  std::vector<MatchType> observed;
};

// Each keyword is logged under one match type on every day; the type is
// assigned independently of the performance values, so the missing cells are
// missing at random. Type counts follow type_probs by largest remainder.
// Impressions are rounded to integers, CTR to 4 decimals, VPC and CPC to
// cents.
SyntheticCampaign generate_synthetic(const SyntheticSpec& spec);

}  // namespace kwtarget
