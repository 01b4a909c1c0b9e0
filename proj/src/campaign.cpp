#include "kwtarget/campaign.hpp"

#include <map>
#include <set>

#include "kwtarget/error.hpp"

namespace kwtarget {

OptionSet::OptionSet(std::vector<KeywordInfo> keywords,
                     std::vector<KeywordOption> options)
    : keywords_(std::move(keywords)), options_(std::move(options)) {
  lookup_.assign(keywords_.size(), {-1, -1, -1});
  for (std::size_t i = 0; i < options_.size(); ++i) {
    const auto& o = options_[i];
    if (o.keyword >= keywords_.size() || o.match == MatchType::kNone) {
      throw Error(ErrorCode::kInvalidArgument, "option refers to an unknown keyword or match type");
    }
    int& slot = lookup_[o.keyword][static_cast<std::size_t>(match_index(o.match))];
    if (slot >= 0) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate keyword-matching option");
    }
    slot = static_cast<int>(i);
  }
}

OptionSet OptionSet::all_match_types(std::vector<KeywordInfo> keywords) {
  std::vector<KeywordOption> opts;
  opts.reserve(keywords.size() * 3);
  for (std::size_t k = 0; k < keywords.size(); ++k) {
    for (MatchType m : kAllMatchTypes) opts.push_back({k, m});
  }
  return OptionSet(std::move(keywords), std::move(opts));
}

std::optional<std::size_t> OptionSet::find(std::size_t keyword, MatchType match) const {
  if (keyword >= lookup_.size() || match == MatchType::kNone) return std::nullopt;
  const int idx = lookup_[keyword][static_cast<std::size_t>(match_index(match))];
  if (idx < 0) return std::nullopt;
  return static_cast<std::size_t>(idx);
}

TargetingDecision TargetingDecision::from_codes(const std::vector<int>& codes) {
  TargetingDecision d(codes.size());
  for (std::size_t k = 0; k < codes.size(); ++k) {
    if (codes[k] < 0 || codes[k] > 3) {
      throw Error(ErrorCode::kInvalidArgument, "decision code must be 0, 1, 2 or 3");
    }
    d.choice_[k] = static_cast<MatchType>(codes[k]);
  }
  return d;
}

std::size_t TargetingDecision::selected_count() const {
  std::size_t n = 0;
  for (MatchType m : choice_) n += (m != MatchType::kNone);
  return n;
}

OptionSet make_option_set(const std::vector<AdGroupPosterior>& posterior) {
  std::vector<KeywordInfo> kws;
  for (const auto& g : posterior) {
    for (std::size_t k = 0; k < g.data.keyword_ids.size(); ++k) {
      kws.push_back({g.data.keyword_ids[k], g.data.adgroup_id, g.data.vpc[k], g.data.cpc[k]});
    }
  }
  return OptionSet::all_match_types(std::move(kws));
}

namespace {

// Posterior-predictive draws of one keyword's completed row in one family.
class RowPredictive {
 public:
  RowPredictive(const TransformedMatrix& data, const PosteriorDraws& draws,
                std::vector<Eigen::Index> rows)
      : data_(data), draws_(draws), rows_(std::move(rows)) {
    if (draws_.size() == 0) {
      throw Error(ErrorCode::kMissingPosterior, "posterior has no retained draws");
    }
  }

  Vector draw(RngStream& rng) const {
    const std::size_t r = rng.index(draws_.size());
    const Eigen::Index row = rows_[rng.index(rows_.size())];
    const std::uint8_t mask = data_.mask[static_cast<std::size_t>(row)];
    Vector x = data_.values.row(row).transpose();
    if (mask == kFullMask) return x;
    return impute_row(x, mask, draws_.theta_draws[r], draws_.sigma_draws[r], rng);
  }

 private:
  const TransformedMatrix& data_;
  const PosteriorDraws& draws_;
  std::vector<Eigen::Index> rows_;
};

}  // namespace

ScenarioSet sample_scenarios(const OptionSet& options,
                             const std::vector<AdGroupPosterior>& posterior,
                             std::size_t t, std::uint64_t seed) {
  if (t == 0) throw Error(ErrorCode::kInvalidArgument, "scenario count must be positive");
  std::map<std::pair<std::string, std::string>, std::pair<const AdGroupPosterior*, std::size_t>> where;
  for (const auto& g : posterior) {
    for (std::size_t k = 0; k < g.data.keyword_ids.size(); ++k) {
      where[{g.data.adgroup_id, g.data.keyword_ids[k]}] = {&g, k};
    }
  }
  ScenarioSet sc;
  sc.t = t;
  sc.seed = seed;
  sc.impressions.assign(options.size(), std::vector<double>(t));
  sc.ctr.assign(options.size(), std::vector<double>(t));

  for (std::size_t k = 0; k < options.keyword_count(); ++k) {
    const auto& info = options.keywords()[k];
    const auto it = where.find({info.adgroup_id, info.keyword_id});
    if (it == where.end()) {
      throw Error(ErrorCode::kMissingPosterior,
                  "no posterior for keyword " + info.keyword_id + " in " + info.adgroup_id);
    }
    const AdGroupPosterior& g = *it->second.first;
    const std::size_t local = it->second.second;
    std::vector<Eigen::Index> rows;
    for (std::size_t r = 0; r < g.data.row_keyword.size(); ++r) {
      if (g.data.row_keyword[r] == local) rows.push_back(static_cast<Eigen::Index>(r));
    }
    const RowPredictive imp(g.data.impressions, g.impressions, rows);
    const RowPredictive ctr(g.data.ctr, g.ctr, rows);
    const std::uint64_t key = stable_hash(info.adgroup_id + '\x1f' + info.keyword_id);
    RngStream imp_rng(seed, mix64(key ^ 0x1));
    RngStream ctr_rng(seed, mix64(key ^ 0x2));

    std::array<std::optional<std::size_t>, 3> opt;
    for (MatchType m : kAllMatchTypes) opt[match_index(m)] = options.find(k, m);
    for (std::size_t s = 0; s < t; ++s) {
      const Vector d = imp.draw(imp_rng);
      const Vector c = ctr.draw(ctr_rng);
      for (int i = 0; i < kMatchTypes; ++i) {
        if (!opt[i]) continue;
        sc.impressions[*opt[i]][s] = inverse_transform(d(i), IndexFamily::kImpressions);
        sc.ctr[*opt[i]][s] = inverse_transform(c(i), IndexFamily::kCtr);
      }
    }
  }
  return sc;
}

BuiltOptions build_options(const std::vector<PerformanceRecord>& records,
                           const std::vector<AdGroupPosterior>& posterior,
                           std::size_t t, std::uint64_t seed) {
  std::set<std::pair<std::string, std::string>> covered;
  for (const auto& g : posterior) {
    for (const auto& kw : g.data.keyword_ids) covered.insert({g.data.adgroup_id, kw});
  }
  for (const auto& r : records) {
    if (!covered.contains({r.adgroup_id, r.keyword_id})) {
      throw Error(ErrorCode::kMissingPosterior,
                  "no posterior for keyword " + r.keyword_id + " in " + r.adgroup_id);
    }
  }
  BuiltOptions out;
  out.options = make_option_set(posterior);
  out.scenarios = sample_scenarios(out.options, posterior, t, seed);
  return out;
}

std::optional<std::size_t> selected_option(const TargetingDecision& decision,
                                           const OptionSet& options, std::size_t k) {
  const MatchType m = decision[k];
  if (m == MatchType::kNone) return std::nullopt;
  const auto o = options.find(k, m);
  if (!o) {
    throw Error(ErrorCode::kInvalidArgument,
                "decision selects a match type with no option for keyword " +
                    options.keywords()[k].keyword_id);
  }
  return o;
}

namespace {

void check_sizes(const TargetingDecision& d, const OptionSet& options) {
  if (d.size() != options.keyword_count()) {
    throw Error(ErrorCode::kInvalidArgument, "decision size differs from keyword count");
  }
}

}  // namespace

double profit(const TargetingDecision& decision, std::size_t scenario,
              const OptionSet& options, const ScenarioSet& scenarios) {
  check_sizes(decision, options);
  double z = 0.0;
  for (std::size_t k = 0; k < decision.size(); ++k) {
    if (const auto o = selected_option(decision, options, k)) {
      z += scenarios.clicks(*o, scenario) * options.margin(*o);
    }
  }
  return z;
}

double cost(const TargetingDecision& decision, std::size_t scenario,
            const OptionSet& options, const ScenarioSet& scenarios) {
  check_sizes(decision, options);
  double c = 0.0;
  for (std::size_t k = 0; k < decision.size(); ++k) {
    if (const auto o = selected_option(decision, options, k)) {
      c += scenarios.clicks(*o, scenario) * options.keyword_of(*o).cpc;
    }
  }
  return c;
}

namespace {

std::vector<double> mean_clicks(const OptionSet& options, const ScenarioSet& scenarios) {
  std::vector<double> out(options.size(), 0.0);
  for (std::size_t o = 0; o < options.size(); ++o) {
    double s = 0.0;
    for (std::size_t i = 0; i < scenarios.t; ++i) s += scenarios.clicks(o, i);
    out[o] = s / static_cast<double>(scenarios.t);
  }
  return out;
}

}  // namespace

std::vector<double> option_expected_profit(const OptionSet& options,
                                           const ScenarioSet& scenarios) {
  auto m = mean_clicks(options, scenarios);
  for (std::size_t o = 0; o < m.size(); ++o) m[o] *= options.margin(o);
  return m;
}

std::vector<double> option_expected_cost(const OptionSet& options,
                                         const ScenarioSet& scenarios) {
  auto m = mean_clicks(options, scenarios);
  for (std::size_t o = 0; o < m.size(); ++o) m[o] *= options.keyword_of(o).cpc;
  return m;
}

double decision_objective(const TargetingDecision& decision,
                          const OptionSet& options,
                          const std::vector<double>& option_profit) {
  check_sizes(decision, options);
  double z = 0.0;
  for (std::size_t k = 0; k < decision.size(); ++k) {
    if (const auto o = selected_option(decision, options, k)) z += option_profit[*o];
  }
  return z;
}

double expected_profit(const TargetingDecision& decision,
                       const ScenarioSet& scenarios, const OptionSet& options) {
  if (scenarios.t == 0) throw Error(ErrorCode::kInsufficientScenarios, "no scenarios");
  return decision_objective(decision, options, option_expected_profit(options, scenarios));
}

double chance_probability(const TargetingDecision& decision,
                          const ScenarioSet& scenarios,
                          const OptionSet& options, double budget) {
  if (scenarios.t == 0) throw Error(ErrorCode::kInsufficientScenarios, "no scenarios");
  check_sizes(decision, options);
  std::vector<double> total(scenarios.t, 0.0);
  for (std::size_t k = 0; k < decision.size(); ++k) {
    const auto o = selected_option(decision, options, k);
    if (!o) continue;
    const double p = options.keyword_of(*o).cpc;
    for (std::size_t s = 0; s < scenarios.t; ++s) total[s] += scenarios.clicks(*o, s) * p;
  }
  std::size_t ok = 0;
  for (double c : total) ok += (c <= budget);
  return static_cast<double>(ok) / static_cast<double>(scenarios.t);
}

CostMoments cost_moments(const OptionSet& options, const ScenarioSet& scenarios) {
  if (scenarios.t < 2) {
    throw Error(ErrorCode::kInsufficientScenarios, "cost moments need at least two scenarios");
  }
  CostMoments m;
  m.mean.resize(options.size());
  m.variance.resize(options.size());
  const auto t = static_cast<double>(scenarios.t);
  for (std::size_t o = 0; o < options.size(); ++o) {
    const double p = options.keyword_of(o).cpc;
    double sum = 0.0;
    for (std::size_t s = 0; s < scenarios.t; ++s) sum += scenarios.clicks(o, s) * p;
    const double mean = sum / t;
    double ss = 0.0;
    for (std::size_t s = 0; s < scenarios.t; ++s) {
      const double dev = scenarios.clicks(o, s) * p - mean;
      ss += dev * dev;
    }
    m.mean[o] = mean;
    m.variance[o] = ss / (t - 1.0);
  }
  return m;
}

SolutionReport evaluate_solution(const TargetingDecision& decision,
                                 const ScenarioSet& fresh_scenarios,
                                 const OptionSet& options, double budget,
                                 double alpha, std::string strategy) {
  SolutionReport rep;
  rep.strategy = std::move(strategy);
  rep.budget = budget;
  rep.alpha = alpha;
  const auto profit_o = option_expected_profit(options, fresh_scenarios);
  const auto cost_o = option_expected_cost(options, fresh_scenarios);
  rep.expected_profit = decision_objective(decision, options, profit_o);
  rep.alpha_hat = chance_probability(decision, fresh_scenarios, options, budget);
  std::array<std::size_t, 3> per_type{0, 0, 0};
  for (std::size_t k = 0; k < decision.size(); ++k) {
    const auto o = selected_option(decision, options, k);
    if (!o) continue;
    ++per_type[static_cast<std::size_t>(match_index(decision[k]))];
    const auto& info = options.keywords()[k];
    rep.keywords.push_back({info.keyword_id, info.adgroup_id, decision[k], profit_o[*o], cost_o[*o]});
  }
  rep.n_selected = rep.keywords.size();
  if (rep.n_selected > 0) {
    for (std::size_t i = 0; i < 3; ++i) {
      rep.match_share[i] = static_cast<double>(per_type[i]) / static_cast<double>(rep.n_selected);
    }
  }
  return rep;
}

}  // namespace kwtarget
