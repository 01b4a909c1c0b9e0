#include "kwtarget/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "kwtarget/error.hpp"

namespace kwtarget {

namespace {

constexpr double kRatioCap = 1e12;

struct NamedStrategy {
  Strategy s;
  std::string_view name;
};
constexpr NamedStrategy kStrategies[] = {
    {Strategy::kBbKsm, "BBKSM"}, {Strategy::kBase1, "BASE1"}, {Strategy::kBase2, "BASE2"},
    {Strategy::kBase3, "BASE3"}, {Strategy::kBase4, "BASE4"}, {Strategy::kBase5, "BASE5"},
    {Strategy::kBase6, "BASE6"}, {Strategy::kBase7, "BASE7"},
};

bool keyword_less(const OptionSet& set, std::size_t a, std::size_t b) {
  const auto& ka = set.keywords()[a];
  const auto& kb = set.keywords()[b];
  if (ka.adgroup_id != kb.adgroup_id) return ka.adgroup_id < kb.adgroup_id;
  return ka.keyword_id < kb.keyword_id;
}

// Keywords with score, sorted by score descending then (adgroup, keyword).
std::vector<std::size_t> order_by(const OptionSet& set, const std::vector<double>& score,
                                  const std::vector<char>& eligible) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < score.size(); ++k) {
    if (eligible[k]) idx.push_back(k);
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return keyword_less(set, a, b);
  });
  return idx;
}

// Walks `order`, stopping before the first keyword whose expected cost would
// take the running total above the budget.
TargetingDecision greedy_fill(std::size_t keywords, const std::vector<std::size_t>& order,
                              const std::vector<MatchType>& match,
                              const std::vector<double>& cost, double budget) {
  TargetingDecision d(keywords);
  if (!(budget > 0.0)) return d;
  double spent = 0.0;
  for (std::size_t k : order) {
    if (spent + cost[k] > budget) break;
    spent += cost[k];
    d.set(k, match[k]);
  }
  return d;
}

double ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return num > 0.0 ? kRatioCap : 0.0;
}

}  // namespace

std::string_view strategy_name(Strategy s) {
  for (const auto& e : kStrategies) {
    if (e.s == s) return e.name;
  }
  return "BBKSM";
}

std::optional<Strategy> parse_strategy(std::string_view s) {
  for (const auto& e : kStrategies) {
    if (e.name == s) return e.s;
  }
  return std::nullopt;
}

void BaselineConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::kInvalidArgument, "tau must be positive");
  }
}

ObservedHistory observe(const OptionSet& full,
                        const std::vector<PerformanceRecord>& records) {
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (std::size_t k = 0; k < full.keyword_count(); ++k) {
    const auto& kw = full.keywords()[k];
    index[{kw.adgroup_id, kw.keyword_id}] = k;
  }
  const std::size_t K = full.keyword_count();
  std::vector<std::vector<const PerformanceRecord*>> by_kw(K);
  for (const auto& r : records) {
    const auto it = index.find({r.adgroup_id, r.keyword_id});
    if (it != index.end()) by_kw[it->second].push_back(&r);
  }

  ObservedHistory h;
  h.samples.resize(K);
  h.frequency.resize(K);
  h.daily_impressions.resize(K);
  h.expected_profit.resize(K);
  h.expected_cost.resize(K);
  h.expected_impressions.resize(K);
  std::vector<KeywordOption> opts;
  for (std::size_t k = 0; k < K; ++k) {
    auto& rs = by_kw[k];
    if (rs.empty()) {
      throw Error(ErrorCode::kValidationError,
                  "keyword " + full.keywords()[k].keyword_id + " has no records");
    }
    std::array<std::size_t, 3> used{0, 0, 0};
    for (const auto* r : rs) ++used[static_cast<std::size_t>(match_index(r->match))];
    const auto top = static_cast<int>(std::max_element(used.begin(), used.end()) - used.begin());
    const MatchType m = match_from_index(top);
    opts.push_back({k, m});
    std::stable_sort(rs.begin(), rs.end(), [](const auto* a, const auto* b) { return a->day < b->day; });
    double clicks = 0.0, imps = 0.0;
    for (const auto* r : rs) {
      if (r->match != m) continue;
      h.samples[k].emplace_back(r->impressions, r->ctr);
      h.daily_impressions[k].push_back(r->impressions);
      clicks += r->impressions * r->ctr;
      imps += r->impressions;
    }
    const auto n = static_cast<double>(h.samples[k].size());
    const auto& kw = full.keywords()[k];
    h.frequency[k] = rs.size();
    h.expected_profit[k] = clicks / n * (kw.vpc - kw.cpc);
    h.expected_cost[k] = clicks / n * kw.cpc;
    h.expected_impressions[k] = imps / n;
  }
  h.options = OptionSet(full.keywords(), std::move(opts));
  return h;
}

ScenarioSet sample_observed_scenarios(const ObservedHistory& hist, std::size_t t,
                                      std::uint64_t seed) {
  if (t == 0) throw Error(ErrorCode::kInvalidArgument, "scenario count must be positive");
  ScenarioSet sc;
  sc.t = t;
  sc.seed = seed;
  sc.impressions.assign(hist.options.size(), std::vector<double>(t));
  sc.ctr.assign(hist.options.size(), std::vector<double>(t));
  for (std::size_t o = 0; o < hist.options.size(); ++o) {
    const std::size_t k = hist.options[o].keyword;
    const auto& kw = hist.options.keywords()[k];
    RngStream rng(seed, mix64(stable_hash(kw.adgroup_id + '\x1f' + kw.keyword_id) ^ 0x3));
    const auto& pool = hist.samples[k];
    for (std::size_t s = 0; s < t; ++s) {
      const auto& [d, c] = pool[rng.index(pool.size())];
      sc.impressions[o][s] = d;
      sc.ctr[o][s] = c;
    }
  }
  return sc;
}

double competitiveness_confidence(double impressions, double tau) {
  return 1.0 - 1.0 / (1.0 + std::exp(-tau * impressions));
}

namespace {

std::vector<MatchType> observed_match(const ObservedHistory& hist) {
  std::vector<MatchType> m(hist.options.keyword_count(), MatchType::kNone);
  for (const auto& o : hist.options.options()) m[o.keyword] = o.match;
  return m;
}

std::vector<char> positive(const std::vector<double>& v) {
  std::vector<char> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0;
  return out;
}

}  // namespace

TargetingDecision base1_past(const ObservedHistory& hist, double budget) {
  const std::size_t K = hist.options.keyword_count();
  std::vector<double> freq(K);
  for (std::size_t k = 0; k < K; ++k) freq[k] = static_cast<double>(hist.frequency[k]);
  const auto order = order_by(hist.options, freq, std::vector<char>(K, 1));
  return greedy_fill(K, order, observed_match(hist), hist.expected_cost, budget);
}

TargetingDecision base2_prefix_order(const ObservedHistory& hist, double budget) {
  const std::size_t K = hist.options.keyword_count();
  std::vector<double> r(K);
  for (std::size_t k = 0; k < K; ++k) r[k] = ratio(hist.expected_profit[k], hist.expected_cost[k]);
  const auto order = order_by(hist.options, r, positive(hist.expected_profit));
  return greedy_fill(K, order, observed_match(hist), hist.expected_cost, budget);
}

TargetingDecision base3_competitiveness(const ObservedHistory& hist, double budget,
                                        const BaselineConfig& cfg) {
  cfg.validate();
  const std::size_t K = hist.options.keyword_count();
  std::vector<double> score(K);
  for (std::size_t k = 0; k < K; ++k) {
    score[k] = hist.expected_profit[k] *
               competitiveness_confidence(hist.expected_impressions[k], cfg.tau);
  }
  const auto order = order_by(hist.options, score, positive(hist.expected_profit));
  return greedy_fill(K, order, observed_match(hist), hist.expected_cost, budget);
}

TargetingDecision base4_sharpe(const ObservedHistory& hist, double budget) {
  const std::size_t K = hist.options.keyword_count();
  std::vector<double> sharpe(K, 0.0);
  std::vector<char> eligible(K, 0);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& d = hist.daily_impressions[k];
    if (d.size() < 2) continue;
    std::vector<double> g;
    for (std::size_t i = 1; i < d.size(); ++i) g.push_back((d[i] - d[i - 1]) / std::max(d[i - 1], 1.0));
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    if (!(mean > 0.0)) continue;
    double ss = 0.0;
    for (double x : g) ss += (x - mean) * (x - mean);
    const double sd = g.size() > 1 ? std::sqrt(ss / static_cast<double>(g.size() - 1)) : 0.0;
    sharpe[k] = sd > 0.0 ? std::min(mean / sd, kRatioCap) : kRatioCap;
    eligible[k] = 1;
  }
  const auto order = order_by(hist.options, sharpe, eligible);
  return greedy_fill(K, order, observed_match(hist), hist.expected_cost, budget);
}

TargetingDecision base5_select_nomatch(const ObservedHistory& hist,
                                       const BaselineConfig& cfg) {
  const auto sc = sample_observed_scenarios(hist, cfg.solver.t, cfg.solver.seed);
  return solve_bb_ksm(hist.options, sc, cfg.solver).incumbent.decision;
}

TargetingDecision base6_rand_match(const ObservedHistory& hist, const OptionSet& full,
                                   const ScenarioSet& scenarios, double budget,
                                   const BaselineConfig& cfg) {
  const std::size_t K = full.keyword_count();
  const auto order = order_by(hist.options, hist.expected_profit, positive(hist.expected_profit));
  const auto cost_o = option_expected_cost(full, scenarios);
  RngStream rng(cfg.seed, 6);
  std::vector<MatchType> match(K, MatchType::kNone);
  std::vector<double> cost(K, 0.0);
  for (std::size_t k : order) {
    match[k] = match_from_index(static_cast<int>(rng.index(3)));
    const auto o = full.find(k, match[k]);
    if (!o) throw Error(ErrorCode::kInvalidArgument, "full option set lacks a match type");
    cost[k] = cost_o[*o];
  }
  return greedy_fill(K, order, match, cost, budget);
}

TargetingDecision base7_opt_match(const OptionSet& full, const ScenarioSet& scenarios,
                                  double budget) {
  const std::size_t K = full.keyword_count();
  const auto profit_o = option_expected_profit(full, scenarios);
  const auto cost_o = option_expected_cost(full, scenarios);
  std::vector<MatchType> match(K, MatchType::kNone);
  std::vector<double> best(K, 0.0), cost(K, 0.0);
  std::vector<char> eligible(K, 0);
  for (std::size_t k = 0; k < K; ++k) {
    bool any = false;
    for (MatchType m : kAllMatchTypes) {
      const auto o = full.find(k, m);
      if (!o) continue;
      if (!any || profit_o[*o] > best[k]) {
        any = true;
        best[k] = profit_o[*o];
        match[k] = m;
        cost[k] = cost_o[*o];
      }
    }
    eligible[k] = any && best[k] > 0.0;
  }
  const auto order = order_by(full, best, eligible);
  return greedy_fill(K, order, match, cost, budget);
}

TargetingDecision run_baseline(Strategy which, const ObservedHistory& hist,
                               const OptionSet& full, const ScenarioSet& scenarios,
                               const BaselineConfig& cfg) {
  const double b = cfg.solver.budget;
  switch (which) {
    case Strategy::kBase1: return base1_past(hist, b);
    case Strategy::kBase2: return base2_prefix_order(hist, b);
    case Strategy::kBase3: return base3_competitiveness(hist, b, cfg);
    case Strategy::kBase4: return base4_sharpe(hist, b);
    case Strategy::kBase5: return base5_select_nomatch(hist, cfg);
    case Strategy::kBase6: return base6_rand_match(hist, full, scenarios, b, cfg);
    case Strategy::kBase7: return base7_opt_match(full, scenarios, b);
    case Strategy::kBbKsm: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "not a baseline strategy");
}

}  // namespace kwtarget
