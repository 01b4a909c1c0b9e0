#include "kwtarget/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "kwtarget/error.hpp"
#include "kwtarget/statcore.hpp"

namespace kwtarget {

void SolverConfig::validate() const {
  if (!std::isfinite(budget)) throw Error(ErrorCode::kInvalidArgument, "budget must be finite");
  if (!(alpha > 0.5 && alpha < 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "alpha must lie in (0.5, 1)");
  }
  if (t < 1) throw Error(ErrorCode::kInvalidArgument, "scenario count must be >= 1");
  if (node_limit < 1) throw Error(ErrorCode::kInvalidArgument, "node limit must be >= 1");
  if (!(bound_tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bound tolerance must be positive");
  }
}

bool better_incumbent(const Incumbent& a, const Incumbent& b) {
  if (a.objective != b.objective) return a.objective > b.objective;
  const std::size_t na = a.decision.selected_count();
  const std::size_t nb = b.decision.selected_count();
  if (na != nb) return na < nb;
  return a.decision.choices() < b.decision.choices();
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool option_less(const OptionSet& options, std::size_t a, std::size_t b) {
  const auto& ka = options.keyword_of(a);
  const auto& kb = options.keyword_of(b);
  if (ka.adgroup_id != kb.adgroup_id) return ka.adgroup_id < kb.adgroup_id;
  if (ka.keyword_id != kb.keyword_id) return ka.keyword_id < kb.keyword_id;
  return match_index(options[a].match) < match_index(options[b].match);
}

bool meets(std::size_t count, std::size_t t, double alpha) {
  return static_cast<double>(count) / static_cast<double>(t) >= alpha;
}

// Scenario costs per option, contiguous.
class CostTable {
 public:
  CostTable(const OptionSet& options, const ScenarioSet& sc)
      : t_(sc.t), data_(options.size() * sc.t) {
    for (std::size_t o = 0; o < options.size(); ++o) {
      const double p = options.keyword_of(o).cpc;
      for (std::size_t s = 0; s < t_; ++s) data_[o * t_ + s] = sc.clicks(o, s) * p;
    }
  }
  std::size_t t() const { return t_; }
  const double* row(std::size_t o) const { return data_.data() + o * t_; }

  void add(std::vector<double>& acc, std::size_t o) const {
    const double* r = row(o);
    for (std::size_t s = 0; s < t_; ++s) acc[s] += r[s];
  }
  std::size_t count_within(const std::vector<double>& acc, double budget) const {
    std::size_t n = 0;
    for (double c : acc) n += (c <= budget);
    return n;
  }
  // scenarios within budget once option o is added to acc
  std::size_t count_with(const std::vector<double>& acc, std::size_t o, double budget) const {
    const double* r = row(o);
    std::size_t n = 0;
    for (std::size_t s = 0; s < t_; ++s) n += (acc[s] + r[s] <= budget);
    return n;
  }

 private:
  std::size_t t_;
  std::vector<double> data_;
};

CostMoments moments_of(const OptionSet& options, const ScenarioSet& sc) {
  if (sc.t >= 2) return cost_moments(options, sc);
  CostMoments m;
  m.mean = option_expected_cost(options, sc);
  m.variance.assign(options.size(), 0.0);
  return m;
}

class BoundEngine {
 public:
  BoundEngine(const OptionSet& options, const CostMoments& moments,
              const std::vector<double>& profit, double z, double budget)
      : options_(options), moments_(moments), profit_(profit), z_(z), budget_(budget),
        sd_(moments.variance.size()) {
    for (std::size_t o = 0; o < sd_.size(); ++o) sd_[o] = std::sqrt(std::max(0.0, moments.variance[o]));
  }

  // `candidates` must exclude options of accepted keywords and hold only
  // positive-profit options.
  double bound(const std::vector<std::size_t>& accepted,
               const std::vector<std::size_t>& candidates) {
    double mu_a = 0.0, var_a = 0.0, pi_a = 0.0;
    for (std::size_t o : accepted) {
      mu_a += moments_.mean[o];
      var_a += std::max(0.0, moments_.variance[o]);
      pi_a += profit_[o];
    }
    const double sd_a = std::sqrt(var_a);
    if (mu_a + z_ * sd_a > budget_) return kNegInf;

    group(candidates);
    std::vector<double> y(candidates.size(), 0.0);
    double y0 = 1.0;
    double best = std::numeric_limits<double>::infinity();
    for (int round = 0; round < 4; ++round) {
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        weight_[i] = moments_.mean[candidates[i]] + z_ * y[i] * sd_[candidates[i]];
      }
      const double cap = budget_ - mu_a - z_ * y0 * sd_a;
      if (cap < 0.0) return kNegInf;
      best = std::min(best, knapsack_lp(candidates, cap));
      double norm2 = var_a;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double v = sd_[candidates[i]] * x_[i];
        norm2 += v * v;
      }
      if (!(norm2 > 0.0)) break;
      const double norm = std::sqrt(norm2);
      y0 = sd_a / norm;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        y[i] = sd_[candidates[i]] * x_[i] / norm;
      }
    }
    return pi_a + best;
  }

 private:
  struct Segment {
    double dw, dp;
    std::size_t group;
    std::size_t to;  // hull position reached
  };

  void group(const std::vector<std::size_t>& candidates) {
    const std::size_t n = candidates.size();
    weight_.assign(n, 0.0);
    x_.assign(n, 0.0);
    members_.clear();
    // candidates of one keyword are contiguous after sorting by keyword
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return options_[candidates[a]].keyword < options_[candidates[b]].keyword;
    });
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      std::vector<std::size_t> g;
      while (j < n && options_[candidates[idx[j]]].keyword == options_[candidates[idx[i]]].keyword) {
        g.push_back(idx[j]);
        ++j;
      }
      members_.push_back(std::move(g));
      i = j;
    }
  }

  double knapsack_lp(const std::vector<std::size_t>& candidates, double cap) {
    std::fill(x_.begin(), x_.end(), 0.0);
    segments_.clear();
    hulls_.assign(members_.size(), {});
    for (std::size_t gi = 0; gi < members_.size(); ++gi) {
      auto pts = members_[gi];
      std::sort(pts.begin(), pts.end(), [&](std::size_t a, std::size_t b) {
        if (weight_[a] != weight_[b]) return weight_[a] < weight_[b];
        return profit_[candidates[a]] > profit_[candidates[b]];
      });
      auto& hull = hulls_[gi];
      double best_p = 0.0;
      for (std::size_t i : pts) {
        const double w = weight_[i], p = profit_[candidates[i]];
        if (p <= best_p) continue;
        best_p = p;
        while (!hull.empty()) {
          const double w1 = hull.size() >= 2 ? weight_[hull[hull.size() - 2]] : 0.0;
          const double p1 = hull.size() >= 2 ? profit_[candidates[hull[hull.size() - 2]]] : 0.0;
          const double w2 = weight_[hull.back()], p2 = profit_[candidates[hull.back()]];
          if ((p2 - p1) * (w - w2) <= (p - p2) * (w2 - w1)) {
            hull.pop_back();
          } else {
            break;
          }
        }
        hull.push_back(i);
      }
      double pw = 0.0, pp = 0.0;
      for (std::size_t h = 0; h < hull.size(); ++h) {
        const double w = weight_[hull[h]], p = profit_[candidates[hull[h]]];
        segments_.push_back({w - pw, p - pp, gi, h});
        pw = w;
        pp = p;
      }
    }
    std::stable_sort(segments_.begin(), segments_.end(), [](const Segment& a, const Segment& b) {
      return a.dp * b.dw > b.dp * a.dw;
    });
    double value = 0.0;
    std::vector<int> level(members_.size(), -1);
    for (const auto& s : segments_) {
      if (s.dw <= cap) {
        cap -= s.dw;
        value += s.dp;
        level[s.group] = static_cast<int>(s.to);
        continue;
      }
      const double f = cap / s.dw;
      value += s.dp * f;
      const auto& hull = hulls_[s.group];
      x_[hull[s.to]] = f;
      if (s.to > 0) x_[hull[s.to - 1]] = 1.0 - f;
      level[s.group] = -2;  // already written
      break;
    }
    for (std::size_t gi = 0; gi < members_.size(); ++gi) {
      if (level[gi] >= 0) x_[hulls_[gi][static_cast<std::size_t>(level[gi])]] = 1.0;
    }
    return value;
  }

  const OptionSet& options_;
  const CostMoments& moments_;
  const std::vector<double>& profit_;
  double z_;
  double budget_;
  std::vector<double> sd_;
  std::vector<double> weight_;
  std::vector<double> x_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::vector<std::size_t>> hulls_;
  std::vector<Segment> segments_;
};

TargetingDecision decision_from(const OptionSet& options,
                                const std::vector<std::size_t>& accepted) {
  TargetingDecision d(options.keyword_count());
  for (std::size_t o : accepted) d.set(options[o].keyword, options[o].match);
  return d;
}

}  // namespace

std::vector<std::size_t> rank_options(const OptionSet& options,
                                      const ScenarioSet& scenarios) {
  if (scenarios.t == 0) throw Error(ErrorCode::kInsufficientScenarios, "no scenarios");
  const auto profit = option_expected_profit(options, scenarios);
  std::vector<std::size_t> order(options.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (profit[a] != profit[b]) return profit[a] > profit[b];
    return option_less(options, a, b);
  });
  return order;
}

Feasibility stochastic_feasible(const TargetingDecision& decision,
                                const OptionSet& options,
                                const ScenarioSet& scenarios,
                                const SolverConfig& cfg) {
  const double a = chance_probability(decision, scenarios, options, cfg.budget);
  return {a >= cfg.alpha, a};
}

double relaxation_bound(const Subproblem& sub, const OptionSet& options,
                        const CostMoments& moments,
                        const std::vector<double>& option_profit,
                        const SolverConfig& cfg) {
  if (moments.mean.size() != options.size() || option_profit.size() != options.size()) {
    throw Error(ErrorCode::kInvalidArgument, "moments and profits must cover every option");
  }
  if (cfg.alpha < 0.5 || cfg.alpha >= 1.0) {
    throw Error(ErrorCode::kOutOfRange, "alpha must lie in [0.5, 1)");
  }
  std::vector<char> state(options.size(), 0);  // 1 accepted, 2 rejected
  std::vector<char> keyword_taken(options.keyword_count(), 0);
  for (std::size_t o : sub.accepted) {
    if (o >= options.size()) throw Error(ErrorCode::kInvalidArgument, "option index out of range");
    if (keyword_taken[options[o].keyword]) {
      throw Error(ErrorCode::kInvalidArgument, "two accepted options share a keyword");
    }
    keyword_taken[options[o].keyword] = 1;
    state[o] = 1;
  }
  for (std::size_t o : sub.rejected) {
    if (o >= options.size()) throw Error(ErrorCode::kInvalidArgument, "option index out of range");
    if (state[o] == 1) throw Error(ErrorCode::kInvalidArgument, "option both accepted and rejected");
    state[o] = 2;
  }
  std::vector<std::size_t> candidates;
  for (std::size_t o = 0; o < options.size(); ++o) {
    if (state[o] == 0 && !keyword_taken[options[o].keyword] && option_profit[o] > 0.0) {
      candidates.push_back(o);
    }
  }
  BoundEngine engine(options, moments, option_profit, normal_quantile(cfg.alpha), cfg.budget);
  return engine.bound(sub.accepted, candidates);
}

SolveResult solve_bb_ksm(const OptionSet& options, const ScenarioSet& scenarios,
                         const SolverConfig& cfg) {
  cfg.validate();
  if (!(cfg.budget > 0.0)) {
    throw Error(ErrorCode::kNoFeasibleSolution, "budget must be positive");
  }
  if (scenarios.t == 0) throw Error(ErrorCode::kInsufficientScenarios, "no scenarios");
  const auto start = std::chrono::steady_clock::now();

  SolveResult res;
  auto& stats = res.stats;
  Incumbent& best = res.incumbent;
  best.decision = TargetingDecision(options.keyword_count());

  const std::size_t t = scenarios.t;
  const CostTable table(options, scenarios);
  const auto profit = option_expected_profit(options, scenarios);
  const auto moments = moments_of(options, scenarios);
  BoundEngine engine(options, moments, profit, normal_quantile(cfg.alpha), cfg.budget);

  const std::vector<double> zero(t, 0.0);
  std::vector<std::size_t> order;
  for (std::size_t o : rank_options(options, scenarios)) {
    if (profit[o] > 0.0 && meets(table.count_with(zero, o, cfg.budget), t, cfg.alpha)) {
      order.push_back(o);
    }
  }
  const std::size_t n = order.size();

  auto consider = [&](const std::vector<std::size_t>& accepted, std::size_t count) {
    Incumbent cand;
    cand.decision = decision_from(options, accepted);
    cand.objective = decision_objective(cand.decision, options, profit);
    cand.alpha_hat = static_cast<double>(count) / static_cast<double>(t);
    if (better_incumbent(cand, best)) {
      best = std::move(cand);
      stats.incumbent_trace.emplace_back(stats.nodes_explored, best.objective);
    }
  };
  auto prunable = [&](double sup) {
    return sup + cfg.bound_tolerance * (1.0 + std::abs(sup)) <= best.objective;
  };

  std::vector<char> taken(options.keyword_count(), 0);
  auto mark = [&](const std::vector<std::size_t>& accepted) {
    std::fill(taken.begin(), taken.end(), 0);
    for (std::size_t o : accepted) taken[options[o].keyword] = 1;
  };
  std::vector<std::size_t> candidates;
  auto bound_at = [&](const std::vector<std::size_t>& accepted, std::size_t depth) {
    candidates.clear();
    for (std::size_t i = depth; i < n; ++i) {
      if (!taken[options[order[i]].keyword]) candidates.push_back(order[i]);
    }
    return engine.bound(accepted, candidates);
  };
  // Greedy extension down the ranking from `depth`; `costs` is consumed.
  auto plunge = [&](std::vector<std::size_t> accepted, std::vector<double> costs,
                    std::size_t depth) {
    std::size_t count = table.count_within(costs, cfg.budget);
    std::vector<char> used = taken;
    for (std::size_t i = depth; i < n; ++i) {
      const std::size_t o = order[i];
      if (used[options[o].keyword]) continue;
      const std::size_t c = table.count_with(costs, o, cfg.budget);
      if (!meets(c, t, cfg.alpha)) continue;
      table.add(costs, o);
      count = c;
      used[options[o].keyword] = 1;
      accepted.push_back(o);
    }
    consider(accepted, count);
  };

  struct Node {
    double sup;
    std::uint64_t id;
    std::size_t depth;
    std::vector<std::size_t> accepted;
  };
  auto worse = [](const Node& a, const Node& b) {
    if (a.sup != b.sup) return a.sup < b.sup;
    return a.id > b.id;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> queue(worse);
  std::uint64_t next_id = 0;

  mark({});
  stats.root_bound = bound_at({}, 0);
  plunge({}, zero, 0);
  if (!prunable(stats.root_bound)) queue.push({stats.root_bound, next_id++, 0, {}});

  std::vector<double> costs(t);
  while (!queue.empty()) {
    stats.max_queue = std::max(stats.max_queue, queue.size());
    Node node = queue.top();
    queue.pop();
    if (prunable(node.sup)) {
      ++stats.nodes_pruned;
      continue;
    }
    if (stats.nodes_explored >= cfg.node_limit) {
      stats.truncated = true;
      break;
    }
    ++stats.nodes_explored;
    mark(node.accepted);
    std::size_t d = node.depth;
    while (d < n && taken[options[order[d]].keyword]) ++d;
    if (d == n) continue;
    const std::size_t o = order[d];

    // force in
    std::fill(costs.begin(), costs.end(), 0.0);
    for (std::size_t a : node.accepted) table.add(costs, a);
    const std::size_t count = table.count_with(costs, o, cfg.budget);
    if (meets(count, t, cfg.alpha)) {
      std::vector<std::size_t> acc = node.accepted;
      acc.push_back(o);
      table.add(costs, o);
      consider(acc, count);
      taken[options[o].keyword] = 1;
      const double sup = bound_at(acc, d + 1);
      if (!prunable(sup)) {
        plunge(acc, costs, d + 1);
        if (!prunable(sup)) queue.push({sup, next_id++, d + 1, std::move(acc)});
        else ++stats.nodes_pruned;
      } else {
        ++stats.nodes_pruned;
      }
      taken[options[o].keyword] = 0;
    } else {
      ++stats.nodes_infeasible;
    }

    // force out
    const double sup = bound_at(node.accepted, d + 1);
    if (!prunable(sup)) {
      queue.push({sup, next_id++, d + 1, std::move(node.accepted)});
    } else {
      ++stats.nodes_pruned;
    }
  }
  stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

Incumbent brute_force_oracle(const OptionSet& options,
                             const ScenarioSet& scenarios,
                             const SolverConfig& cfg) {
  const std::size_t K = options.keyword_count();
  if (K > kOracleMaxKeywords) {
    throw Error(ErrorCode::kTooLarge, "oracle supports at most 12 keywords");
  }
  if (scenarios.t == 0) throw Error(ErrorCode::kInsufficientScenarios, "no scenarios");
  const std::size_t t = scenarios.t;
  const CostTable table(options, scenarios);
  const auto profit = option_expected_profit(options, scenarios);

  Incumbent best;
  best.decision = TargetingDecision(K);
  best.objective = 0.0;
  best.alpha_hat = static_cast<double>(table.count_within(std::vector<double>(t, 0.0), cfg.budget)) /
                   static_cast<double>(t);
  if (!(best.alpha_hat >= cfg.alpha)) {
    throw Error(ErrorCode::kNoFeasibleSolution, "even the empty decision violates the budget");
  }

  std::vector<std::vector<std::size_t>> choices(K);
  for (std::size_t k = 0; k < K; ++k) {
    for (MatchType m : kAllMatchTypes) {
      if (const auto o = options.find(k, m)) choices[k].push_back(*o);
    }
  }
  std::vector<std::vector<double>> level(K + 1, std::vector<double>(t, 0.0));
  Incumbent cand;
  cand.decision = TargetingDecision(K);

  auto dfs = [&](auto&& self, std::size_t k, double z, std::size_t count) -> void {
    if (k == K) {
      cand.objective = z;
      cand.alpha_hat = static_cast<double>(count) / static_cast<double>(t);
      if (better_incumbent(cand, best)) best = cand;
      return;
    }
    level[k + 1] = level[k];
    cand.decision.set(k, MatchType::kNone);
    self(self, k + 1, z, count);
    for (std::size_t o : choices[k]) {
      const std::size_t c = table.count_with(level[k], o, cfg.budget);
      if (!meets(c, t, cfg.alpha)) continue;
      level[k + 1] = level[k];
      table.add(level[k + 1], o);
      cand.decision.set(k, options[o].match);
      self(self, k + 1, z + profit[o], c);
    }
    cand.decision.set(k, MatchType::kNone);
  };
  dfs(dfs, 0, 0.0, table.count_within(level[0], cfg.budget));
  return best;
}

}  // namespace kwtarget
