#include "kwtarget/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <map>

#include "kwtarget/dataset.hpp"
#include "kwtarget/error.hpp"

namespace kwtarget {

void RunConfig::validate() const {
  if (budgets.empty()) throw Error(ErrorCode::kInvalidArgument, "at least one budget is required");
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (!(budgets[i] > 0.0) || !std::isfinite(budgets[i])) {
      throw Error(ErrorCode::kInvalidArgument, "budget must be positive");
    }
    if (i > 0 && !(budgets[i] > budgets[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "budgets must be strictly ascending");
    }
  }
  if (!(alpha > 0.5 && alpha < 1.0)) throw Error(ErrorCode::kOutOfRange, "alpha must lie in (0.5, 1)");
  if (t < 1 || eval_t < 1) throw Error(ErrorCode::kInvalidArgument, "scenario counts must be >= 1");
  if (node_limit < 1) throw Error(ErrorCode::kInvalidArgument, "node limit must be >= 1");
  if (!(bound_tolerance > 0.0)) throw Error(ErrorCode::kInvalidArgument, "bound tolerance must be positive");
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tau must be positive");
  if (strategies.empty()) throw Error(ErrorCode::kInvalidArgument, "no strategy selected");
}

std::uint64_t RunConfig::solver_seed() const { return mix64(seed ^ 0x736f6c7665ULL); }
std::uint64_t RunConfig::eval_seed() const { return mix64(seed ^ 0x6576616cULL); }

std::vector<StrategyReport> run_strategies(const std::vector<PerformanceRecord>& records,
                                           const std::vector<AdGroupPosterior>& posterior,
                                           const RunConfig& cfg) {
  cfg.validate();
  const auto built = build_options(records, posterior, cfg.t, cfg.solver_seed());
  const auto& full = built.options;
  const auto fresh = sample_scenarios(full, posterior, cfg.eval_t, cfg.eval_seed());
  const auto hist = observe(full, records);
  const auto in_profit = option_expected_profit(full, built.scenarios);

  std::vector<StrategyReport> out;
  for (Strategy s : cfg.strategies) {
    for (double b : cfg.budgets) {
      SolverConfig sc;
      sc.budget = b;
      sc.alpha = cfg.alpha;
      sc.t = cfg.t;
      sc.node_limit = cfg.node_limit;
      sc.bound_tolerance = cfg.bound_tolerance;
      sc.seed = cfg.solver_seed();
      StrategyReport rep;
      if (s == Strategy::kBbKsm) {
        auto res = solve_bb_ksm(full, built.scenarios, sc);
        rep.decision = std::move(res.incumbent.decision);
        rep.stats = std::move(res.stats);
      } else {
        BaselineConfig bc;
        bc.tau = cfg.tau;
        bc.seed = mix64(cfg.seed ^ (0xba5e0ULL + static_cast<std::uint64_t>(s)));
        bc.solver = sc;
        bc.solver.seed = mix64(cfg.seed ^ 0x6f6273ULL);
        rep.decision = run_baseline(s, hist, full, built.scenarios, bc);
      }
      rep.in_sample_profit = decision_objective(rep.decision, full, in_profit);
      rep.in_sample_alpha = chance_probability(rep.decision, built.scenarios, full, b);
      rep.report = evaluate_solution(rep.decision, fresh, full, b, cfg.alpha,
                                     std::string(strategy_name(s)));
      out.push_back(std::move(rep));
    }
  }
  return out;
}

namespace {

const char* kPosteriorHeader =
    "adgroup_id,family,draw_index,theta_1,theta_2,theta_3,"
    "sigma_11,sigma_12,sigma_13,sigma_21,sigma_22,sigma_23,sigma_31,sigma_32,sigma_33";

void append_draws(std::string& out, const std::string& id, IndexFamily f,
                  const PosteriorDraws& draws) {
  for (std::size_t i = 0; i < draws.size(); ++i) {
    out += id;
    out += ',';
    out += family_name(f);
    out += ',';
    out += std::to_string(i);
    for (int a = 0; a < kMatchTypes; ++a) out += ',' + format_number(draws.theta_draws[i](a));
    for (int a = 0; a < kMatchTypes; ++a) {
      for (int b = 0; b < kMatchTypes; ++b) out += ',' + format_number(draws.sigma_draws[i](a, b));
    }
    out += '\n';
  }
}

}  // namespace

std::string posterior_to_csv(const std::vector<AdGroupPosterior>& posterior) {
  std::string out = kPosteriorHeader;
  out += '\n';
  for (const auto& g : posterior) {
    if (g.data.adgroup_id.find(',') != std::string::npos) {
      throw Error(ErrorCode::kValidationError, "ad-group id contains a comma");
    }
    append_draws(out, g.data.adgroup_id, IndexFamily::kImpressions, g.impressions);
    append_draws(out, g.data.adgroup_id, IndexFamily::kCtr, g.ctr);
  }
  return out;
}

std::vector<AdGroupPosterior> posterior_from_csv(std::string_view text,
                                                 const std::vector<PerformanceRecord>& records) {
  std::map<std::string, std::pair<PosteriorDraws, PosteriorDraws>> draws;
  std::size_t pos = 0, line_no = 0;
  bool header = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header) {
      if (line != kPosteriorHeader) throw ParseError(line_no, 1, "unexpected posterior header");
      header = true;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t s = 0;
    while (true) {
      const std::size_t c = line.find(',', s);
      cells.push_back(line.substr(s, c == std::string_view::npos ? std::string_view::npos : c - s));
      if (c == std::string_view::npos) break;
      s = c + 1;
    }
    if (cells.size() != 15) throw ParseError(line_no, cells.size(), "expected 15 cells");
    std::vector<double> v(12);
    for (std::size_t i = 0; i < 12; ++i) {
      const auto cell = cells[i + 3];
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v[i]);
      if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw ParseError(line_no, i + 4, "not a number: '" + std::string(cell) + "'");
      }
    }
    auto& pair = draws[std::string(cells[0])];
    PosteriorDraws* target = nullptr;
    if (cells[1] == family_name(IndexFamily::kImpressions)) target = &pair.first;
    else if (cells[1] == family_name(IndexFamily::kCtr)) target = &pair.second;
    else throw ParseError(line_no, 2, "family must be impressions or ctr");
    if (cells[2] != std::to_string(target->size())) {
      throw ParseError(line_no, 3, "draw indices must run 0, 1, 2, ...");
    }
    Vector theta(kMatchTypes);
    Matrix sigma(kMatchTypes, kMatchTypes);
    for (int a = 0; a < kMatchTypes; ++a) theta(a) = v[static_cast<std::size_t>(a)];
    for (int a = 0; a < kMatchTypes; ++a) {
      for (int b = 0; b < kMatchTypes; ++b) sigma(a, b) = v[static_cast<std::size_t>(3 + 3 * a + b)];
    }
    target->theta_draws.push_back(std::move(theta));
    target->sigma_draws.push_back(std::move(sigma));
  }
  if (!header) throw ParseError(1, 1, "empty posterior file");

  std::map<std::string, std::vector<PerformanceRecord>> groups;
  for (const auto& r : records) groups[r.adgroup_id].push_back(r);
  std::vector<AdGroupPosterior> out;
  for (auto& [id, recs] : groups) {
    const auto it = draws.find(id);
    if (it == draws.end() || it->second.first.size() == 0 || it->second.second.size() == 0) {
      throw Error(ErrorCode::kMissingPosterior, "posterior has no draws for " + id);
    }
    AdGroupPosterior g;
    g.data = build_adgroup_data(recs);
    g.impressions = std::move(it->second.first);
    g.ctr = std::move(it->second.second);
    out.push_back(std::move(g));
  }
  return out;
}

OracleInstance random_instance(std::uint64_t seed, std::size_t keywords, std::size_t t) {
  if (t == 0) throw Error(ErrorCode::kInvalidArgument, "scenario count must be positive");
  RngStream rng(seed, 0x0a);
  std::vector<KeywordInfo> kws;
  for (std::size_t k = 0; k < keywords; ++k) {
    KeywordInfo info;
    info.keyword_id = "keyword-" + std::to_string(k + 1);
    info.adgroup_id = "ad-group-1";
    info.vpc = std::round((0.5 + 4.5 * rng.uniform()) * 100.0) / 100.0;
    info.cpc = std::round((0.2 + 1.8 * rng.uniform()) * 100.0) / 100.0;
    kws.push_back(std::move(info));
  }
  OracleInstance inst;
  inst.options = OptionSet::all_match_types(std::move(kws));
  auto& sc = inst.scenarios;
  sc.t = t;
  sc.seed = seed;
  sc.impressions.assign(inst.options.size(), std::vector<double>(t));
  sc.ctr.assign(inst.options.size(), std::vector<double>(t));
  double all_in = 0.0;
  for (std::size_t k = 0; k < keywords; ++k) {
    double best = 0.0;
    for (MatchType m : kAllMatchTypes) {
      const std::size_t o = *inst.options.find(k, m);
      const double mu_d = std::log(10.0 + 50.0 * rng.uniform());
      const double sd_d = 0.1 + 0.4 * rng.uniform();
      const double c0 = 0.05 + 0.25 * rng.uniform();
      const double mu_c = std::log(c0 / (1.0 - c0));
      const double sd_c = 0.1 + 0.4 * rng.uniform();
      double clicks = 0.0;
      for (std::size_t s = 0; s < t; ++s) {
        sc.impressions[o][s] = std::exp(mu_d + sd_d * rng.normal());
        sc.ctr[o][s] = inverse_transform(mu_c + sd_c * rng.normal(), IndexFamily::kCtr);
        clicks += sc.clicks(o, s);
      }
      best = std::max(best, clicks / static_cast<double>(t) * inst.options.keywords()[k].cpc);
    }
    all_in += best;
  }
  inst.budget = all_in * (0.2 + 0.5 * rng.uniform());
  if (!(inst.budget > 0.0)) inst.budget = 1.0;
  return inst;
}

void OracleConfig::validate() const {
  if (instances < 1) throw Error(ErrorCode::kInvalidArgument, "instances must be >= 1");
  if (min_keywords < 1 || min_keywords > max_keywords) {
    throw Error(ErrorCode::kInvalidArgument, "need 1 <= min_keywords <= max_keywords");
  }
  if (max_keywords > kOracleMaxKeywords) {
    throw Error(ErrorCode::kTooLarge, "oracle supports at most 12 keywords");
  }
  if (t < 1) throw Error(ErrorCode::kInvalidArgument, "scenario count must be >= 1");
  if (!(alpha > 0.5 && alpha < 1.0)) throw Error(ErrorCode::kOutOfRange, "alpha must lie in (0.5, 1)");
}

std::vector<OracleCase> run_oracle_check(const OracleConfig& cfg) {
  cfg.validate();
  std::vector<OracleCase> out;
  const std::size_t span = cfg.max_keywords - cfg.min_keywords + 1;
  for (std::size_t i = 0; i < cfg.instances; ++i) {
    OracleCase c;
    c.seed = mix64(cfg.seed ^ (0x0c0ffeeULL + i));
    c.keywords = cfg.min_keywords + static_cast<std::size_t>(c.seed % span);
    const auto inst = random_instance(c.seed, c.keywords, cfg.t);
    SolverConfig sc;
    sc.budget = inst.budget;
    sc.alpha = cfg.alpha;
    sc.t = cfg.t;
    c.budget = inst.budget;
    const auto oracle = brute_force_oracle(inst.options, inst.scenarios, sc);
    const auto res = solve_bb_ksm(inst.options, inst.scenarios, sc);
    const auto moments = cost_moments(inst.options, inst.scenarios);
    const auto profit = option_expected_profit(inst.options, inst.scenarios);
    c.oracle_objective = oracle.objective;
    c.solver_objective = res.incumbent.objective;
    c.solver_truncated = res.stats.truncated;
    c.root_bound = relaxation_bound({}, inst.options, moments, profit, sc);
    out.push_back(c);
  }
  return out;
}

}  // namespace kwtarget
