#include "json_io.hpp"

#include <algorithm>
#include <cstdio>
#include <initializer_list>
#include <set>
#include <tuple>

#include "kwtarget/error.hpp"

namespace kwtarget::json_io {

namespace {

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, what);
}

void only_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) bad(std::string(where) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      bad(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(std::string("'") + key + "' has the wrong type");
  }
}

void read_count(const json& j, const char* key, std::size_t& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0)) {
    bad(std::string("'") + key + "' must be a non-negative integer");
  }
  out = v.get<std::size_t>();
}

void read_int(const json& j, const char* key, int& out) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number_integer()) bad(std::string("'") + key + "' must be an integer");
  out = j.at(key).get<int>();
}

void read_seed(const json& j, std::uint64_t& out) {
  if (!j.contains("seed")) return;
  const auto& v = j.at("seed");
  if (v.is_number_unsigned()) {
    out = v.get<std::uint64_t>();
  } else if (v.is_number_integer() && v.get<long long>() >= 0) {
    out = static_cast<std::uint64_t>(v.get<long long>());
  } else {
    bad("'seed' must be a non-negative integer");
  }
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mat_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    a.push_back(std::move(row));
  }
  return a;
}

MvnParams mvn_from(const json& j) {
  only_keys(j, {"mean", "cov"}, "truth family");
  std::vector<double> mean;
  std::vector<std::vector<double>> cov;
  read(j, "mean", mean);
  read(j, "cov", cov);
  if (mean.size() != 3 || cov.size() != 3) bad("truth mean must have 3 entries and cov 3 rows");
  MvnParams p{Vector(3), Matrix(3, 3)};
  for (int i = 0; i < 3; ++i) {
    p.mean(i) = mean[static_cast<std::size_t>(i)];
    if (cov[static_cast<std::size_t>(i)].size() != 3) bad("truth cov must be 3x3");
    for (int k = 0; k < 3; ++k) p.cov(i, k) = cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  cholesky(p.cov);
  return p;
}

std::string num(const json& v) { return format_number(v.get<double>()); }

}  // namespace

json parse(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("invalid JSON: ") + e.what());
  }
}

EstimateOptions estimate_from_json(const json& j) {
  only_keys(j, {"iterations", "burn_in", "thinning", "seed", "epsilon", "threads"}, "estimate config");
  EstimateOptions o;
  o.gibbs.store_imputed = false;
  read_int(j, "iterations", o.gibbs.iterations);
  read_int(j, "burn_in", o.gibbs.burn_in);
  read_int(j, "thinning", o.gibbs.thinning);
  read_seed(j, o.gibbs.seed);
  read(j, "epsilon", o.gibbs.epsilon);
  std::size_t threads = 1;
  read_count(j, "threads", threads);
  o.threads = static_cast<unsigned>(std::max<std::size_t>(1, threads));
  o.gibbs.validate();
  return o;
}

SyntheticSpec synthetic_from_json(const json& j) {
  only_keys(j, {"adgroups", "keywords_per_group", "days", "seed", "start", "mean_impressions",
                "mean_ctr", "favored_lift", "group_spread", "variance_range", "correlation_range",
                "vpc_range", "cpc_range", "type_probs", "truth"},
            "synthetic spec");
  SyntheticSpec s;
  read_int(j, "adgroups", s.adgroups);
  read_int(j, "keywords_per_group", s.keywords_per_group);
  read_int(j, "days", s.days);
  read_seed(j, s.seed);
  if (j.contains("start")) {
    const auto text = j.at("start").get<std::string>();
    int y = 0, m = 0, d = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%d", &y, &m, &d) != 3) bad("'start' must be YYYY-MM-DD");
    s.start = Date{y, m, d};
  }
  read(j, "mean_impressions", s.mean_impressions);
  read(j, "mean_ctr", s.mean_ctr);
  read(j, "favored_lift", s.favored_lift);
  read(j, "group_spread", s.group_spread);
  read(j, "variance_range", s.variance_range);
  read(j, "correlation_range", s.correlation_range);
  read(j, "vpc_range", s.vpc_range);
  read(j, "cpc_range", s.cpc_range);
  read(j, "type_probs", s.type_probs);
  if (j.contains("truth")) {
    if (!j.at("truth").is_array()) bad("'truth' must be an array");
    for (const auto& g : j.at("truth")) {
      only_keys(g, {"adgroup_id", "favored", "impressions", "ctr"}, "truth entry");
      GroupTruth t;
      read(g, "adgroup_id", t.adgroup_id);
      if (g.contains("favored")) {
        const auto m = parse_match(g.at("favored").get<std::string>());
        if (!m) bad("'favored' must be exact, phrase or broad");
        t.favored = *m;
      }
      if (!g.contains("impressions") || !g.contains("ctr")) bad("truth entry needs impressions and ctr");
      t.impressions = mvn_from(g.at("impressions"));
      t.ctr = mvn_from(g.at("ctr"));
      s.truth.push_back(std::move(t));
    }
  }
  s.validate();
  return s;
}

RunConfig run_from_json(const json& j) {
  only_keys(j, {"budgets", "alpha", "t", "eval_t", "seed", "node_limit", "bound_tolerance", "tau",
                "strategies"},
            "run config");
  RunConfig c;
  read(j, "budgets", c.budgets);
  read(j, "alpha", c.alpha);
  read_count(j, "t", c.t);
  read_count(j, "eval_t", c.eval_t);
  read_seed(j, c.seed);
  read_count(j, "node_limit", c.node_limit);
  read(j, "bound_tolerance", c.bound_tolerance);
  read(j, "tau", c.tau);
  if (j.contains("strategies")) {
    std::vector<std::string> names;
    read(j, "strategies", names);
    c.strategies.clear();
    for (const auto& n : names) {
      const auto s = parse_strategy(n);
      if (!s) bad("unknown strategy '" + n + "'");
      c.strategies.push_back(*s);
    }
  }
  c.validate();
  return c;
}

OracleConfig oracle_from_json(const json& j) {
  only_keys(j, {"instances", "min_keywords", "max_keywords", "t", "alpha", "seed"}, "oracle config");
  OracleConfig c;
  read_count(j, "instances", c.instances);
  read_count(j, "min_keywords", c.min_keywords);
  read_count(j, "max_keywords", c.max_keywords);
  read_count(j, "t", c.t);
  read(j, "alpha", c.alpha);
  read_seed(j, c.seed);
  c.validate();
  return c;
}

json to_json(const DatasetSummary& s) {
  json by = json::array();
  for (const auto& m : s.by_match) {
    by.push_back({{"match", match_name(m.match)},
                  {"count", m.count},
                  {"proportion_pct", m.proportion_pct},
                  {"impression", {{"mean", m.impression_mean}, {"sd", m.impression_sd}}},
                  {"ctr", {{"mean", m.ctr_mean}, {"sd", m.ctr_sd}}}});
  }
  return {{"records", s.records},
          {"keywords", s.keywords},
          {"adgroups", s.adgroups},
          {"match_types", by},
          {"vpc", {{"mean", s.vpc_mean}, {"sd", s.vpc_sd}}},
          {"cpc", {{"mean", s.cpc_mean}, {"sd", s.cpc_sd}}}};
}

json to_json(const std::vector<GroupTruth>& truth) {
  json a = json::array();
  for (const auto& t : truth) {
    a.push_back({{"adgroup_id", t.adgroup_id},
                 {"favored", match_name(t.favored)},
                 {"impressions", {{"mean", vec_json(t.impressions.mean)}, {"cov", mat_json(t.impressions.cov)}}},
                 {"ctr", {{"mean", vec_json(t.ctr.mean)}, {"cov", mat_json(t.ctr.cov)}}}});
  }
  return a;
}

json to_json(const StrategyReport& r) {
  const auto& rep = r.report;
  json kws = json::array();
  for (const auto& k : rep.keywords) {
    kws.push_back({{"id", k.keyword_id},
                   {"adgroup", k.adgroup_id},
                   {"match", match_name(k.match)},
                   {"exp_profit", k.expected_profit},
                   {"exp_cost", k.expected_cost}});
  }
  json j = {{"budget", rep.budget},
            {"alpha", rep.alpha},
            {"strategy", rep.strategy},
            {"expected_profit", rep.expected_profit},
            {"alpha_hat_out_of_sample", rep.alpha_hat},
            {"expected_profit_in_sample", r.in_sample_profit},
            {"alpha_hat_in_sample", r.in_sample_alpha},
            {"n_selected", rep.n_selected},
            {"match_pct",
             {{"exact", rep.match_share[0]}, {"phrase", rep.match_share[1]}, {"broad", rep.match_share[2]}}},
            {"keywords", kws}};
  if (r.stats) {
    json trace = json::array();
    for (const auto& [node, obj] : r.stats->incumbent_trace) trace.push_back({{"node", node}, {"objective", obj}});
    j["search_stats"] = {{"nodes_explored", r.stats->nodes_explored},
                         {"nodes_pruned", r.stats->nodes_pruned},
                         {"nodes_infeasible", r.stats->nodes_infeasible},
                         {"max_queue", r.stats->max_queue},
                         {"truncated", r.stats->truncated},
                         {"root_bound", r.stats->root_bound},
                         {"incumbent_trace", trace}};
  }
  return j;
}

json to_json(const std::vector<OracleCase>& cases, const OracleConfig& cfg) {
  json a = json::array();
  bool all_equal = true, all_valid = true;
  for (const auto& c : cases) {
    const bool eq = c.objectives_equal();
    const bool valid = c.bound_valid(1e-6);
    all_equal = all_equal && eq;
    all_valid = all_valid && valid;
    a.push_back({{"seed", c.seed},
                 {"keywords", c.keywords},
                 {"budget", c.budget},
                 {"oracle_objective", c.oracle_objective},
                 {"solver_objective", c.solver_objective},
                 {"root_bound", c.root_bound},
                 {"solver_truncated", c.solver_truncated},
                 {"objectives_equal", eq},
                 {"bound_valid", valid}});
  }
  return {{"instances", cfg.instances},
          {"t", cfg.t},
          {"alpha", cfg.alpha},
          {"seed", cfg.seed},
          {"all_objectives_equal", all_equal},
          {"all_bounds_valid", all_valid},
          {"cases", a}};
}

std::string report_file_name(const json& report) {
  return "report_" + report.at("strategy").get<std::string>() + "_B" + num(report.at("budget")) + ".json";
}

std::map<std::string, std::string> collate(const json& reports) {
  if (!reports.is_array()) bad("reports must be an array");
  std::vector<const json*> rows;
  for (const auto& r : reports) {
    for (const char* key : {"strategy", "budget", "expected_profit", "alpha_hat_out_of_sample",
                            "n_selected", "match_pct", "keywords"}) {
      if (!r.contains(key)) throw Error(ErrorCode::kValidationError, std::string("report lacks '") + key + "'");
    }
    if (!parse_strategy(r.at("strategy").get<std::string>())) {
      throw Error(ErrorCode::kValidationError, "report has an unknown strategy");
    }
    rows.push_back(&r);
  }
  auto key = [](const json* r) {
    return std::make_tuple(static_cast<int>(*parse_strategy(r->at("strategy").get<std::string>())),
                           r->at("budget").get<double>());
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const json* a, const json* b) { return key(a) < key(b); });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (key(rows[i]) == key(rows[i - 1])) {
      throw Error(ErrorCode::kValidationError, "two reports share a strategy and budget");
    }
  }

  std::string profit = "strategy,budget,expected_profit,alpha_hat_out_of_sample\n";
  std::string counts = "strategy,budget,n_selected\n";
  std::string pct = "strategy,budget,exact_pct,phrase_pct,broad_pct\n";
  std::string kw = "strategy,budget,keyword_id,adgroup_id,match,exp_profit,exp_cost\n";
  for (const json* r : rows) {
    const std::string head = r->at("strategy").get<std::string>() + "," + num(r->at("budget"));
    profit += head + "," + num(r->at("expected_profit")) + "," + num(r->at("alpha_hat_out_of_sample")) + "\n";
    counts += head + "," + std::to_string(r->at("n_selected").get<std::size_t>()) + "\n";
    const auto& m = r->at("match_pct");
    pct += head;
    for (const char* t : {"exact", "phrase", "broad"}) pct += "," + format_number(100.0 * m.at(t).get<double>());
    pct += "\n";
    for (const auto& k : r->at("keywords")) {
      kw += head + "," + k.at("id").get<std::string>() + "," + k.at("adgroup").get<std::string>() + "," +
            k.at("match").get<std::string>() + "," + num(k.at("exp_profit")) + "," + num(k.at("exp_cost")) + "\n";
    }
  }
  return {{"profit_vs_budget.csv", profit},
          {"keyword_counts.csv", counts},
          {"match_type_pct.csv", pct},
          {"keyword_profit_cost.csv", kw}};
}

}  // namespace kwtarget::json_io
