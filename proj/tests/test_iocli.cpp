#include <doctest.h>

#include <cmath>
#include <set>
#include <string>

#include "helpers.hpp"
#include "json_io.hpp"
#include "kwtarget/dataset.hpp"
#include "kwtarget/pipeline.hpp"
#include "kwtarget/synthetic.hpp"

using namespace kwtarget;
using namespace testing;

namespace {

const std::string kTable4 = std::string(KWT_TEST_DATA) + "/table4.csv";

std::string body(const std::string& rows) { return std::string(kDatasetHeader) + "\n" + rows; }

ErrorCode parse_code(const std::string& rows) {
  return code_of([&] { parse_dataset(body(rows)); });
}

}  // namespace

TEST_CASE("table 4 rows parse to the stated values") {
  const auto recs = parse_dataset_file(kTable4);
  REQUIRE(recs.size() == 9);
  const auto& r = recs.front();
  CHECK(r.day == Date{2012, 6, 13});
  CHECK(r.keyword_id == "keyword-31");
  CHECK(r.adgroup_id == "ad-group-13");
  CHECK(r.match == MatchType::kBroad);
  CHECK(r.impressions == 36);
  CHECK(r.ctr == 0.06);
  CHECK(r.vpc == 50);
  CHECK(r.cpc == 0.31);
  CHECK(recs[6].keyword_id == "keyword-402");
  CHECK(recs[6].match == MatchType::kPhrase);
  CHECK(recs[6].vpc == 75);
  CHECK(recs[8].day == Date{2016, 11, 30});
}

TEST_CASE("table 4 roundtrips byte for byte") {
  const auto text = read_text_file(kTable4);
  CHECK(serialize_dataset(parse_dataset(text)) == text);
}

TEST_CASE("parser tolerates CRLF and a byte-order mark") {
  const auto text = read_text_file(kTable4);
  std::string crlf = "\xEF\xBB\xBF";
  for (char c : text) {
    if (c == '\n') crlf += '\r';
    crlf += c;
  }
  CHECK(serialize_dataset(parse_dataset(crlf)) == text);
}

TEST_CASE("parser errors") {
  SUBCASE("ctr above one") {
    CHECK(parse_code("2012/6/13,k,g,exact,36,1.5,50,0.31\n,,,phrase,-,-,-,-\n,,,broad,-,-,-,-\n") ==
          ErrorCode::kValidationError);
  }
  SUBCASE("negative impressions") {
    CHECK(parse_code("2012/6/13,k,g,exact,-3,0.5,50,0.31\n,,,phrase,-,-,-,-\n,,,broad,-,-,-,-\n") ==
          ErrorCode::kValidationError);
  }
  SUBCASE("malformed number reports line and column") {
    try {
      parse_dataset(body("2012/6/13,k,g,exact,3x,0.5,50,0.31\n,,,phrase,-,-,-,-\n,,,broad,-,-,-,-\n"));
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.column() == 5);
    }
  }
  SUBCASE("partly missing row") {
    CHECK(parse_code("2012/6/13,k,g,exact,3,-,50,0.31\n,,,phrase,-,-,-,-\n,,,broad,-,-,-,-\n") ==
          ErrorCode::kParseError);
  }
  SUBCASE("bad header") {
    CHECK(code_of([] { parse_dataset("day,keyword,adgroup\n"); }) == ErrorCode::kParseError);
  }
  SUBCASE("bad date") {
    CHECK(parse_code("2012-06-13,k,g,exact,3,0.1,50,0.31\n") == ErrorCode::kParseError);
    CHECK(parse_code("2012/2/30,k,g,exact,3,0.1,50,0.31\n") == ErrorCode::kParseError);
  }
  SUBCASE("unknown match type") {
    CHECK(parse_code("2012/6/13,k,g,fuzzy,3,0.1,50,0.31\n") == ErrorCode::kParseError);
  }
  SUBCASE("two observed types on one day") {
    CHECK(parse_code("2012/6/13,k,g,exact,3,0.1,50,0.31\n,,,phrase,4,0.1,50,0.31\n,,,broad,-,-,-,-\n") ==
          ErrorCode::kValidationError);
  }
  SUBCASE("wrong column count") {
    CHECK(parse_code("2012/6/13,k,g,exact,3,0.1,50\n") == ErrorCode::kParseError);
  }
  SUBCASE("leading row without identifiers") {
    CHECK(parse_code(",,,exact,3,0.1,50,0.31\n") == ErrorCode::kParseError);
  }
}

TEST_CASE("format_number is shortest round-trip") {
  CHECK(format_number(0.06) == "0.06");
  CHECK(format_number(36) == "36");
  CHECK(format_number(18.3) == "18.3");
  CHECK(format_number(0.1 + 0.2) == "0.30000000000000004");
  CHECK(std::stod(format_number(1.0 / 3)) == 1.0 / 3);
}

TEST_CASE("summary proportions") {
  const auto recs = parse_dataset(body(
      "2020/1/1,a,g,exact,-,-,-,-\n,,,phrase,-,-,-,-\n,,,broad,10,0.1,2,1\n"
      "2020/1/2,a,g,exact,-,-,-,-\n,,,phrase,-,-,-,-\n,,,broad,20,0.2,2,1\n"
      "2020/1/1,b,g,exact,5,0.3,3,1\n,,,phrase,-,-,-,-\n,,,broad,-,-,-,-\n"));
  const auto s = summarize(recs);
  CHECK(s.records == 3);
  CHECK(s.keywords == 2);
  CHECK(s.adgroups == 1);
  CHECK(s.by_match[0].proportion_pct == doctest::Approx(33.333333));
  CHECK(s.by_match[1].proportion_pct == 0.0);
  CHECK(s.by_match[2].proportion_pct == doctest::Approx(66.666667));
  double total = 0;
  for (const auto& m : s.by_match) total += m.proportion_pct;
  CHECK(std::abs(total - 100.0) <= 0.01);
  CHECK(s.by_match[2].impression_mean == 15.0);
  CHECK(s.by_match[2].impression_sd == doctest::Approx(std::sqrt(50.0)));
  CHECK(s.by_match[0].impression_sd == 0.0);

  const auto one = summarize({recs.front()});
  CHECK(one.vpc_sd == 0.0);
  CHECK(one.by_match[2].ctr_sd == 0.0);
  CHECK(code_of([] { summarize({}); }) == ErrorCode::kEmptyDataset);

  const auto j = json_io::to_json(s);
  CHECK(j.at("match_types").size() == 3);
}

TEST_CASE("table 4 summary proportions sum to 100") {
  const auto s = summarize(parse_dataset_file(kTable4));
  double total = 0;
  for (const auto& m : s.by_match) total += m.proportion_pct;
  CHECK(std::abs(total - 100.0) <= 0.01);
  CHECK(s.by_match[2].proportion_pct == doctest::Approx(100.0 * 6 / 9));
}

TEST_CASE("synthetic campaigns") {
  SyntheticSpec spec;
  spec.seed = 9;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  CHECK(serialize_dataset(a.records) == serialize_dataset(b.records));
  spec.seed = 10;
  CHECK(serialize_dataset(generate_synthetic(spec).records) != serialize_dataset(a.records));

  CHECK(a.records.size() == 5u * 10u * 40u);
  CHECK(a.truth.size() == 5);
  // one observed type per (keyword, day), and it is the keyword's logged type
  std::set<std::tuple<std::string, std::string, long>> seen;
  for (const auto& r : a.records) {
    CHECK(seen.insert({r.adgroup_id, r.keyword_id, r.day.serial()}).second);
    CHECK(r.ctr <= 1.0);
    CHECK(r.impressions >= 0.0);
    CHECK(r.impressions == std::round(r.impressions));
  }
  // type counts follow the 1/3 probabilities within each group
  for (int g = 0; g < 5; ++g) {
    int counts[3] = {0, 0, 0};
    for (std::size_t i = 0; i < a.keywords.size(); ++i) {
      if (a.keywords[i].first == "ad-group-" + std::to_string(g + 1)) ++counts[match_index(a.observed[i])];
    }
    for (int c : counts) CHECK((c == 3 || c == 4));
  }
  CHECK(serialize_dataset(parse_dataset(serialize_dataset(a.records))) == serialize_dataset(a.records));
}

TEST_CASE("synthetic spec validation") {
  SyntheticSpec s;
  s.adgroups = 0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = SyntheticSpec{};
  s.type_probs = {0.5, -0.5, 0.5};
  CHECK_THROWS_AS(s.validate(), Error);
  s = SyntheticSpec{};
  s.mean_ctr = 1.5;
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("configuration JSON") {
  using json_io::json;
  const auto run = json_io::run_from_json(json::parse(R"({"budgets":[5,10],"alpha":0.9,"strategies":["BASE2"]})"));
  CHECK(run.budgets == std::vector<double>{5, 10});
  CHECK(run.alpha == 0.9);
  CHECK(run.strategies == std::vector<Strategy>{Strategy::kBase2});
  CHECK(code_of([] { json_io::run_from_json(json::parse(R"({"budgets":[0]})")); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(code_of([] { json_io::run_from_json(json::parse(R"({"budgets":[5,5]})")); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(code_of([] { json_io::run_from_json(json::parse(R"({"budget":5})")); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { json_io::run_from_json(json::parse(R"({"alpha":"high"})")); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(code_of([] { json_io::parse("{"); }) == ErrorCode::kParseError);

  const auto est = json_io::estimate_from_json(json::parse(R"({"iterations":100,"burn_in":10,"threads":3})"));
  CHECK(est.gibbs.iterations == 100);
  CHECK(est.threads == 3);
  CHECK_FALSE(est.gibbs.store_imputed);

  const auto syn = json_io::synthetic_from_json(json::parse(R"({"adgroups":2,"start":"2020-02-03","seed":4})"));
  CHECK(syn.adgroups == 2);
  CHECK(syn.start == Date{2020, 2, 3});
  CHECK(syn.seed == 4);
}

TEST_CASE("posterior CSV roundtrip") {
  SyntheticSpec spec;
  spec.adgroups = 2;
  spec.keywords_per_group = 3;
  spec.days = 6;
  spec.seed = 2;
  const auto syn = generate_synthetic(spec);
  GibbsConfig g;
  g.iterations = 60;
  g.burn_in = 10;
  g.thinning = 5;
  g.store_imputed = false;
  const auto post = estimate_campaign(syn.records, g);
  const auto text = posterior_to_csv(post);
  const auto back = posterior_from_csv(text, syn.records);
  REQUIRE(back.size() == post.size());
  for (std::size_t i = 0; i < post.size(); ++i) {
    CHECK(back[i].impressions.theta_draws == post[i].impressions.theta_draws);
    CHECK(back[i].ctr.sigma_draws == post[i].ctr.sigma_draws);
  }
  CHECK(posterior_to_csv(back) == text);
  // a posterior without one of the dataset's ad-groups
  const auto first_only = text.substr(0, text.find("ad-group-2"));
  CHECK(code_of([&] { posterior_from_csv(first_only, syn.records); }) == ErrorCode::kMissingPosterior);
}

TEST_CASE("strategy sweep reports agree with their tables") {
  SyntheticSpec spec;
  spec.adgroups = 2;
  spec.keywords_per_group = 4;
  spec.days = 8;
  spec.seed = 3;
  const auto syn = generate_synthetic(spec);
  GibbsConfig g;
  g.iterations = 300;
  g.burn_in = 100;
  g.thinning = 2;
  g.store_imputed = false;
  const auto post = estimate_campaign(syn.records, g);
  RunConfig cfg;
  cfg.budgets = {20, 40};
  cfg.t = 200;
  cfg.eval_t = 500;
  cfg.strategies = {Strategy::kBbKsm, Strategy::kBase5, Strategy::kBase7};
  const auto reports = run_strategies(syn.records, post, cfg);
  REQUIRE(reports.size() == 6);
  CHECK(reports[0].stats.has_value());
  CHECK_FALSE(reports[2].stats.has_value());
  CHECK(reports[0].report.strategy == "BBKSM");
  CHECK(reports[0].report.budget == 20);
  CHECK(reports[0].in_sample_profit <= reports[1].in_sample_profit);

  // the profit table carries evaluate_solution's value to the last digit
  const auto built = build_options(syn.records, post, cfg.eval_t, cfg.eval_seed());
  const auto direct = evaluate_solution(reports[1].decision, built.scenarios, built.options, 40, cfg.alpha);
  CHECK(direct.expected_profit == reports[1].report.expected_profit);

  json_io::json arr = json_io::json::array();
  for (const auto& r : reports) arr.push_back(json_io::to_json(r));
  const auto round = json_io::json::parse(arr.dump());
  const auto tables = json_io::collate(round);
  REQUIRE(tables.count("profit_vs_budget.csv") == 1);
  const auto& profit = tables.at("profit_vs_budget.csv");
  CHECK(profit.find("BBKSM,40," + format_number(reports[1].report.expected_profit) + ",") != std::string::npos);
  CHECK(tables.at("keyword_counts.csv").rfind("strategy,budget,n_selected\n", 0) == 0);
  CHECK(json_io::report_file_name(round[1]) == "report_BBKSM_B40.json");

  // the same reports twice cannot be collated
  json_io::json dup = round;
  dup.push_back(round[0]);
  CHECK(code_of([&] { json_io::collate(dup); }) == ErrorCode::kValidationError);

  // run twice: identical JSON
  json_io::json again = json_io::json::array();
  for (const auto& r : run_strategies(syn.records, post, cfg)) again.push_back(json_io::to_json(r));
  CHECK(again.dump() == arr.dump());
}

TEST_CASE("oracle check") {
  OracleConfig c;
  c.instances = 5;
  c.max_keywords = 6;
  c.t = 200;
  c.seed = 4;
  const auto cases = run_oracle_check(c);
  REQUIRE(cases.size() == 5);
  for (const auto& k : cases) {
    CHECK(k.objectives_equal());
    CHECK(k.bound_valid(1e-6));
    CHECK(k.keywords >= 2);
    CHECK(k.keywords <= 6);
  }
}
