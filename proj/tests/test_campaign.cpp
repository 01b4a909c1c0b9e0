#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "kwtarget/imputation.hpp"
#include "kwtarget/synthetic.hpp"

using namespace kwtarget;
using namespace testing;

namespace {

struct Fixture {
  std::vector<PerformanceRecord> records;
  std::vector<AdGroupPosterior> posterior;
};

const Fixture& small_campaign() {
  static const Fixture f = [] {
    SyntheticSpec spec;
    spec.adgroups = 2;
    spec.keywords_per_group = 4;
    spec.days = 10;
    spec.seed = 17;
    Fixture out;
    out.records = generate_synthetic(spec).records;
    GibbsConfig g;
    g.iterations = 400;
    g.burn_in = 100;
    g.thinning = 3;
    g.seed = 17;
    g.store_imputed = false;
    out.posterior = estimate_campaign(out.records, g);
    return out;
  }();
  return f;
}

TargetingDecision all_exact(std::size_t n) {
  TargetingDecision d(n);
  for (std::size_t k = 0; k < n; ++k) d.set(k, MatchType::kExact);
  return d;
}

}  // namespace

TEST_CASE("all match types gives three options per keyword") {
  const auto o = OptionSet::all_match_types({keyword("a", 1, 0.5), keyword("b", 1, 0.5)});
  CHECK(o.size() == 6);
  CHECK(o.find(1, MatchType::kPhrase).value() == 4);
  CHECK_FALSE(o.find(0, MatchType::kNone).has_value());
}

TEST_CASE("option sets reject duplicates and dangling keywords") {
  CHECK(code_of([] {
          OptionSet({keyword("a", 1, 0.5)}, {{0, MatchType::kExact}, {0, MatchType::kExact}});
        }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { OptionSet({keyword("a", 1, 0.5)}, {{1, MatchType::kExact}}); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("decisions from codes") {
  const auto d = TargetingDecision::from_codes({0, 1, 3, 2});
  CHECK(d.selected_count() == 3);
  CHECK(d[2] == MatchType::kBroad);
  CHECK_THROWS_AS(TargetingDecision::from_codes({4}), Error);
  CHECK_THROWS_AS(TargetingDecision::from_codes({-1}), Error);
}

TEST_CASE("profit and cost arithmetic") {
  const auto opts = exact_only({keyword("k", 2.0, 0.5)});
  const auto sc = constant_scenarios({100}, {0.1}, 3);
  const auto d = all_exact(1);
  CHECK(profit(d, 0, opts, sc) == doctest::Approx(15.0).epsilon(1e-15));
  CHECK(cost(d, 0, opts, sc) == doctest::Approx(5.0).epsilon(1e-15));
  const TargetingDecision none(1);
  CHECK(profit(none, 0, opts, sc) == 0.0);
  CHECK(cost(none, 0, opts, sc) == 0.0);
  CHECK(expected_profit(none, sc, opts) == 0.0);
}

TEST_CASE("zero margin gives zero profit") {
  const auto opts = exact_only({keyword("a", 0.7, 0.7), keyword("b", 1.3, 1.3)});
  const auto sc = constant_scenarios({50, 80}, {0.2, 0.1}, 4);
  CHECK(profit(all_exact(2), 2, opts, sc) == 0.0);
}

TEST_CASE("cost and profit are additive over disjoint selections") {
  const auto opts = OptionSet::all_match_types({keyword("a", 3, 1), keyword("b", 2, 0.4), keyword("c", 5, 2)});
  RngStream rng(1, 0);
  ScenarioSet sc;
  sc.t = 20;
  for (std::size_t o = 0; o < opts.size(); ++o) {
    sc.impressions.emplace_back();
    sc.ctr.emplace_back();
    for (std::size_t s = 0; s < sc.t; ++s) {
      sc.impressions.back().push_back(10 + 90 * rng.uniform());
      sc.ctr.back().push_back(rng.uniform());
    }
  }
  const auto a = TargetingDecision::from_codes({1, 0, 3});
  const auto b = TargetingDecision::from_codes({0, 2, 0});
  const auto u = TargetingDecision::from_codes({1, 2, 3});
  for (std::size_t s = 0; s < sc.t; ++s) {
    CHECK(cost(u, s, opts, sc) == doctest::Approx(cost(a, s, opts, sc) + cost(b, s, opts, sc)));
    CHECK(profit(u, s, opts, sc) == doctest::Approx(profit(a, s, opts, sc) + profit(b, s, opts, sc)));
  }
  // the canonical objective equals the scenario mean of profit
  const auto pi = option_expected_profit(opts, sc);
  CHECK(decision_objective(u, opts, pi) == doctest::Approx(expected_profit(u, sc, opts)).epsilon(1e-12));
}

TEST_CASE("expected profit is the scenario mean") {
  const auto opts = exact_only({keyword("k", 2.0, 1.0)});
  ScenarioSet one = constant_scenarios({30}, {0.5}, 1);
  CHECK(expected_profit(all_exact(1), one, opts) == doctest::Approx(15.0));
  ScenarioSet two = constant_scenarios({10}, {1.0}, 2);
  two.impressions[0][1] = 20;
  CHECK(expected_profit(all_exact(1), two, opts) == doctest::Approx(15.0));
}

TEST_CASE("chance probability") {
  const auto opts = exact_only({keyword("k", 2.0, 0.5)});
  SUBCASE("empty decision is always within budget") {
    CHECK(chance_probability(TargetingDecision(1), constant_scenarios({100}, {0.1}, 5), opts, 1.0) == 1.0);
  }
  SUBCASE("degenerate scenarios over budget") {
    CHECK(chance_probability(all_exact(1), constant_scenarios({100}, {0.1}, 5), opts, 4.0) == 0.0);
  }
  SUBCASE("budget at the median of distinct costs") {
    const std::size_t t = 101;
    ScenarioSet sc = constant_scenarios({0}, {1.0}, t);
    for (std::size_t s = 0; s < t; ++s) sc.impressions[0][s] = static_cast<double>((s * 37) % t) + 1.0;
    // costs are 0.5, 1.0, ..., 50.5; the median is 25.5
    CHECK(chance_probability(all_exact(1), sc, opts, 25.5) == doctest::Approx((t + 1) / (2.0 * t)));
  }
  SUBCASE("monotone in the budget") {
    ScenarioSet sc = constant_scenarios({0}, {0.3}, 200);
    RngStream rng(2, 0);
    for (auto& v : sc.impressions[0]) v = 200 * rng.uniform();
    double last = 0.0;
    for (double b = 0; b < 40; b += 0.37) {
      const double a = chance_probability(all_exact(1), sc, opts, b);
      CHECK(a >= last);
      last = a;
    }
  }
}

TEST_CASE("cost moments") {
  const auto opts = exact_only({keyword("a", 2.0, 1.0), keyword("b", 2.0, 2.0)});
  ScenarioSet sc = constant_scenarios({7, 2}, {1.0, 1.0}, 2);
  sc.impressions[1][1] = 4;
  const auto m = cost_moments(opts, sc);
  CHECK(m.mean[0] == 7.0);
  CHECK(m.variance[0] == 0.0);
  // costs 2*2=4 and 4*2=8 -> mean 6, unbiased variance 8; at cpc 1 it is 3 and 2
  CHECK(m.mean[1] == doctest::Approx(6.0));
  CHECK(m.variance[1] == doctest::Approx(8.0));

  const auto half = exact_only({keyword("a", 2.0, 1.0), keyword("b", 2.0, 1.0)});
  const auto m2 = cost_moments(half, sc);
  CHECK(m2.mean[1] == doctest::Approx(3.0));
  CHECK(m2.variance[1] == doctest::Approx(2.0));
  CHECK(m.mean[1] == doctest::Approx(2 * m2.mean[1]));
  CHECK(m.variance[1] == doctest::Approx(4 * m2.variance[1]));

  CHECK(code_of([&] { cost_moments(opts, constant_scenarios({1, 1}, {1, 1}, 1)); }) ==
        ErrorCode::kInsufficientScenarios);
}

TEST_CASE("evaluate_solution") {
  const auto opts = OptionSet::all_match_types({keyword("a", 3, 1), keyword("b", 2, 0.5), keyword("c", 4, 1)});
  const auto sc = constant_scenarios(std::vector<double>(9, 10.0), std::vector<double>(9, 0.5), 10);
  SUBCASE("empty decision") {
    const auto r = evaluate_solution(TargetingDecision(3), sc, opts, 100, 0.95, "X");
    CHECK(r.expected_profit == 0.0);
    CHECK(r.alpha_hat == 1.0);
    CHECK(r.n_selected == 0);
    CHECK(r.match_share == std::array<double, 3>{0, 0, 0});
    CHECK(r.keywords.empty());
  }
  SUBCASE("one keyword per type") {
    const auto d = TargetingDecision::from_codes({1, 2, 3});
    const auto r = evaluate_solution(d, sc, opts, 100, 0.95, "X");
    CHECK(r.n_selected == 3);
    for (double s : r.match_share) CHECK(s == doctest::Approx(1.0 / 3));
    CHECK(r.expected_profit == expected_profit(d, sc, opts));
    REQUIRE(r.keywords.size() == 3);
    CHECK(r.keywords[1].match == MatchType::kPhrase);
    CHECK(r.keywords[1].expected_profit == doctest::Approx(7.5));
    CHECK(r.keywords[1].expected_cost == doctest::Approx(2.5));
  }
}

TEST_CASE("scenarios from a posterior") {
  const auto& f = small_campaign();
  const auto opts = make_option_set(f.posterior);
  CHECK(opts.keyword_count() == 8);
  CHECK(opts.size() == 24);
  const auto a = sample_scenarios(opts, f.posterior, 300, 5);
  const auto b = sample_scenarios(opts, f.posterior, 300, 5);
  CHECK(a.impressions == b.impressions);
  CHECK(a.ctr == b.ctr);
  const auto c = sample_scenarios(opts, f.posterior, 300, 6);
  CHECK(a.impressions != c.impressions);
  for (std::size_t o = 0; o < opts.size(); ++o) {
    for (std::size_t s = 0; s < a.t; ++s) {
      REQUIRE(std::isfinite(a.impressions[o][s]));
      REQUIRE(a.impressions[o][s] >= 0.0);
      REQUIRE(a.ctr[o][s] >= 0.0);
      REQUIRE(a.ctr[o][s] <= 1.0);
    }
  }
  // common random numbers: reproducible objective, alpha and moments
  const auto d = all_exact(opts.keyword_count());
  CHECK(expected_profit(d, a, opts) == expected_profit(d, b, opts));
  CHECK(chance_probability(d, a, opts, 300) == chance_probability(d, b, opts, 300));
  CHECK(cost_moments(opts, a).variance == cost_moments(opts, b).variance);
}

TEST_CASE("build_options needs a posterior for every keyword") {
  const auto& f = small_campaign();
  auto recs = f.records;
  recs.front().adgroup_id = "unknown";
  CHECK(code_of([&] { build_options(recs, f.posterior, 10, 1); }) == ErrorCode::kMissingPosterior);
  const auto built = build_options(f.records, f.posterior, 10, 1);
  CHECK(built.scenarios.t == 10);
  CHECK(built.options.size() == 24);
}
