#pragma once

#include <string>
#include <vector>

#include "kwtarget/campaign.hpp"
#include "kwtarget/error.hpp"

namespace testing {

using namespace kwtarget;

inline KeywordInfo keyword(const std::string& id, double vpc, double cpc, const std::string& group = "g") {
  return {id, group, vpc, cpc};
}

// Every scenario of option o has impressions d[o] and ctr c[o].
inline ScenarioSet constant_scenarios(const std::vector<double>& d, const std::vector<double>& c, std::size_t t) {
  ScenarioSet s;
  s.t = t;
  for (std::size_t o = 0; o < d.size(); ++o) {
    s.impressions.emplace_back(t, d[o]);
    s.ctr.emplace_back(t, c[o]);
  }
  return s;
}

// Single-keyword-per-option instance with deterministic clicks: option k is
// keyword k under exact match, cost = clicks * cpc, profit = clicks * (vpc - cpc).
inline OptionSet exact_only(const std::vector<KeywordInfo>& kws) {
  std::vector<KeywordOption> opts;
  for (std::size_t k = 0; k < kws.size(); ++k) opts.push_back({k, MatchType::kExact});
  return OptionSet(kws, opts);
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(-1);
}

}  // namespace testing
