#include "kwtarget/records.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "kwtarget/error.hpp"

namespace kwtarget {

std::string_view match_name(MatchType m) {
  switch (m) {
    case MatchType::kNone: return "none";
    case MatchType::kExact: return "exact";
    case MatchType::kPhrase: return "phrase";
    case MatchType::kBroad: return "broad";
  }
  return "none";
}

std::optional<MatchType> parse_match(std::string_view s) {
  if (s == "exact") return MatchType::kExact;
  if (s == "phrase") return MatchType::kPhrase;
  if (s == "broad") return MatchType::kBroad;
  return std::nullopt;
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::string Date::slashed() const {
  return std::to_string(year) + "/" + std::to_string(month) + "/" +
         std::to_string(day);
}

bool Date::valid() const {
  const std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{static_cast<unsigned>(month)},
                                        std::chrono::day{static_cast<unsigned>(day)}};
  return month >= 1 && day >= 1 && ymd.ok();
}

long Date::serial() const {
  const std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{static_cast<unsigned>(month)},
                                        std::chrono::day{static_cast<unsigned>(day)}};
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

Date Date::from_serial(long days) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  return Date{static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
              static_cast<int>(static_cast<unsigned>(ymd.day()))};
}

void validate_record(const PerformanceRecord& r) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kValidationError,
                "record " + r.day.slashed() + "/" + r.keyword_id + "/" +
                    std::string(match_name(r.match)) + ": " + what);
  };
  if (!r.day.valid()) fail("invalid date");
  if (r.keyword_id.empty() || r.adgroup_id.empty()) fail("empty identifier");
  if (r.match == MatchType::kNone) fail("match type must be exact, phrase or broad");
  if (!std::isfinite(r.impressions) || r.impressions < 0.0) fail("impression must be >= 0");
  if (!std::isfinite(r.ctr) || r.ctr < 0.0 || r.ctr > 1.0) fail("ctr must lie in [0, 1]");
  if (!std::isfinite(r.vpc) || r.vpc < 0.0) fail("vpc must be >= 0");
  if (!std::isfinite(r.cpc) || r.cpc < 0.0) fail("cpc must be >= 0");
}

}  // namespace kwtarget
