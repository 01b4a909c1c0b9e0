#pragma once

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kwtarget {

// Decision context adds kNone (keyword not selected).
enum class MatchType : int { kNone = 0, kExact = 1, kPhrase = 2, kBroad = 3 };

inline constexpr std::array<MatchType, 3> kAllMatchTypes = {
    MatchType::kExact, MatchType::kPhrase, MatchType::kBroad};

// 0 for exact, 1 for phrase, 2 for broad. Undefined for kNone.
inline int match_index(MatchType m) { return static_cast<int>(m) - 1; }
inline MatchType match_from_index(int i) { return static_cast<MatchType>(i + 1); }

std::string_view match_name(MatchType m);
std::optional<MatchType> parse_match(std::string_view s);

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  // YYYY-MM-DD.
  std::string iso() const;
  // YYYY/M/D, the dataset file convention.
  std::string slashed() const;
  bool valid() const;
  // Days since 1970-01-01.
  long serial() const;
  static Date from_serial(long days);
};

// One daily log row for one keyword under one match type.
struct PerformanceRecord {
  Date day;
  std::string keyword_id;
  std::string adgroup_id;
  MatchType match = MatchType::kExact;
  double impressions = 0.0;
  double ctr = 0.0;
  double vpc = 0.0;
  double cpc = 0.0;
};

// Throws ValidationError when a record breaks the non-negativity / ctr <= 1
// invariants.
void validate_record(const PerformanceRecord& r);

}  // namespace kwtarget
