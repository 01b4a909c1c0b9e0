#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "kwtarget/records.hpp"

namespace kwtarget {

inline constexpr std::string_view kDatasetHeader =
    "day,keyword_id,adgroup_id,match_type,impression,ctr,vpc,cpc";

// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

// Table-4 layout: every (day, keyword, ad-group) triple is a block of rows,
// one per match type, with "-" in all four index cells of unobserved types.
// Empty day/keyword/ad-group cells repeat the previous row's value. Exactly
// one match type per triple may carry values.
std::vector<PerformanceRecord> parse_dataset(std::string_view text);
std::vector<PerformanceRecord> parse_dataset_file(const std::string& path);

// Canonical layout: identifiers on the first row of each block only, rows in
// exact/phrase/broad order, blocks in order of first appearance.
std::string serialize_dataset(const std::vector<PerformanceRecord>& records);
void write_dataset_file(const std::string& path,
                        const std::vector<PerformanceRecord>& records);

struct MatchSummary {
  MatchType match = MatchType::kExact;
  std::size_t count = 0;
  double proportion_pct = 0.0;
  double impression_mean = 0.0, impression_sd = 0.0;
  double ctr_mean = 0.0, ctr_sd = 0.0;
};

struct DatasetSummary {
  std::size_t records = 0;
  std::size_t keywords = 0;
  std::size_t adgroups = 0;
  std::array<MatchSummary, 3> by_match;
  // pooled over match types
  double vpc_mean = 0.0, vpc_sd = 0.0;
  double cpc_mean = 0.0, cpc_sd = 0.0;
};

// Sample standard deviations; a single value has SD 0. Throws EmptyDataset.
DatasetSummary summarize(const std::vector<PerformanceRecord>& records);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace kwtarget
