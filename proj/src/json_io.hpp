#pragma once

// JSON forms of configurations and results. Private to the library and its
// tests; the public surface passes these around as strings.

#include <map>
#include <string>

#include <json.hpp>

#include "kwtarget/dataset.hpp"
#include "kwtarget/imputation.hpp"
#include "kwtarget/pipeline.hpp"
#include "kwtarget/synthetic.hpp"

namespace kwtarget::json_io {

using nlohmann::json;

json parse(std::string_view text);

struct EstimateOptions {
  GibbsConfig gibbs;
  unsigned threads = 1;
};

EstimateOptions estimate_from_json(const json& j);
SyntheticSpec synthetic_from_json(const json& j);
RunConfig run_from_json(const json& j);
OracleConfig oracle_from_json(const json& j);

json to_json(const DatasetSummary& s);
json to_json(const std::vector<GroupTruth>& truth);
json to_json(const StrategyReport& r);
json to_json(const std::vector<OracleCase>& cases, const OracleConfig& cfg);

// File name -> CSV content for the four figure-style tables, built from an
// array of report objects.
std::map<std::string, std::string> collate(const json& reports);

// report_<STRATEGY>_B<budget>.json
std::string report_file_name(const json& report);

}  // namespace kwtarget::json_io
