#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "kwtarget/kwtarget.h"

namespace {

struct Str {
  char* p = nullptr;
  ~Str() { kwt_string_free(p); }
  std::string s() const { return p ? p : ""; }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmall = R"({"adgroups":2,"keywords_per_group":3,"days":6,"seed":5})";
const char* kQuickGibbs = R"({"iterations":120,"burn_in":20,"thinning":2,"seed":5})";

}  // namespace

TEST_CASE("status names and classes") {
  CHECK(std::strcmp(kwt_status_name(KWT_OK), "Ok") == 0);
  CHECK(std::strcmp(kwt_status_name(KWT_PARSE_ERROR), "ParseError") == 0);
  CHECK(std::strcmp(kwt_status_name(KWT_IO), "IoError") == 0);
  CHECK(kwt_status_is_validation(KWT_OUT_OF_RANGE));
  CHECK(kwt_status_is_validation(KWT_PARSE_ERROR));
  CHECK_FALSE(kwt_status_is_validation(KWT_IO));
  CHECK_FALSE(kwt_status_is_validation(KWT_DIVERGENT_CHAIN));
  CHECK(std::strlen(kwt_version()) > 0);
}

TEST_CASE("parse errors carry a position") {
  kwt_dataset* ds = nullptr;
  const char* text = "day,keyword_id,adgroup_id,match_type,impression,ctr,vpc,cpc\n2012/6/13,k,g,exact,x,0.1,1,1\n";
  CHECK(kwt_dataset_parse(text, &ds) == KWT_PARSE_ERROR);
  CHECK(ds == nullptr);
  const std::string err = kwt_last_error();
  CHECK(err.find("\"code\":\"ParseError\"") != std::string::npos);
  CHECK(err.find("\"line\":2") != std::string::npos);
  CHECK(err.find("\"column\":5") != std::string::npos);
}

TEST_CASE("null arguments are rejected") {
  CHECK(kwt_dataset_parse(nullptr, nullptr) == KWT_INVALID_ARGUMENT);
  CHECK(kwt_run(nullptr, nullptr, nullptr, nullptr) == KWT_INVALID_ARGUMENT);
  CHECK(kwt_dataset_record_count(nullptr) == 0);
  kwt_dataset_free(nullptr);
  kwt_posterior_free(nullptr);
  kwt_string_free(nullptr);
}

TEST_CASE("bad configuration JSON") {
  kwt_dataset* ds = nullptr;
  CHECK(kwt_synthesize("{not json", &ds, nullptr) == KWT_PARSE_ERROR);
  CHECK(kwt_synthesize(R"({"colour":"red"})", &ds, nullptr) == KWT_INVALID_ARGUMENT);
  CHECK(std::string(kwt_last_error()).find("colour") != std::string::npos);
}

TEST_CASE("synthesize, estimate, run, collate") {
  kwt_dataset* ds = nullptr;
  Str truth;
  REQUIRE(kwt_synthesize(kSmall, &ds, &truth.p) == KWT_OK);
  CHECK(std::string(kwt_last_error()) == "{}");
  CHECK(kwt_dataset_record_count(ds) == 36);
  CHECK(truth.s().find("\"adgroups\"") != std::string::npos);

  Str csv;
  REQUIRE(kwt_dataset_serialize(ds, &csv.p) == KWT_OK);
  kwt_dataset* again = nullptr;
  REQUIRE(kwt_dataset_parse(csv.p, &again) == KWT_OK);
  Str csv2;
  REQUIRE(kwt_dataset_serialize(again, &csv2.p) == KWT_OK);
  CHECK(csv.s() == csv2.s());
  kwt_dataset_free(again);

  Str summary;
  REQUIRE(kwt_dataset_summary(ds, &summary.p) == KWT_OK);
  CHECK(summary.s().find("\"match_types\"") != std::string::npos);

  kwt_posterior* post = nullptr;
  REQUIRE(kwt_estimate(ds, kQuickGibbs, &post) == KWT_OK);
  CHECK(kwt_posterior_adgroup_count(post) == 2);

  const std::string path = "c_api_posterior.csv";
  REQUIRE(kwt_posterior_save(post, path.c_str()) == KWT_OK);
  kwt_posterior* loaded = nullptr;
  REQUIRE(kwt_posterior_load(path.c_str(), ds, &loaded) == KWT_OK);
  Str p1, p2;
  REQUIRE(kwt_posterior_serialize(post, &p1.p) == KWT_OK);
  REQUIRE(kwt_posterior_serialize(loaded, &p2.p) == KWT_OK);
  CHECK(p1.s() == p2.s());
  CHECK(slurp(path) == p1.s());
  std::remove(path.c_str());

  Str reports;
  const char* run = R"({"budgets":[10,20],"t":100,"eval_t":200,"seed":5,"strategies":["BBKSM","BASE2"]})";
  REQUIRE(kwt_run(ds, loaded, run, &reports.p) == KWT_OK);
  Str reports2;
  REQUIRE(kwt_run(ds, post, run, &reports2.p) == KWT_OK);
  CHECK(reports.s() == reports2.s());
  CHECK(reports.s().find("\"search_stats\"") != std::string::npos);

  Str tables;
  REQUIRE(kwt_report_collate(reports.p, &tables.p) == KWT_OK);
  CHECK(tables.s().find("profit_vs_budget.csv") != std::string::npos);
  CHECK(tables.s().find("match_type_pct.csv") != std::string::npos);

  Str name;
  REQUIRE(kwt_report_file_name(R"({"strategy":"BASE3","budget":250})", &name.p) == KWT_OK);
  CHECK(name.s() == "report_BASE3_B250.json");

  Str bad;
  CHECK(kwt_run(ds, post, R"({"budgets":[0]})", &bad.p) == KWT_INVALID_ARGUMENT);
  CHECK(bad.p == nullptr);
  CHECK(std::string(kwt_last_error()).find("budget must be positive") != std::string::npos);

  kwt_posterior_free(loaded);
  kwt_posterior_free(post);
  kwt_dataset_free(ds);
}

TEST_CASE("posterior load needs every ad-group") {
  kwt_dataset* ds = nullptr;
  REQUIRE(kwt_synthesize(kSmall, &ds, nullptr) == KWT_OK);
  {
    std::ofstream out("c_api_empty_posterior.csv");
    out << "adgroup_id,family,draw_index,theta_1,theta_2,theta_3,sigma_11,sigma_12,sigma_13,sigma_21,sigma_22,"
           "sigma_23,sigma_31,sigma_32,sigma_33\n";
  }
  kwt_posterior* post = nullptr;
  CHECK(kwt_posterior_load("c_api_empty_posterior.csv", ds, &post) == KWT_MISSING_POSTERIOR);
  CHECK(kwt_posterior_load("does/not/exist.csv", ds, &post) == KWT_IO);
  std::remove("c_api_empty_posterior.csv");
  kwt_dataset_free(ds);
}

TEST_CASE("oracle through the C API") {
  Str out;
  REQUIRE(kwt_oracle(R"({"instances":3,"max_keywords":5,"t":100,"seed":1})", &out.p) == KWT_OK);
  CHECK(out.s().find("\"all_objectives_equal\": true") != std::string::npos);
}
