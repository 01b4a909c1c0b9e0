#include "kwtarget/kwtarget.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "json_io.hpp"
#include "kwtarget/dataset.hpp"
#include "kwtarget/error.hpp"
#include "kwtarget/imputation.hpp"
#include "kwtarget/pipeline.hpp"
#include "kwtarget/synthetic.hpp"

struct kwt_dataset {
  std::vector<kwtarget::PerformanceRecord> records;
};

struct kwt_posterior {
  std::vector<kwtarget::AdGroupPosterior> groups;
};

namespace {

using kwtarget::ErrorCode;
using kwtarget::json_io::json;

thread_local std::string g_last_error = "{}";

kwt_status to_status(ErrorCode c) { return static_cast<kwt_status>(static_cast<int>(c) + 1); }

void set_error(kwt_status status, const std::string& message, const json& extra = json::object()) {
  json e = {{"code", kwt_status_name(status)}, {"message", message}};
  for (const auto& [k, v] : extra.items()) e[k] = v;
  g_last_error = json{{"error", e}}.dump();
}

template <class F>
kwt_status guarded(F&& body) {
  try {
    body();
    g_last_error = "{}";
    return KWT_OK;
  } catch (const kwtarget::ParseError& e) {
    const auto s = to_status(e.code());
    set_error(s, e.what(), {{"line", e.line()}, {"column", e.column()}});
    return s;
  } catch (const kwtarget::Error& e) {
    const auto s = to_status(e.code());
    set_error(s, e.what());
    return s;
  } catch (const std::bad_alloc&) {
    set_error(KWT_INTERNAL, "out of memory");
    return KWT_INTERNAL;
  } catch (const std::exception& e) {
    set_error(KWT_INTERNAL, e.what());
    return KWT_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw kwtarget::Error(ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

json config_or_empty(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  return kwtarget::json_io::parse(text);
}

}  // namespace

extern "C" {

const char* kwt_version(void) { return "1.0.0"; }

const char* kwt_status_name(kwt_status status) {
  if (status == KWT_OK) return "Ok";
  if (status == KWT_INTERNAL) return "Internal";
  const int c = static_cast<int>(status) - 1;
  if (c < 0 || c > static_cast<int>(ErrorCode::kIo)) return "Unknown";
  return kwtarget::error_code_name(static_cast<ErrorCode>(c));
}

int kwt_status_is_validation(kwt_status status) {
  if (status == KWT_OK || status == KWT_INTERNAL) return 0;
  const int c = static_cast<int>(status) - 1;
  if (c < 0 || c > static_cast<int>(ErrorCode::kIo)) return 0;
  return kwtarget::is_validation_error(static_cast<ErrorCode>(c)) ? 1 : 0;
}

const char* kwt_last_error(void) { return g_last_error.c_str(); }

void kwt_string_free(char* s) { std::free(s); }

kwt_status kwt_dataset_load(const char* path, kwt_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new kwt_dataset{kwtarget::parse_dataset_file(path)};
  });
}

kwt_status kwt_dataset_parse(const char* text, kwt_dataset** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new kwt_dataset{kwtarget::parse_dataset(text)};
  });
}

kwt_status kwt_dataset_save(const kwt_dataset* ds, const char* path) {
  return guarded([&] {
    need(ds, "dataset");
    need(path, "path");
    kwtarget::write_dataset_file(path, ds->records);
  });
}

kwt_status kwt_dataset_serialize(const kwt_dataset* ds, char** out) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    *out = dup(kwtarget::serialize_dataset(ds->records));
  });
}

kwt_status kwt_dataset_summary(const kwt_dataset* ds, char** out_json) {
  return guarded([&] {
    need(ds, "dataset");
    need(out_json, "out");
    *out_json = dup(kwtarget::json_io::to_json(kwtarget::summarize(ds->records)).dump(2));
  });
}

size_t kwt_dataset_record_count(const kwt_dataset* ds) { return ds == nullptr ? 0 : ds->records.size(); }

void kwt_dataset_free(kwt_dataset* ds) { delete ds; }

kwt_status kwt_synthesize(const char* spec_json, kwt_dataset** out, char** out_truth_json) {
  return guarded([&] {
    need(out, "out");
    const auto spec = kwtarget::json_io::synthetic_from_json(config_or_empty(spec_json));
    auto syn = kwtarget::generate_synthetic(spec);
    std::string truth;
    if (out_truth_json != nullptr) {
      json t = {{"seed", spec.seed}, {"adgroups", kwtarget::json_io::to_json(syn.truth)}};
      json obs = json::array();
      for (std::size_t i = 0; i < syn.keywords.size(); ++i) {
        obs.push_back({{"adgroup_id", syn.keywords[i].first},
                       {"keyword_id", syn.keywords[i].second},
                       {"observed", kwtarget::match_name(syn.observed[i])}});
      }
      t["keywords"] = obs;
      truth = t.dump(2);
    }
    auto* ds = new kwt_dataset{std::move(syn.records)};
    if (out_truth_json != nullptr) {
      try {
        *out_truth_json = dup(truth);
      } catch (...) {
        delete ds;
        throw;
      }
    }
    *out = ds;
  });
}

kwt_status kwt_estimate(const kwt_dataset* ds, const char* config_json, kwt_posterior** out) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    const auto opt = kwtarget::json_io::estimate_from_json(config_or_empty(config_json));
    *out = new kwt_posterior{kwtarget::estimate_campaign(ds->records, opt.gibbs, opt.threads)};
  });
}

kwt_status kwt_posterior_save(const kwt_posterior* post, const char* path) {
  return guarded([&] {
    need(post, "posterior");
    need(path, "path");
    kwtarget::write_text_file(path, kwtarget::posterior_to_csv(post->groups));
  });
}

kwt_status kwt_posterior_serialize(const kwt_posterior* post, char** out) {
  return guarded([&] {
    need(post, "posterior");
    need(out, "out");
    *out = dup(kwtarget::posterior_to_csv(post->groups));
  });
}

kwt_status kwt_posterior_load(const char* path, const kwt_dataset* ds, kwt_posterior** out) {
  return guarded([&] {
    need(path, "path");
    need(ds, "dataset");
    need(out, "out");
    *out = new kwt_posterior{kwtarget::posterior_from_csv(kwtarget::read_text_file(path), ds->records)};
  });
}

size_t kwt_posterior_adgroup_count(const kwt_posterior* post) {
  return post == nullptr ? 0 : post->groups.size();
}

void kwt_posterior_free(kwt_posterior* post) { delete post; }

kwt_status kwt_run(const kwt_dataset* ds, const kwt_posterior* post, const char* config_json,
                   char** out_reports_json) {
  return guarded([&] {
    need(ds, "dataset");
    need(post, "posterior");
    need(out_reports_json, "out");
    const auto cfg = kwtarget::json_io::run_from_json(config_or_empty(config_json));
    const auto reports = kwtarget::run_strategies(ds->records, post->groups, cfg);
    json a = json::array();
    for (const auto& r : reports) a.push_back(kwtarget::json_io::to_json(r));
    *out_reports_json = dup(a.dump(2));
  });
}

kwt_status kwt_report_collate(const char* reports_json, char** out_tables_json) {
  return guarded([&] {
    need(reports_json, "reports");
    need(out_tables_json, "out");
    const auto tables = kwtarget::json_io::collate(kwtarget::json_io::parse(reports_json));
    json j = json::object();
    for (const auto& [name, content] : tables) j[name] = content;
    *out_tables_json = dup(j.dump());
  });
}

kwt_status kwt_report_file_name(const char* report_json, char** out_name) {
  return guarded([&] {
    need(report_json, "report");
    need(out_name, "out");
    const auto j = kwtarget::json_io::parse(report_json);
    if (!j.is_object() || !j.contains("strategy") || !j.contains("budget")) {
      throw kwtarget::Error(ErrorCode::kValidationError, "report needs strategy and budget");
    }
    *out_name = dup(kwtarget::json_io::report_file_name(j));
  });
}

kwt_status kwt_oracle(const char* config_json, char** out_json) {
  return guarded([&] {
    need(out_json, "out");
    const auto cfg = kwtarget::json_io::oracle_from_json(config_or_empty(config_json));
    const auto cases = kwtarget::run_oracle_check(cfg);
    *out_json = dup(kwtarget::json_io::to_json(cases, cfg).dump(2));
  });
}

}  // extern "C"
