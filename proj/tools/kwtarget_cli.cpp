// kwtarget command line: synth, estimate, optimize, baseline, report, oracle.
// Talks to the library only through kwtarget.h.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kwtarget/kwtarget.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct Failure {
  int exit_code;
  std::string error_json;
};

[[noreturn]] void fail(int exit_code, const std::string& code, const std::string& message) {
  throw Failure{exit_code, json{{"error", {{"code", code}, {"message", message}}}}.dump()};
}

void check(kwt_status s) {
  if (s == KWT_OK) return;
  throw Failure{kwt_status_is_validation(s) ? kExitValidation : kExitRuntime, kwt_last_error()};
}

struct CString {
  char* p = nullptr;
  ~CString() { kwt_string_free(p); }
  std::string str() const { return p == nullptr ? std::string() : std::string(p); }
};

struct DatasetDeleter {
  void operator()(kwt_dataset* d) const { kwt_dataset_free(d); }
};
struct PosteriorDeleter {
  void operator()(kwt_posterior* p) const { kwt_posterior_free(p); }
};
using Dataset = std::unique_ptr<kwt_dataset, DatasetDeleter>;
using Posterior = std::unique_ptr<kwt_posterior, PosteriorDeleter>;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(kExitRuntime, "Io", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(kExitRuntime, "Io", "cannot write '" + path.string() + "'");
  out << content;
  if (!out) fail(kExitRuntime, "Io", "write failed for '" + path.string() + "'");
}

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(kExitRuntime, "Io", "cannot create '" + dir + "': " + ec.message());
  return fs::path(dir);
}

// Flags shared by every command.
struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out = ".";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "random seed (falls back to KWTARGET_SEED, then 0)");
  cmd->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory");
}

// Loads the config file. A file may hold one section per command
// ({"synth": {...}, "optimize": {...}}) or a flat object for a single one.
json load_config(const Common& c, const std::string& section) {
  if (c.config.empty()) return json::object();
  json j;
  try {
    j = json::parse(read_file(c.config));
  } catch (const json::parse_error& e) {
    fail(kExitValidation, "ParseError", "config: " + std::string(e.what()));
  }
  if (!j.is_object()) fail(kExitValidation, "InvalidArgument", "config must be a JSON object");
  static const char* kSections[] = {"synth", "estimate", "optimize", "baseline", "report", "oracle"};
  bool sectioned = false;
  for (const char* s : kSections) sectioned = sectioned || j.contains(s);
  if (!sectioned) return j;
  return j.contains(section) ? j.at(section) : json::object();
}

std::uint64_t parse_seed_text(const std::string& text, const char* where) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used, 10);
    if (used != text.size() || text.front() == '-') throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    fail(kExitValidation, "InvalidArgument", std::string(where) + " must be a non-negative integer");
  }
}

// Flag, then config, then KWTARGET_SEED, then 0.
void apply_seed(const Common& c, json& cfg) {
  if (c.seed) {
    cfg["seed"] = *c.seed;
    return;
  }
  if (cfg.contains("seed")) return;
  if (const char* env = std::getenv("KWTARGET_SEED"); env != nullptr && *env != '\0') {
    cfg["seed"] = parse_seed_text(env, "KWTARGET_SEED");
    return;
  }
  cfg["seed"] = 0;
}

Dataset load_dataset(const std::string& path) {
  kwt_dataset* d = nullptr;
  check(kwt_dataset_load(path.c_str(), &d));
  return Dataset(d);
}

Posterior load_posterior(const std::string& path, const kwt_dataset* ds) {
  kwt_posterior* p = nullptr;
  check(kwt_posterior_load(path.c_str(), ds, &p));
  return Posterior(p);
}

// --- synth ---

struct SynthArgs {
  Common common;
  std::optional<int> adgroups, keywords, days;
};

void run_synth(const SynthArgs& a) {
  json cfg = load_config(a.common, "synth");
  apply_seed(a.common, cfg);
  if (a.adgroups) cfg["adgroups"] = *a.adgroups;
  if (a.keywords) cfg["keywords_per_group"] = *a.keywords;
  if (a.days) cfg["days"] = *a.days;

  kwt_dataset* raw = nullptr;
  CString truth;
  check(kwt_synthesize(cfg.dump().c_str(), &raw, &truth.p));
  Dataset ds(raw);
  CString summary;
  check(kwt_dataset_summary(ds.get(), &summary.p));

  const auto dir = ensure_dir(a.common.out);
  check(kwt_dataset_save(ds.get(), (dir / "dataset.csv").string().c_str()));
  write_file(dir / "truth.json", truth.str() + "\n");
  write_file(dir / "summary.json", summary.str() + "\n");
  std::cout << "wrote " << kwt_dataset_record_count(ds.get()) << " records to "
            << (dir / "dataset.csv").string() << "\n";
}

// --- estimate ---

struct EstimateArgs {
  Common common;
  std::string data;
  std::optional<int> iterations, burn_in, thinning;
  std::optional<unsigned> threads;
};

void run_estimate(const EstimateArgs& a) {
  json cfg = load_config(a.common, "estimate");
  apply_seed(a.common, cfg);
  if (a.iterations) cfg["iterations"] = *a.iterations;
  if (a.burn_in) cfg["burn_in"] = *a.burn_in;
  if (a.thinning) cfg["thinning"] = *a.thinning;
  if (a.threads) cfg["threads"] = *a.threads;

  auto ds = load_dataset(a.data);
  CString summary;
  check(kwt_dataset_summary(ds.get(), &summary.p));
  kwt_posterior* raw = nullptr;
  check(kwt_estimate(ds.get(), cfg.dump().c_str(), &raw));
  Posterior post(raw);

  const auto dir = ensure_dir(a.common.out);
  check(kwt_posterior_save(post.get(), (dir / "posterior.csv").string().c_str()));
  write_file(dir / "summary.json", summary.str() + "\n");
  std::cout << "estimated " << kwt_posterior_adgroup_count(post.get()) << " ad-groups into "
            << (dir / "posterior.csv").string() << "\n";
}

// --- optimize / baseline ---

struct OptimizeArgs {
  Common common;
  std::string data, posterior;
  std::vector<double> budgets;
  std::optional<double> alpha, tau;
  std::optional<std::size_t> t, eval_t, node_limit;
  std::vector<std::string> strategies;
};

void run_optimize(const OptimizeArgs& a, const char* section) {
  json cfg = load_config(a.common, section);
  apply_seed(a.common, cfg);
  if (!a.budgets.empty()) {
    for (double b : a.budgets) {
      if (!(b > 0.0)) fail(kExitValidation, "OutOfRange", "budget must be positive");
    }
    cfg["budgets"] = a.budgets;
  }
  if (a.alpha) cfg["alpha"] = *a.alpha;
  if (a.tau) cfg["tau"] = *a.tau;
  if (a.t) cfg["t"] = *a.t;
  if (a.eval_t) cfg["eval_t"] = *a.eval_t;
  if (a.node_limit) cfg["node_limit"] = *a.node_limit;
  if (!a.strategies.empty()) cfg["strategies"] = a.strategies;

  auto ds = load_dataset(a.data);
  auto post = load_posterior(a.posterior, ds.get());
  CString out;
  check(kwt_run(ds.get(), post.get(), cfg.dump().c_str(), &out.p));

  const auto dir = ensure_dir(a.common.out);
  const json reports = json::parse(out.str());
  for (const auto& r : reports) {
    const std::string text = r.dump(2);
    CString name;
    check(kwt_report_file_name(text.c_str(), &name.p));
    write_file(dir / name.str(), text + "\n");
    std::cout << name.str() << ": profit " << r.at("expected_profit").dump() << ", alpha_hat "
              << r.at("alpha_hat_out_of_sample").dump() << ", selected " << r.at("n_selected").dump()
              << "\n";
  }
}

// --- report ---

struct ReportArgs {
  Common common;
  std::vector<std::string> inputs;
};

void run_report(const ReportArgs& a) {
  json cfg = load_config(a.common, "report");
  std::vector<std::string> inputs = a.inputs;
  if (inputs.empty() && cfg.contains("inputs")) inputs = cfg.at("inputs").get<std::vector<std::string>>();
  if (inputs.empty()) fail(kExitValidation, "InvalidArgument", "report needs at least one --in");

  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      for (const auto& e : fs::directory_iterator(p)) {
        const auto name = e.path().filename().string();
        if (e.is_regular_file() && name.rfind("report_", 0) == 0 && e.path().extension() == ".json") {
          files.push_back(e.path());
        }
      }
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      fail(kExitValidation, "InvalidArgument", "no such input '" + in + "'");
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(kExitValidation, "EmptyDataset", "no report files found");

  json reports = json::array();
  for (const auto& f : files) {
    try {
      reports.push_back(json::parse(read_file(f.string())));
    } catch (const json::parse_error& e) {
      fail(kExitValidation, "ParseError", f.string() + ": " + e.what());
    }
  }
  CString tables;
  check(kwt_report_collate(reports.dump().c_str(), &tables.p));
  const auto dir = ensure_dir(a.common.out);
  const json parsed = json::parse(tables.str());
  for (const auto& [name, content] : parsed.items()) {
    write_file(dir / name, content.get<std::string>());
    std::cout << "wrote " << (dir / name).string() << "\n";
  }
}

// --- oracle ---

struct OracleArgs {
  Common common;
  std::optional<std::size_t> instances, max_keywords, t;
};

int run_oracle(const OracleArgs& a) {
  json cfg = load_config(a.common, "oracle");
  apply_seed(a.common, cfg);
  if (a.instances) cfg["instances"] = *a.instances;
  if (a.max_keywords) cfg["max_keywords"] = *a.max_keywords;
  if (a.t) cfg["t"] = *a.t;

  CString out;
  check(kwt_oracle(cfg.dump().c_str(), &out.p));
  const auto dir = ensure_dir(a.common.out);
  write_file(dir / "oracle.json", out.str() + "\n");
  const json r = json::parse(out.str());
  const bool eq = r.at("all_objectives_equal").get<bool>();
  const bool bounds = r.at("all_bounds_valid").get<bool>();
  std::cout << "objectives equal: " << (eq ? "yes" : "no") << ", bounds valid: " << (bounds ? "yes" : "no")
            << "\n";
  return eq && bounds ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keyword selection and match-type optimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kwt_version());

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "generate a seeded synthetic campaign");
  add_common(c_synth, synth.common);
  c_synth->add_option("--adgroups", synth.adgroups, "number of ad-groups");
  c_synth->add_option("--keywords", synth.keywords, "keywords per ad-group");
  c_synth->add_option("--days", synth.days, "days per keyword");

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "impute unobserved indices and export posterior draws");
  add_common(c_est, est.common);
  c_est->add_option("--data", est.data, "dataset CSV")->required();
  c_est->add_option("--iterations", est.iterations, "Gibbs iterations");
  c_est->add_option("--burn-in", est.burn_in, "discarded leading iterations");
  c_est->add_option("--thinning", est.thinning, "keep every k-th draw");
  c_est->add_option("--threads", est.threads, "worker threads (results do not depend on it)");

  OptimizeArgs opt;
  auto* c_opt = app.add_subcommand("optimize", "solve the chance-constrained program over a budget sweep");
  add_common(c_opt, opt.common);
  c_opt->add_option("--data", opt.data, "dataset CSV")->required();
  c_opt->add_option("--posterior", opt.posterior, "posterior CSV from estimate")->required();
  c_opt->add_option("--budget", opt.budgets, "budget(s); default 100..1000 by 100");
  c_opt->add_option("--alpha", opt.alpha, "chance-constraint level");
  c_opt->add_option("--scenarios", opt.t, "in-sample scenarios");
  c_opt->add_option("--eval-scenarios", opt.eval_t, "out-of-sample scenarios");
  c_opt->add_option("--node-limit", opt.node_limit, "branch-and-bound node limit");

  OptimizeArgs base;
  std::string base_strategy;
  auto* c_base = app.add_subcommand("baseline", "run a baseline strategy over a budget sweep");
  add_common(c_base, base.common);
  c_base->add_option("--strategy", base_strategy, "BASE1..BASE7")->required();
  c_base->add_option("--data", base.data, "dataset CSV")->required();
  c_base->add_option("--posterior", base.posterior, "posterior CSV from estimate")->required();
  c_base->add_option("--budget", base.budgets, "budget(s); default 100..1000 by 100");
  c_base->add_option("--alpha", base.alpha, "chance-constraint level");
  c_base->add_option("--tau", base.tau, "competitiveness threshold");
  c_base->add_option("--scenarios", base.t, "in-sample scenarios");
  c_base->add_option("--eval-scenarios", base.eval_t, "out-of-sample scenarios");

  ReportArgs rep;
  auto* c_rep = app.add_subcommand("report", "collate report files into CSV tables");
  add_common(c_rep, rep.common);
  c_rep->add_option("--in", rep.inputs, "report files or directories");

  OracleArgs orc;
  auto* c_orc = app.add_subcommand("oracle", "compare the solver with exhaustive search");
  add_common(c_orc, orc.common);
  c_orc->add_option("--instances", orc.instances, "number of random instances");
  c_orc->add_option("--max-keywords", orc.max_keywords, "largest instance size");
  c_orc->add_option("--scenarios", orc.t, "scenarios per instance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", {{"code", "InvalidArgument"}, {"message", e.what()}}}}.dump() << "\n";
    return kExitValidation;
  }

  const auto start = std::chrono::steady_clock::now();
  int rc = 0;
  try {
    if (*c_synth) {
      run_synth(synth);
    } else if (*c_est) {
      run_estimate(est);
    } else if (*c_opt) {
      opt.strategies = {"BBKSM"};
      run_optimize(opt, "optimize");
    } else if (*c_base) {
      if (base_strategy.rfind("BASE", 0) != 0) {
        fail(kExitValidation, "InvalidArgument", "--strategy must be one of BASE1..BASE7");
      }
      base.strategies = {base_strategy};
      run_optimize(base, "baseline");
    } else if (*c_rep) {
      run_report(rep);
    } else if (*c_orc) {
      rc = run_oracle(orc);
    }
  } catch (const Failure& f) {
    std::cerr << f.error_json << "\n";
    return f.exit_code;
  } catch (const json::exception& e) {
    std::cerr << json{{"error", {{"code", "ValidationError"}, {"message", e.what()}}}}.dump() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"code", "Internal"}, {"message", e.what()}}}}.dump() << "\n";
    return kExitRuntime;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::fprintf(stderr, "wall time %.2fs\n", secs);
  return rc;
}
