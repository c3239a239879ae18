#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sbm {

// One parsed experiment invocation.  Zero or negative sentinels mean "use
// the subcommand default"; the resolved values are echoed into each row's
// param_json so the CSV is self-describing.
struct ExperimentConfig {
  std::string subcommand;
  std::string selector;    // Morse function or surface name
  double u = -1.0;         // deformation coupling; -1 = per-selector default
  std::vector<double> ts;  // time list; empty = subcommand default
  int steps = 0;
  long long n_paths = 0;
  std::uint64_t seed = 1;
  std::string out_path;
  double tol = 0.0;       // pass-band override; 0 = subcommand default
  double b_field = 1.0;   // magnetic field strength (mehler)
};

struct ResultRecord {
  std::string experiment;
  std::string param_json;
  double estimate = 0.0;
  std::optional<double> se;      // present for every Monte Carlo estimate
  std::optional<double> oracle;  // empty only for exact computations
  bool pass = true;
  double seconds = 0.0;          // deterministic cost model, not wall time
};

struct RunOutput {
  std::vector<ResultRecord> rows;
  bool all_pass = true;
};

// Dispatches cfg.subcommand: witten-index, euler-char, mehler, ito, morse,
// selftest.  Throws std::invalid_argument on malformed configuration.
RunOutput run_experiment(const ExperimentConfig& cfg);

// Flat key=value configuration text; '#' comments and blank lines skipped.
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Applies file keys onto cfg.  Keys named in `fixed` were already set by
// command-line flags and win over the file.  Unknown keys are rejected.
void apply_config_keys(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv,
                       const std::vector<std::string>& fixed);

std::vector<double> parse_time_list(const std::string& text);

std::string csv_header();
std::string csv_line(const ResultRecord& r);

struct CatalogParam {
  std::string key;
  std::string doc;
};
struct CatalogEntry {
  std::string name;
  std::string summary;
  std::vector<CatalogParam> params;
};
const std::vector<CatalogEntry>& experiment_catalog();
std::string catalog_text();
std::string catalog_json();

}  // namespace sbm
