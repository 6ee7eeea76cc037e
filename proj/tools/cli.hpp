#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hardy/io.hpp"

namespace hardy::cli {

using io::json;

/// Everything a run depends on. `params` holds the experiment-specific
/// settings; normalize() fills their defaults so that the echo is complete.
struct ExperimentConfig {
  std::string experiment;
  int dim = 3;
  FKConfig fk;
  PerturbationQuadrature quadrature;
  int k_max = 12;
  double horizon = 64.0;
  std::string out;
  json params = json::object();

  ExperimentConfig();
};

const std::vector<std::string>& experiment_names();

/// Defaults of the experiment-specific parameters.
json default_params(const std::string& experiment, int dim);

/// Checks every field and fills parameter defaults; errors name the field.
ExperimentConfig normalize(ExperimentConfig cfg);

json to_json(const ExperimentConfig& cfg);
/// Strict parse: unknown fields are errors. Missing fields keep `base`.
ExperimentConfig config_from(const json& j, ExperimentConfig base = {});

/// Hex SHA-1 of "blob <size>\0<content>", as git hashes a file.
std::string git_blob_sha1(const std::string& content);
/// git_blob_sha1 of the canonical (sorted-key, compact) config dump.
std::string config_hash(const ExperimentConfig& cfg);

struct RunResult {
  std::vector<std::string> files;
  double wall_seconds = 0.0;
  /// False when a check built into the experiment failed.
  bool passed = true;
};

/// Runs a normalized config and writes <out>/<experiment>.{csv,json,manifest.json}.
RunResult run(const ExperimentConfig& cfg, std::ostream& log);

/// Command-line entry: 0 on success, 1 when the run fails, 2 on usage or
/// config errors, 3 when a check built into the experiment fails.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hardy::cli
