#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "selfnorm/distributions.hpp"
#include "selfnorm/normalizer.hpp"

namespace selfnorm::cli {

enum ExitCode { ok = 0, config_error = 1, precondition_error = 2, numeric_error = 3 };

/// Validated contents of a version-1 config file.
struct RunConfig {
  std::optional<ScalarDistribution> dist;
  nlohmann::json dist_spec;  // as given, for the two-point parameters
  std::optional<Normalizer> norm;
  std::optional<double> p;  // set for power-law normalizers
  std::vector<double> z;
  std::vector<long> n;
  long trials = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  nlohmann::json options = nlohmann::json::object();
  std::string output;
};

/// Parses and checks a config document; ConfigError names the offending field.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

ScalarDistribution parse_distribution(const nlohmann::json& spec, const std::string& where = "distribution");
Normalizer parse_normalizer(const nlohmann::json& spec, std::optional<double>* p = nullptr);

/// Command bodies; each returns the machine output (JSON or CSV text).
std::string cmd_rate(const RunConfig& cfg);
std::string cmd_exact(const RunConfig& cfg);
std::string cmd_prefactor(const RunConfig& cfg);
std::string cmd_simulate(const RunConfig& cfg);
std::string cmd_contour(const RunConfig& cfg);

/// Full command line: `selfnorm <command> --config <path> [--out <path>]
/// [--seed <int>] [--threads <int>]`. Diagnostics go to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace selfnorm::cli
