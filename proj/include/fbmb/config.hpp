#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fbmb::cli {

/// Resolved run settings: config file values overlaid by command-line flags.
struct RunConfig {
  std::string command;  // norm | bounds | sweep | simulate | selftest

  double H = 0.75;
  double T = 10.0;
  std::size_t n = 2001;
  std::size_t m = 20000;
  std::uint64_t seed = 12345;
  std::string method = "circulant";

  std::string drift = "example51";  // example51 | example52 | csv:PATH | fcsv:PATH
  double gamma = 1.0;

  double u_const = 1.0;
  std::string u_csv;
  std::optional<double> u_minus_const;
  bool auto_u_minus = false;

  std::vector<double> gammas;  // sweep rows
  bool conservative = false;   // substitute 1 for the residual probability
  double decay_eps = 1e-3;

  std::string out;
  std::string paths_out;
  bool inject_c1_fault = false;
};

/// Flat INI: global keys plus [command] sections that apply only to that
/// command. '#' and ';' start comments. Errors carry file:line.
void load_config_file(const std::string& path, const std::string& command, RunConfig& cfg);

/// Applies "key" "value" to cfg; throws on unknown keys or bad values.
void apply_key(RunConfig& cfg, const std::string& key, const std::string& value,
               const std::string& where);

/// FNV-1a hash of the canonical serialization; stable provenance tag.
std::string config_hash(const RunConfig& cfg);
std::string canonical_string(const RunConfig& cfg);

std::vector<double> parse_double_list(const std::string& s);

}  // namespace fbmb::cli
