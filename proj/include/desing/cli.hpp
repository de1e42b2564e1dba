#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "desing/configuration.hpp"

namespace desing::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Bad input: malformed or inconsistent configuration, bad flags. Exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration file (JSON):
//   n, points [[...]], rotations [row-major n*n list or list of rows], A0, epsilon, rho_star,
//   optional quadrature_nodes, grid_h, L, seed, neck_nodes.
// Errors read "<origin>:<line>: <message>".
Configuration parse_config(const std::filesystem::path& path);
Configuration parse_config_text(const std::string& text, const std::string& origin);

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // "<", "<=", ">", "==" or "within" (|value| <= threshold)
  bool pass = false;
};

struct RunReport {
  std::string command;
  std::optional<std::string> config_digest;
  std::uint64_t seed = 1;
  nlohmann::ordered_json sections = nlohmann::ordered_json::object();
  std::vector<Check> checks;
  std::vector<std::string> summary;  // human-readable lines
  double seconds = 0.0;

  bool passed() const;
  int exit_code() const { return passed() ? 0 : 1; }
  // Stable key order; the "timings" key is omitted when with_timings is false.
  nlohmann::ordered_json to_json(bool with_timings = true) const;
};

struct RunOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> export_path;
  std::optional<double> epsilon;  // glue: overrides the file's epsilon
  int n = 3;
  int k = 1;
  double beta = 1.0;
  double grid = 0.05;
  int degree = 8;
};

// Commands: validate, interaction, neck, spectrum, glue, dtn. Module errors are rethrown
// as InputError prefixed with the command name.
RunReport run(const std::string& command, const RunOptions& options);

// Entry point shared by the executable: parses argv, runs, prints, returns the exit code.
int main_entry(int argc, char** argv);

}  // namespace desing::cli
