#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fractalnet::cli {

enum ExitCode : int { kSuccess = 0, kCheckFailure = 1, kUsageError = 2 };

struct RunConfig {
  std::string command;
  std::filesystem::path spec;
  std::optional<std::size_t> level;
  std::optional<std::uint64_t> seed;
  std::size_t walks = 1000;
  std::size_t step_cap = 1'000'000;
  std::optional<double> tol;
  std::filesystem::path out = "fractalnet-out";
  unsigned threads = 0;
  // Rationals "a,b,c"; empty means e_0.
  std::string u0;
  // Vertices: an id, "o" for the root, or "qI" for (q_I, 0).
  std::string center = "o";
  std::string other = "o";
  std::string start = "o";
  std::string mode = "free";
  double a = 0.25;
  double b = 0.75;
  std::size_t depth = 3;
  std::size_t family_level = 1;
  bool paths = false;
};

nlohmann::json to_json(const RunConfig& config);

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Artifact {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::size_t bytes = 0;
};

struct ResultManifest {
  std::string command;
  nlohmann::json config;
  std::vector<Artifact> artifacts;
  std::vector<Check> checks;
  std::string library_version;
  std::string output_directory;
  double wall_clock_seconds = 0.0;
  std::string timestamp;

  bool all_pass() const;
  // Covers command, config, artifact hashes and checks; not the timestamp, wall clock or output directory.
  std::string hash() const;
  nlohmann::json to_json() const;
};

std::string sha256_hex(const std::string& bytes);

// Runs one command; artifacts go to config.out. Throws fractalnet::Error on bad input.
ResultManifest execute(const RunConfig& config);

// The whole command line: parsing, config file, execution, exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fractalnet::cli
