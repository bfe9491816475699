#pragma once

#include <lqnet/io.hpp>
#include <lqnet/model.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lqnet::cli {

enum ExitCode : int {
  kSuccess = 0,
  kVerificationFailure = 1,
  kUsageError = 2,
  kNumericalFailure = 3,
};

// Experiment description: the system document plus an optional "experiment"
// object with run parameters. Command-line flags override the document.
struct ExperimentConfig {
  SystemSpec spec;
  std::optional<std::uint64_t> seed;
  std::optional<long long> reps;
  std::string strategy = "optimal";  // optimal | zero | common-only | path
  unsigned threads = 1;
  int cap_bits = 20;
  std::optional<std::string> out_dir;
  std::string format = "json";
  std::vector<double> sweep;               // drop-probability grid for compare
  std::vector<std::string> strategies;     // strategies for compare
  std::size_t trajectories = 0;            // trajectories dumped by simulate
  bool decompose = false;
  std::string base_dir = ".";              // for resolving relative paths
};

// Parses and validates a config document. Throws ParseError listing every
// problem with JSON pointer locations.
ExperimentConfig parse_config_text(const std::string& text, const std::string& base_dir = ".");
// Reads from a file, or from `in` when path is "-".
ExperimentConfig parse_config(const std::string& path, std::istream& in);

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

// Runs the command line (argv[0] is the program name) and returns the exit
// code: 0 success, 1 verification failure, 2 usage or config error,
// 3 numerical failure.
int run(const std::vector<std::string>& args, Streams streams);

}  // namespace lqnet::cli
