#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tic/config.hpp"

namespace tic {

enum class Subcommand { Moments, Solve, Verify, Sweep, Simulate };

Subcommand subcommand_from_name(const std::string& name);
std::string_view to_string(Subcommand cmd);

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;  // overrides simulation.seed
  int threads = 1;
};

struct RunResult {
  std::vector<std::string> files;  // names written into out_dir
  std::string verdict;             // verify/sweep only
  std::size_t witness_count = 0;
};

// Runs one workflow and writes its report files. Files are staged to
// temporaries and renamed on success, so failures leave no partial outputs.
//   moments  -> moments.csv, summary.json
//   solve    -> equilibrium.csv, summary.json
//   verify   -> verification.csv, summary.json
//   sweep    -> equilibrium.csv, verification.csv, summary.json
//   simulate -> simulate.csv, summary.json
RunResult run(Subcommand cmd, const ExperimentConfig& config, const RunOptions& options);

}  // namespace tic
