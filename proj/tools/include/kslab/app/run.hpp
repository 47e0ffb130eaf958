#pragma once

// One scenario run: evolve, optional checks, CSV outputs and a JSON manifest.
//
// Output directory layout:
//   scenario.toml     fully resolved scenario
//   trajectory.csv    t,r,M (long format, omitted when output.trajectory = false)
//   diagnostics.csv   t,mass,half_mass,concentration,u0,lq_<q>...,dt,steps
//   checks.csv        check,status,value,threshold,detail
//   criteria.csv      t,theat (criteria check only)
//   manifest.json     written last; lists every other file with its SHA-256

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kslab/app/scenario.hpp"

namespace kslab::app {

inline constexpr const char* kVersion = "0.1.0";

struct CheckResult {
  std::string name;
  std::string status;  ///< PASS, FAIL, SKIP or INFO
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct FileEntry {
  std::string name;
  std::uintmax_t bytes = 0;
  std::string sha256;
};

struct RunManifest {
  std::string name;
  std::filesystem::path directory;
  std::string scenario_json;
  bool dry_run = false;
  std::string started, finished;  ///< ISO 8601 UTC
  double wall_seconds = 0.0;

  /// ReachedHorizon, BlowupDetected, StepFailure, NumericalFailure, DomainError or DryRun.
  std::string outcome;
  double outcome_time = 0.0;
  std::string trigger;
  std::string reason;
  std::size_t steps = 0, rejections = 0, clips = 0, samples = 0;
  double initial_concentration = 0.0;  ///< over 2 sigma_d
  double max_concentration = 0.0;      ///< over 2 sigma_d, all samples

  std::vector<CheckResult> checks;
  std::vector<FileEntry> files;

  bool checks_passed() const;
  /// True for module errors and step failures.
  bool numerical_failure() const;
};

struct RunOptions {
  bool dry_run = false;
  std::optional<std::filesystem::path> directory;  ///< overrides output.directory
};

/// Module errors are caught and recorded in the outcome; files are replaced by rename,
/// never deleted.
RunManifest run(const Scenario& scenario, const RunOptions& options = {});

std::string manifest_json(const RunManifest& manifest);

/// Lowercase hex SHA-256 of a file.
std::string sha256_file(const std::filesystem::path& path);

/// Writes `content` to `path` through a temporary sibling and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace kslab::app
