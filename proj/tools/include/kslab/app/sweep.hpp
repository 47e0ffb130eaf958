#pragma once

// Parameter sweeps. The grid file mirrors the scenario layout with arrays at the leaves:
//
//   [initial]
//   eps = [0.3, 0.6, 0.9]
//   [model]
//   d = [3, 4, 5]
//
// Runs cover the cartesian product (keys in sorted dotted order, last key fastest) and
// write into <out>/run_0000, <out>/run_0001, ...; <out>/index.csv maps parameters to outcomes.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kslab/app/run.hpp"

namespace kslab::app {

struct SweepRun {
  std::size_t index = 0;
  std::vector<std::string> values;  ///< one label per key
  std::filesystem::path directory;
  std::string status;  ///< ok, validation_error or numerical_failure
  std::string error;
  std::optional<RunManifest> manifest;
};

struct SweepResult {
  std::vector<std::string> keys;
  std::vector<SweepRun> runs;
  std::filesystem::path index;
};

/// Worker count from KSLAB_WORKERS, else the hardware concurrency. Throws ValidationError
/// for a malformed value.
std::size_t default_workers();

/// Per-run failures are recorded and the sweep continues. Throws ValidationError for a
/// malformed template or grid.
SweepResult sweep(const std::filesystem::path& template_path, const std::filesystem::path& grid_path,
                  const std::filesystem::path& out_dir, std::size_t workers);

}  // namespace kslab::app
