#pragma once

// Profile CSV files:
//
//   # d=3 t=0
//   r,M
//   0,0
//   0.01,4.18e-06
//
// The second column is `M` (cumulative mass) or `u` (density). Readers accept
// comma or whitespace delimiters and ignore blank lines and extra comments.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <optional>
#include <variant>
#include <vector>

#include "kslab/radial.hpp"

namespace kslab {

/// Formats a double with 17 significant digits.
std::string format_double(double x);

struct ProfileFile {
  int dim = 0;
  double time = 0.0;
  std::variant<MassProfile, DensityProfile> profile;

  bool is_mass() const { return std::holds_alternative<MassProfile>(profile); }
  /// Mass view; density files are integrated with mass_from_density.
  MassProfile as_mass() const;
};

void write_profile_csv(std::ostream& os, int dim, const MassProfile& profile);
void write_profile_csv(std::ostream& os, int dim, const DensityProfile& profile);

/// Throws ValidationError on malformed text and InvalidProfile on broken invariants.
ProfileFile read_profile_csv(std::istream& is);
ProfileFile read_profile_csv(const std::filesystem::path& path);

/// Numeric table with a header row, e.g. diagnostics.csv; `# d=<d>` comments are picked up.
struct NumericTable {
  std::optional<int> dim;
  std::optional<double> time;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Throws ValidationError when the column is absent.
  std::size_t column(const std::string& name) const;
};

NumericTable read_numeric_csv(std::istream& is);
NumericTable read_numeric_csv(const std::filesystem::path& path);

struct TrajectoryFile {
  int dim = 0;
  std::vector<MassProfile> profiles;
};

/// Long-format `t,r,M` files (one block of rows per time) or a single `r,M` profile.
/// `dim` overrides or supplies the dimension when the file has no `# d=` comment.
TrajectoryFile read_trajectory_csv(const std::filesystem::path& path, std::optional<int> dim = std::nullopt);

}  // namespace kslab
