#pragma once

// Radially symmetric Keller-Segel building blocks: dimension constants,
// radial grids, cumulative-mass and density profiles, closed-form reference
// solutions, and the concentration functionals defined on them.
//
// Conventions: d >= 3 is the spatial dimension, sigma = |S^{d-1}|, and
// M(r) = \int_{|x|<r} u(x) dx is the cumulative mass, so that
//   u(r) = sigma^{-1} r^{1-d} M'(r).

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace kslab {

/// Surface measure 2 pi^{d/2} / Gamma(d/2) of the unit sphere in R^d. Requires d >= 2.
double sphere_measure(int d);

class ModelParams {
 public:
  /// Throws DomainError for d < 3.
  explicit ModelParams(int d);

  int dim() const { return d_; }
  double sigma() const { return sigma_; }

  /// 2 sigma_d: radial concentration of the singular steady state.
  double critical_concentration() const { return 2.0 * sigma_; }

 private:
  int d_;
  double sigma_;
};

/// Strictly increasing radii r_0 = 0 < r_1 < ... < r_N with N >= 16.
/// Copies share the immutable node storage.
class RadialGrid {
 public:
  static constexpr std::size_t kMinIntervals = 16;

  explicit RadialGrid(std::vector<double> nodes);

  static RadialGrid uniform(std::size_t intervals, double r_max);
  /// 0 followed by `intervals` geometrically spaced nodes from r_min to r_max.
  static RadialGrid log_spaced(std::size_t intervals, double r_min, double r_max);

  std::span<const double> nodes() const { return *nodes_; }
  std::size_t size() const { return nodes_->size(); }
  std::size_t intervals() const { return nodes_->size() - 1; }
  double operator[](std::size_t i) const { return (*nodes_)[i]; }
  double r_max() const { return nodes_->back(); }
  bool is_uniform() const { return uniform_; }

  friend bool operator==(const RadialGrid& a, const RadialGrid& b) {
    return a.nodes_ == b.nodes_ || *a.nodes_ == *b.nodes_;
  }

 private:
  std::shared_ptr<const std::vector<double>> nodes_;
  bool uniform_ = false;
};

/// Cumulative mass M_i = M(r_i, t). Invariants: M_0 = 0, nondecreasing, nonnegative.
class MassProfile {
 public:
  MassProfile(RadialGrid grid, std::vector<double> values, double time = 0.0);

  const RadialGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  double time() const { return time_; }
  double total() const { return values_.back(); }

  /// Piecewise-linear interpolation; r must lie within the grid.
  double at(double r) const;

  /// Same values stamped with a different time.
  MassProfile retimed(double time) const;

 private:
  RadialGrid grid_;
  std::vector<double> values_;
  double time_;
};

/// Radial density samples u_i = u(r_i, t) >= 0.
class DensityProfile {
 public:
  DensityProfile(RadialGrid grid, std::vector<double> values, double time = 0.0);

  const RadialGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  double time() const { return time_; }

  /// Piecewise-linear interpolation, zero beyond the last node.
  double at(double r) const;

 private:
  RadialGrid grid_;
  std::vector<double> values_;
  double time_;
};

/// Samples M = f(r) on every node.
template <class F>
MassProfile tabulate_mass(const RadialGrid& grid, F&& f, double time = 0.0) {
  std::vector<double> m(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) m[i] = f(grid[i]);
  return MassProfile(grid, std::move(m), time);
}

template <class F>
DensityProfile tabulate_density(const RadialGrid& grid, F&& f, double time = 0.0) {
  std::vector<double> u(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) u[i] = f(grid[i]);
  return DensityProfile(grid, std::move(u), time);
}

// Closed-form solutions.

/// Mass of the singular steady state u_C = 2(d-2)/|x|^2 inside radius r: 2 sigma r^{d-2}.
double chandrasekhar_mass(const ModelParams& params, double r);

/// u_C(r) = 2(d-2)/r^2 (infinite at r = 0).
double chandrasekhar_density(const ModelParams& params, double r);

/// Mass of the explicit self-focusing solution 4 sigma r^d / (r^2 + 2(d-2)(T-t)).
/// Throws DomainError for t >= T or r < 0.
double explicit_blowup_mass(const ModelParams& params, double blowup_time, double r, double t);

// Profile conversions and functionals.

/// u_i = sigma^{-1} r_i^{1-d} M'(r_i), three-point derivative exact on r^d and r^{d+2}; u_0 from M(r_1) ~ sigma u(0) r_1^d / d.
/// Throws InvalidProfile when a derivative is negative beyond rounding.
DensityProfile density_from_mass(const ModelParams& params, const MassProfile& profile);

/// Trapezoidal M_i = sigma \int_0^{r_i} u(s) s^{d-1} ds.
MassProfile mass_from_density(const ModelParams& params, const DensityProfile& density);

/// max_{i>0} r_i^{2-d} M_i.
double radial_concentration(const ModelParams& params, const MassProfile& profile);

/// Centered Morrey quantity max_{i>0} r_i^{d(1/p-1)} M_i; p = d/2 gives the radial concentration.
double centered_morrey(const ModelParams& params, const MassProfile& profile, double p);

/// (sigma \int u^q r^{d-1} dr)^{1/q}, trapezoid on the stored grid. Requires 1 <= q < inf.
double lq_norm(const ModelParams& params, const DensityProfile& density, double q);

/// Radial component -sigma^{-1} r^{1-d} M(r) of grad v. Throws DomainError for r <= 0.
double potential_gradient_radial(const ModelParams& params, const MassProfile& profile, double r);

}  // namespace kslab
