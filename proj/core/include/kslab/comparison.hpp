#pragma once

// Barriers for the cumulative mass, the half-line heat majorant
//
//   m(r,t) = (4 pi t)^{-1/2} \int_0^inf (e^{-(r-x)^2/4t} - e^{-(r+x)^2/4t}) m0(x) dx,
//
// and power-law slope fits for decay diagnostics.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kslab/mass_pde.hpp"
#include "kslab/radial.hpp"

namespace kslab {

/// b(r) = min{K r^{d-d/p}, 2 eps sigma_d r^{d-2}} with d/2 < p < d and 0 < eps < d/(2p).
class Barrier {
 public:
  /// Throws DomainError when the parameters violate the invariants above.
  Barrier(const ModelParams& params, double K, double eps, double p);

  double K() const { return K_; }
  double eps() const { return eps_; }
  double p() const { return p_; }
  int dim() const { return d_; }

  /// Radius where the two branches meet: (2 eps sigma_d / K)^{1/(2 - d/p)}.
  double crossover_radius() const;

 private:
  int d_;
  double sigma_;
  double K_, eps_, p_;
};

double barrier_value(const Barrier& b, double r);

struct BarrierViolation {
  std::size_t index = 0;
  double r = 0.0;
  double mass = 0.0;
  double barrier = 0.0;
};

/// First node r_i > 0 with M_i >= b(r_i); empty means the profile passes.
std::optional<BarrierViolation> barrier_check(const MassProfile& profile, const Barrier& b);

/// Sampled initial datum for the heat majorant: piecewise linear through
/// (x_i, m_i), constant outside the nodes. Internally m(x) = m_0 + sum_j s_j (x - x_j)_+.
class SampledFunction {
 public:
  struct Ramp {
    double x, slope_jump;
  };

  SampledFunction(std::vector<double> x, std::vector<double> values);

  double operator()(double x) const;
  std::span<const double> nodes() const { return x_; }
  double sup() const;
  double base() const { return v_.front(); }
  /// Slope jumps above 1e-12 of the steepest slope; smaller ones are rounding noise.
  std::span<const Ramp> ramps() const { return ramps_; }
  /// Sum of |s_j| over the dropped jumps.
  double dropped_jumps() const { return dropped_; }

 private:
  std::vector<double> x_, v_;
  std::vector<Ramp> ramps_;
  double dropped_ = 0.0;
};

using HalfLineDatum = std::function<double(double)>;

struct HeatValue {
  double value = 0.0;
  double error = 0.0;  ///< quadrature error estimate plus truncated kernel mass
};

/// Half-line Dirichlet heat solution from m0 at (r, t). The kernel is truncated
/// where it drops below 1e-16. `breaks` lists kinks of m0 worth splitting at.
HeatValue half_line_heat(const HalfLineDatum& m0, double r, double t, std::span<const double> breaks = {});
/// Closed form for piecewise-linear data: each ramp (x - a)_+ evolves to
/// H(r - a) - H(-r - a), H(y) = y Phi(y / sqrt(2t)) + sqrt(2t) phi(y / sqrt(2t)).
HeatValue half_line_heat(const SampledFunction& m0, double r, double t);

/// min{K r^{d-d/p}, 2 sigma_d r^{d-2}, M_total} sampled on `grid`.
SampledFunction comparison_majorant(const ModelParams& params, const RadialGrid& grid, double K, double p,
                                    double total_mass);

struct ComparisonReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_excess = 0.0;  ///< max of M - m - tol over all samples
  double tolerance = 0.0;     ///< the mass part, rel_tol * M_total
  struct Point {
    double t, r, mass, majorant;
  };
  std::optional<Point> first_violation;

  bool passed() const { return violations == 0; }
};

/// Checks M(r_i, t_k) <= m(r_i, t_k) + rel_tol * M_total + quadrature error over every
/// sampled profile of `result`; at t = 0 compares against m0 directly.
ComparisonReport comparison_check(const EvolutionResult& result, const SampledFunction& m0,
                                  double rel_tol = 1e-6);

/// Least-squares slope of log(value) against log(t) over samples with t in [t_lo, t_hi].
/// Throws DomainError for nonpositive values or fewer than two samples in the window.
double decay_slope(std::span<const double> t, std::span<const double> values, double t_lo, double t_hi);

}  // namespace kslab
