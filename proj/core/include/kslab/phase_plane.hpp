#pragma once

// Stationary radial solutions through the planar system in tau = log r,
//
//   X' = (2 - Z) X,   Z' = X - (d - 2) Z,
//
// X = sigma^{-1} r^{3-d} M_r, Z = sigma^{-1} r^{2-d} M, with the Lyapunov function
// L = (Z-2)^2/2 + X - 2(d-2) - 2(d-2) log(X / 2(d-2)), dL/dtau = -(d-2)(Z-2)^2.

#include <array>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "kslab/ode.hpp"
#include "kslab/radial.hpp"

namespace kslab {

struct PhasePoint {
  double tau = 0.0;
  double X = 0.0;
  double Z = 0.0;
};

enum class FixedPoint { Origin, Interior };

std::array<double, 2> vector_field(int d, double X, double Z);

/// Throws DomainError for X <= 0.
double lyapunov(int d, double X, double Z);

/// dL/dtau from finite differences of L along the exact local flow: the state is advanced
/// by +-h, +-2h with fine RK4 substeps and the five-point stencil is applied.
double lyapunov_rate_numeric(int d, double X, double Z, double h = 1e-3);

/// Origin: {2, -(d-2)}. Interior: roots of l^2 + (d-2) l + 2(d-2).
std::pair<std::complex<double>, std::complex<double>> linearization_eigenvalues(int d, FixedPoint at);

/// (d - 2)(d - 10): negative iff the interior eigenvalues are complex.
int interior_discriminant_sign(int d);

struct SeparatrixOptions {
  double delta = 1e-8;        ///< launch distance from the origin along (d, 1)
  double central_density = 1.0;  ///< fixes the tau shift: X ~ u(0) e^{2 tau} near the origin
  double tau_max = 60.0;
  double stop_radius = 1e-9;  ///< stop once this close to (2(d-2), 2)
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
};

struct PhaseTrajectory {
  int dim = 0;
  std::vector<PhasePoint> points;  ///< launch point plus every accepted step
  std::vector<ode::DenseSegment<2>> segments;
  ode::Stats stats;
  bool converged = false;  ///< stop_radius reached (otherwise tau_max)
  double terminal_distance = 0.0;

  double tau_begin() const { return points.front().tau; }
  double tau_end() const { return points.back().tau; }
  /// Dense-output state at tau; throws DomainError outside [tau_begin, tau_end].
  PhasePoint at(double tau) const;
};

/// Integrates the unstable manifold of the origin with Dormand-Prince 5(4).
/// Throws NumericalFailure if the trajectory leaves the open quadrant.
PhaseTrajectory integrate_separatrix(int d, const SeparatrixOptions& options = {});

/// Sign changes of Z - level between consecutive points. A lower bound on true crossings.
std::size_t count_crossings(const PhaseTrajectory& traj, double level);

/// M(r) = sigma_d r^{d-2} Z(log r); M(0) = 0. Throws DomainError if a positive node falls
/// outside the trajectory's tau range.
MassProfile stationary_mass_profile(const ModelParams& params, const PhaseTrajectory& traj, const RadialGrid& grid);

}  // namespace kslab
