#pragma once

// Self-similar solutions M(r,t) = sigma_d t^{d/2-1} zeta(r^2/t). The profile solves
//
//   zeta'' + zeta'/4 - (d-2)/(2y) zeta' - (d-2)/(8y) zeta + zeta zeta' / (2 y^{d/2}) = 0,
//
// with zeta(0) = 0 and zeta ~ 2 eps y^{d/2-1} as y -> inf. Profiles are shot from
// zeta ~ a y^{d/2} near the origin.

#include <array>
#include <vector>

#include "kslab/ode.hpp"
#include "kslab/phase_plane.hpp"
#include "kslab/radial.hpp"

namespace kslab {

/// zeta'' from the profile equation. Throws DomainError for y <= 0.
double profile_rhs(int d, double y, double zeta, double zeta_prime);

/// Upper bound (1 - 2/d) y^{d/2} + 4(d-1) y^{d/2-1}.
double profile_bound(int d, double y);

struct ShootOptions {
  double y0 = 1e-6;
  double y_max = 1e4;
  std::size_t samples = 2001;  ///< log-spaced output nodes on [y0, y_max]
  double rel_tol = 1e-11;
  double abs_tol = 1e-30;
  double flat_tol = 0.01;  ///< max relative spread of y^{1-d/2} zeta over the last decade
};

struct ProfileSolution {
  int dim = 0;
  double a = 0.0;  ///< zeta ~ a y^{d/2} + c y^{d/2+1} near 0
  double c = 0.0;
  std::vector<double> y, zeta, zeta_prime;
  std::vector<ode::DenseSegment<2>> segments;
  double epsilon = 0.0;      ///< zeta ~ 2 eps y^{d/2-1}
  double tail_spread = 0.0;  ///< relative spread of y^{1-d/2} zeta over the last decade
  bool bound_ok = false;

  double y_min() const { return y.front(); }
  double y_max() const { return y.back(); }
  /// (zeta, zeta') at y in [0, y_max]; the launch series is used below y0.
  std::array<double, 2> at(double y) const;
};

/// Small-y series coefficient c = -(a + d a^2) / (2(d+2)).
double launch_correction(int d, double a);

/// Integrates the profile equation from the launch series. Throws NumericalFailure
/// ("shot rejected: ...") if zeta stops increasing, breaks the upper bound, or blows up,
/// and if the far-field amplitude is not flat to flat_tol.
ProfileSolution shoot_profile(int d, double a, const ShootOptions& options = {});

/// eps = L/2 with y^{1-d/2} zeta ~ L + b/y fitted over the last decade. Also refreshes
/// tail_spread. Throws NumericalFailure when the spread exceeds `flat_tol`.
double extract_epsilon(ProfileSolution& sol, double flat_tol = 0.01);

/// Bisection on a for the profile with the given amplitude eps.
ProfileSolution shoot_for_epsilon(int d, double target_eps, const ShootOptions& options = {},
                                  double tol = 1e-10);

/// X' = (2-Z) X + e^{2 tau}/2 ((d-2) Z - X),  Z' = X - (d-2) Z.
std::array<double, 2> nonautonomous_field(int d, double tau, double X, double Z);

/// (tau, X, Z) = (log(y)/2, 2 y^{2-d/2} zeta', y^{1-d/2} zeta) at every stored node.
std::vector<PhasePoint> to_phase(const ProfileSolution& sol);

/// M(r_i, t) = sigma_d t^{d/2-1} zeta(r_i^2/t). Throws DomainError for t <= 0 or r_i^2/t > y_max.
MassProfile selfsimilar_to_mass(const ModelParams& params, const ProfileSolution& sol, double t,
                                const RadialGrid& grid);

}  // namespace kslab
