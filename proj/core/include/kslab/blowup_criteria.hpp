#pragma once

// Blowup diagnostics on initial data: bump-function moments, the heat semigroup
// at the origin t e^{t Delta} u_0(0), and concentration flags.

#include <optional>
#include <vector>

#include "kslab/morrey.hpp"
#include "kslab/radial.hpp"

namespace kslab {

/// (1 - x^2)_+^{1 + alpha/2}. Throws DomainError unless 0 < alpha <= 2.
double bump_function(double x_norm, double alpha = 2.0);

/// w_R = \int_0^R psi(r/R) dM(r), trapezoidal Stieltjes sum over grid increments.
/// Throws DomainError for R <= 0 or R beyond the grid.
double bump_moment(const MassProfile& profile, double R, double alpha = 2.0);

struct HeatAtOrigin {
  double value = 0.0;       ///< e^{t Delta} u_0 (0)
  double truncation = 0.0;  ///< kernel-weighted boundary mass (4 pi t)^{-d/2} e^{-R^2/4t} M(R)
};

/// (4 pi t)^{-d/2} \int_0^{R_max} e^{-r^2/4t} dM(r), integrated by parts against M.
HeatAtOrigin heat_at_origin(const ModelParams& params, const MassProfile& profile, double t);

struct CriteriaOptions {
  double alpha = 2.0;
  std::size_t ladder_points = 40;
  double ladder_lo = 1e-4;  ///< in units of R_max^2
  double ladder_hi = 1e2;
  std::size_t bump_radii = 12;
  std::optional<BoxSampling> offcenter;  ///< brute-force Morrey value when set
};

struct CriteriaReport {
  struct HeatSample {
    double t, t_heat, truncation;
  };
  std::vector<HeatSample> ladder;
  double sup_t_heat = 0.0;
  double argsup_t = 0.0;

  struct Moment {
    double R, w, scaled;  ///< scaled = R^{2-d} w
  };
  std::vector<Moment> moments;

  double concentration = 0.0;         ///< sup_r r^{2-d} M
  double concentration_origin = 0.0;  ///< max of r^{2-d} M over the first decade of positive nodes
  std::optional<double> offcenter;    ///< brute-force M^{d/2} value

  double sigma = 0.0;
  double upper_bracket = 0.0;  ///< 4 sigma_d sqrt(pi d)

  bool exceeds_2 = false;              ///< sup_t t e^{t Delta} u_0(0) > 2
  bool exceeds_4sigma = false;         ///< concentration > 4 sigma_d
  bool exceeds_upper_bracket = false;  ///< concentration > 4 sigma_d sqrt(pi d)
  bool local_exceeds_upper_bracket = false;  ///< same test near the origin
  bool sup_at_boundary = false;  ///< concentration attained at the last node (supremum may lie beyond)
};

CriteriaReport criteria_report(const ModelParams& params, const MassProfile& profile,
                               const CriteriaOptions& options = {});

}  // namespace kslab
