#include "kslab/blowup_criteria.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kslab/errors.hpp"

namespace kslab {

double bump_function(double x_norm, double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("bump_function: alpha must lie in (0, 2]");
  const double s = 1.0 - x_norm * x_norm;
  if (s <= 0.0) return 0.0;
  return std::pow(s, 1.0 + 0.5 * alpha);
}

double bump_moment(const MassProfile& profile, double R, double alpha) {
  if (!(R > 0.0)) throw DomainError("bump_moment: R must be positive");
  const auto& grid = profile.grid();
  if (R > grid.r_max() * (1.0 + 1e-12)) throw DomainError("bump_moment: R beyond the grid");
  double w = 0.0;
  double prev = bump_function(0.0, alpha);
  for (std::size_t i = 1; i < profile.size(); ++i) {
    if (grid[i - 1] >= R) break;
    const double cur = bump_function(grid[i] / R, alpha);
    w += 0.5 * (prev + cur) * (profile[i] - profile[i - 1]);
    prev = cur;
  }
  return w;
}

HeatAtOrigin heat_at_origin(const ModelParams& params, const MassProfile& profile, double t) {
  if (!(t > 0.0)) throw DomainError("heat_at_origin: t must be positive");
  const auto r = profile.grid().nodes();
  const auto m = profile.values();
  const double four_t = 4.0 * t;
  // \int_0^R e^{-r^2/4t} dM = e^{-R^2/4t} M(R) + \int_0^R (r / 2t) e^{-r^2/4t} M(r) dr
  double acc = 0.0;
  double prev = 0.0;
  for (std::size_t i = 1; i < r.size(); ++i) {
    const double cur = r[i] / (2.0 * t) * std::exp(-r[i] * r[i] / four_t) * m[i];
    acc += 0.5 * (r[i] - r[i - 1]) * (prev + cur);
    prev = cur;
  }
  const double R = r.back();
  const double edge = std::exp(-R * R / four_t) * m.back();
  const double pref = std::pow(std::numbers::pi * four_t, -0.5 * params.dim());
  return {pref * (acc + edge), pref * edge};
}

CriteriaReport criteria_report(const ModelParams& params, const MassProfile& profile,
                               const CriteriaOptions& options) {
  if (options.ladder_points < 2 || !(options.ladder_lo > 0.0) || !(options.ladder_hi > options.ladder_lo)) {
    throw DomainError("criteria_report: bad t-ladder");
  }
  CriteriaReport rep;
  const int d = params.dim();
  const auto& grid = profile.grid();
  const double R = grid.r_max();
  rep.sigma = params.sigma();
  rep.upper_bracket = 4.0 * rep.sigma * std::sqrt(std::numbers::pi * d);

  const double lo = std::log(options.ladder_lo * R * R);
  const double hi = std::log(options.ladder_hi * R * R);
  const double n = static_cast<double>(options.ladder_points - 1);
  for (std::size_t k = 0; k < options.ladder_points; ++k) {
    const double t = std::exp(lo + (hi - lo) * static_cast<double>(k) / n);
    const auto h = heat_at_origin(params, profile, t);
    rep.ladder.push_back({t, t * h.value, t * h.truncation});
    if (t * h.value > rep.sup_t_heat) {
      rep.sup_t_heat = t * h.value;
      rep.argsup_t = t;
    }
  }

  const double r_lo = std::max(grid[1], R * 1e-3);
  for (std::size_t k = 0; k < options.bump_radii; ++k) {
    const double frac = options.bump_radii > 1 ? static_cast<double>(k) / (options.bump_radii - 1) : 1.0;
    const double Rk = r_lo * std::pow(R / r_lo, frac);
    const double w = bump_moment(profile, Rk, options.alpha);
    rep.moments.push_back({Rk, w, std::pow(Rk, 2 - d) * w});
  }

  std::size_t argmax = 0;
  for (std::size_t i = 1; i < profile.size(); ++i) {
    const double z = std::pow(grid[i], 2 - d) * profile[i];
    if (z > rep.concentration) {
      rep.concentration = z;
      argmax = i;
    }
    if (grid[i] <= 10.0 * grid[1]) rep.concentration_origin = std::max(rep.concentration_origin, z);
  }
  rep.sup_at_boundary = argmax + 1 == profile.size();

  if (options.offcenter) {
    rep.offcenter = morrey_norm_offcenter(params, density_from_mass(params, profile), 0.5 * d, *options.offcenter);
  }

  rep.exceeds_2 = rep.sup_t_heat > 2.0;
  rep.exceeds_4sigma = rep.concentration > 4.0 * rep.sigma;
  rep.exceeds_upper_bracket = rep.concentration > rep.upper_bracket;
  rep.local_exceeds_upper_bracket = rep.concentration_origin > rep.upper_bracket;
  return rep;
}

}  // namespace kslab
