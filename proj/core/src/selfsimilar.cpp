#include "kslab/selfsimilar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kslab/errors.hpp"

namespace kslab {

namespace {

[[noreturn]] void reject(const std::string& why, double y) {
  std::ostringstream os;
  os << "shot rejected: " << why << " at y = " << y;
  throw NumericalFailure(os.str());
}

}  // namespace

double profile_rhs(int d, double y, double zeta, double zeta_prime) {
  if (!(y > 0.0)) throw DomainError("profile_rhs: y must be positive");
  const double b = d - 2.0;
  return -0.25 * zeta_prime + b / (2.0 * y) * zeta_prime + b / (8.0 * y) * zeta -
         zeta * zeta_prime / (2.0 * std::pow(y, 0.5 * d));
}

double profile_bound(int d, double y) {
  const double h = 0.5 * d;
  return (1.0 - 2.0 / d) * std::pow(y, h) + 4.0 * (d - 1.0) * std::pow(y, h - 1.0);
}

double launch_correction(int d, double a) { return -(a + d * a * a) / (2.0 * (d + 2.0)); }

std::array<double, 2> ProfileSolution::at(double yy) const {
  if (yy < 0.0 || yy > y_max() * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "profile evaluated at y = " << yy << " outside [0, " << y_max() << "]";
    throw DomainError(os.str());
  }
  const double h = 0.5 * dim;
  if (yy <= y_min()) {
    if (yy == 0.0) return {0.0, 0.0};
    return {a * std::pow(yy, h) + c * std::pow(yy, h + 1.0),
            h * a * std::pow(yy, h - 1.0) + (h + 1.0) * c * std::pow(yy, h)};
  }
  auto it = std::lower_bound(segments.begin(), segments.end(), yy,
                             [](const ode::DenseSegment<2>& s, double v) { return s.t1() < v; });
  if (it == segments.end()) --it;
  const auto v = (*it)(yy);
  return {v[0], v[1]};
}

double extract_epsilon(ProfileSolution& sol, double flat_tol) {
  const double h = 0.5 * sol.dim;
  const double y_hi = sol.y_max();
  const double y_lo = 0.1 * y_hi;
  double s1 = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
  double zmin = std::numeric_limits<double>::infinity();
  double zmax = -zmin;
  for (std::size_t k = 0; k < sol.y.size(); ++k) {
    if (sol.y[k] < y_lo) continue;
    const double g = std::pow(sol.y[k], 1.0 - h) * sol.zeta[k];
    const double x = 1.0 / sol.y[k];
    s1 += 1;
    sx += x;
    sxx += x * x;
    sy += g;
    sxy += x * g;
    zmin = std::min(zmin, g);
    zmax = std::max(zmax, g);
  }
  if (s1 < 3) throw NumericalFailure("extract_epsilon: too few samples in the last decade");
  const double den = s1 * sxx - sx * sx;
  const double limit = (sxx * sy - sx * sxy) / den;
  sol.tail_spread = zmax > 0.0 ? (zmax - zmin) / zmax : 0.0;
  if (sol.tail_spread > flat_tol) {
    std::ostringstream os;
    os << "extract_epsilon: tail not flat (relative spread " << sol.tail_spread << ")";
    throw NumericalFailure(os.str());
  }
  sol.epsilon = 0.5 * limit;
  return sol.epsilon;
}

ProfileSolution shoot_profile(int d, double a, const ShootOptions& opt) {
  if (d < 3) throw DomainError("shoot_profile: d must be >= 3");
  if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("shoot_profile: a must be >= 0");
  if (!(opt.y0 > 0.0 && opt.y_max > opt.y0) || opt.samples < 2) throw DomainError("shoot_profile: bad y range");

  ProfileSolution sol;
  sol.dim = d;
  sol.a = a;
  sol.c = launch_correction(d, a);
  const double h = 0.5 * d;

  sol.y.resize(opt.samples);
  const double ratio = std::log(opt.y_max / opt.y0) / static_cast<double>(opt.samples - 1);
  for (std::size_t k = 0; k < opt.samples; ++k) sol.y[k] = opt.y0 * std::exp(ratio * static_cast<double>(k));
  sol.y.back() = opt.y_max;

  if (a == 0.0) {
    sol.zeta.assign(opt.samples, 0.0);
    sol.zeta_prime.assign(opt.samples, 0.0);
    sol.bound_ok = true;
    ode::DenseSegment<2> flat;
    flat.t0 = opt.y0;
    flat.h = opt.y_max - opt.y0;
    sol.segments.push_back(flat);
    return sol;
  }

  const double y0 = opt.y0;
  const ode::State<2> init{a * std::pow(y0, h) + sol.c * std::pow(y0, h + 1.0),
                           h * a * std::pow(y0, h - 1.0) + (h + 1.0) * sol.c * std::pow(y0, h)};
  sol.zeta.reserve(opt.samples);
  sol.zeta_prime.reserve(opt.samples);
  sol.zeta.push_back(init[0]);
  sol.zeta_prime.push_back(init[1]);
  std::size_t next = 1;

  auto rhs = [d](double y, const ode::State<2>& s) { return ode::State<2>{s[1], profile_rhs(d, y, s[0], s[1])}; };
  ode::Options o;
  o.rel_tol = opt.rel_tol;
  o.abs_tol = opt.abs_tol;
  o.initial_step = 1e-3 * y0;
  auto observe = [&](const ode::Step<2>& s) {
    if (!std::isfinite(s.y[0]) || !std::isfinite(s.y[1])) reject("profile blew up", s.t);
    if (s.y[1] < 0.0) reject("profile stopped increasing", s.t);
    if (s.y[0] > profile_bound(d, s.t)) reject("upper bound violated", s.t);
    sol.segments.push_back(s.dense);
    while (next < opt.samples && sol.y[next] <= s.t * (1.0 + 1e-14)) {
      const auto v = next + 1 == opt.samples ? s.y : s.dense(sol.y[next]);
      sol.zeta.push_back(v[0]);
      sol.zeta_prime.push_back(v[1]);
      ++next;
    }
    return true;
  };
  ode::integrate<2>(rhs, y0, init, opt.y_max, o, observe);
  if (next != opt.samples) reject("integration stopped early", sol.y[next]);

  sol.bound_ok = true;
  for (std::size_t k = 0; k < opt.samples; ++k) {
    if (sol.zeta[k] > profile_bound(d, sol.y[k]) || sol.zeta_prime[k] < 0.0) sol.bound_ok = false;
  }
  if (!sol.bound_ok) reject("bound or monotonicity violated on the output grid", opt.y_max);
  extract_epsilon(sol, opt.flat_tol);
  return sol;
}

ProfileSolution shoot_for_epsilon(int d, double target_eps, const ShootOptions& opt, double tol) {
  if (!(target_eps > 0.0)) throw DomainError("shoot_for_epsilon: target must be positive");
  double lo = 0.0;
  double hi = target_eps;
  ProfileSolution best;
  for (int k = 0;; ++k) {
    if (k > 60) throw NumericalFailure("shoot_for_epsilon: could not bracket the target");
    best = shoot_profile(d, hi, opt);
    if (best.epsilon >= target_eps) break;
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > tol * hi) {
    const double mid = 0.5 * (lo + hi);
    auto s = shoot_profile(d, mid, opt);
    if (s.epsilon >= target_eps) {
      hi = mid;
      best = std::move(s);
    } else {
      lo = mid;
    }
  }
  return best;
}

std::array<double, 2> nonautonomous_field(int d, double tau, double X, double Z) {
  const double b = d - 2.0;
  return {(2.0 - Z) * X + 0.5 * std::exp(2.0 * tau) * (b * Z - X), X - b * Z};
}

std::vector<PhasePoint> to_phase(const ProfileSolution& sol) {
  const double h = 0.5 * sol.dim;
  std::vector<PhasePoint> out;
  out.reserve(sol.y.size());
  for (std::size_t k = 0; k < sol.y.size(); ++k) {
    const double y = sol.y[k];
    out.push_back({0.5 * std::log(y), 2.0 * std::pow(y, 2.0 - h) * sol.zeta_prime[k],
                   std::pow(y, 1.0 - h) * sol.zeta[k]});
  }
  return out;
}

MassProfile selfsimilar_to_mass(const ModelParams& params, const ProfileSolution& sol, double t,
                                const RadialGrid& grid) {
  if (!(t > 0.0)) throw DomainError("selfsimilar_to_mass: t must be positive");
  if (params.dim() != sol.dim) throw DomainError("selfsimilar_to_mass: dimension mismatch");
  const double pref = params.sigma() * std::pow(t, 0.5 * params.dim() - 1.0);
  std::vector<double> m(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) m[i] = pref * sol.at(grid[i] * grid[i] / t)[0];
  return MassProfile(grid, std::move(m), t);
}

}  // namespace kslab
