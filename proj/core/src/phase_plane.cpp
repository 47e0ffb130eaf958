#include "kslab/phase_plane.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kslab/errors.hpp"

namespace kslab {

namespace {

// s - 1 - log(s), with a series near s = 1.
double shifted_log_gap(double s) {
  const double x = s - 1.0;
  if (std::abs(x) < 1e-2) {
    double term = x;
    double acc = 0.0;
    for (int k = 2; k <= 12; ++k) {
      term *= -x;
      acc += -term / k;
    }
    return acc;
  }
  return x - std::log(s);
}

ode::State<2> field(int d, const ode::State<2>& y) {
  auto f = vector_field(d, y[0], y[1]);
  return {f[0], f[1]};
}

ode::State<2> rk4_flow(int d, ode::State<2> y, double span, int substeps) {
  const double h = span / substeps;
  for (int k = 0; k < substeps; ++k) {
    const auto k1 = field(d, y);
    const auto k2 = field(d, {y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]});
    const auto k3 = field(d, {y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]});
    const auto k4 = field(d, {y[0] + h * k3[0], y[1] + h * k3[1]});
    for (int i = 0; i < 2; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return y;
}

}  // namespace

std::array<double, 2> vector_field(int d, double X, double Z) {
  return {(2.0 - Z) * X, X - (d - 2.0) * Z};
}

double lyapunov(int d, double X, double Z) {
  if (!(X > 0.0)) throw DomainError("lyapunov: X must be positive");
  const double c = 2.0 * (d - 2.0);
  return 0.5 * (Z - 2.0) * (Z - 2.0) + c * shifted_log_gap(X / c);
}

double lyapunov_rate_numeric(int d, double X, double Z, double h) {
  const ode::State<2> y{X, Z};
  constexpr int kSub = 16;
  auto L = [&](double s) {
    const auto p = rk4_flow(d, y, s, kSub);
    return lyapunov(d, p[0], p[1]);
  };
  return (L(-2.0 * h) - 8.0 * L(-h) + 8.0 * L(h) - L(2.0 * h)) / (12.0 * h);
}

std::pair<std::complex<double>, std::complex<double>> linearization_eigenvalues(int d, FixedPoint at) {
  if (d < 3) throw DomainError("linearization_eigenvalues: d must be >= 3");
  if (at == FixedPoint::Origin) return {{2.0, 0.0}, {-(d - 2.0), 0.0}};
  const double b = d - 2.0;
  const double disc = static_cast<double>((d - 2) * (d - 10));
  if (disc < 0.0) {
    const double im = 0.5 * std::sqrt(-disc);
    return {{-0.5 * b, im}, {-0.5 * b, -im}};
  }
  const double s = 0.5 * std::sqrt(disc);
  return {{-0.5 * b + s, 0.0}, {-0.5 * b - s, 0.0}};
}

int interior_discriminant_sign(int d) {
  const long v = static_cast<long>(d - 2) * (d - 10);
  return (v > 0) - (v < 0);
}

PhasePoint PhaseTrajectory::at(double tau) const {
  if (points.empty() || tau < tau_begin() || tau > tau_end()) {
    std::ostringstream os;
    os << "phase trajectory evaluated at tau = " << tau << " outside its range";
    throw DomainError(os.str());
  }
  if (segments.empty() || tau == tau_begin()) return points.front();
  auto it = std::lower_bound(segments.begin(), segments.end(), tau,
                             [](const ode::DenseSegment<2>& s, double v) { return s.t1() < v; });
  if (it == segments.end()) --it;
  const auto y = (*it)(tau);
  return {tau, y[0], y[1]};
}

PhaseTrajectory integrate_separatrix(int d, const SeparatrixOptions& opt) {
  if (d < 3) throw DomainError("integrate_separatrix: d must be >= 3");
  if (!(opt.delta > 0.0) || !(opt.central_density > 0.0)) {
    throw DomainError("integrate_separatrix: delta and central density must be positive");
  }
  const double norm = std::hypot(static_cast<double>(d), 1.0);
  const double X0 = opt.delta * d / norm;
  const double Z0 = opt.delta / norm;
  const double tau0 = 0.5 * std::log(X0 / opt.central_density);
  if (!(opt.tau_max > tau0)) throw DomainError("integrate_separatrix: tau_max precedes the launch point");

  const double Xs = 2.0 * (d - 2.0);
  PhaseTrajectory traj;
  traj.dim = d;
  traj.points.push_back({tau0, X0, Z0});

  ode::Options o;
  o.rel_tol = opt.rel_tol;
  // The state starts at size delta; an absolute tolerance above rel_tol * delta would swamp it.
  o.abs_tol = std::min(opt.abs_tol, opt.rel_tol * opt.delta);
  auto rhs = [d](double, const ode::State<2>& y) { return field(d, y); };
  auto observe = [&](const ode::Step<2>& s) {
    if (!(s.y[0] > 0.0) || !(s.y[1] > 0.0)) {
      std::ostringstream os;
      os << "separatrix left the quadrant at tau = " << s.t << " (X = " << s.y[0] << ", Z = " << s.y[1] << ")";
      throw NumericalFailure(os.str());
    }
    traj.points.push_back({s.t, s.y[0], s.y[1]});
    traj.segments.push_back(s.dense);
    const double dist = std::hypot(s.y[0] - Xs, s.y[1] - 2.0);
    if (dist < opt.stop_radius) {
      traj.converged = true;
      return false;
    }
    return true;
  };
  ode::integrate<2>(rhs, tau0, ode::State<2>{X0, Z0}, opt.tau_max, o, observe, &traj.stats);
  const auto& last = traj.points.back();
  traj.terminal_distance = std::hypot(last.X - Xs, last.Z - 2.0);
  return traj;
}

std::size_t count_crossings(const PhaseTrajectory& traj, double level) {
  std::size_t n = 0;
  int prev = 0;
  for (const auto& p : traj.points) {
    const double v = p.Z - level;
    const int s = (v > 0.0) - (v < 0.0);
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++n;
    prev = s;
  }
  return n;
}

MassProfile stationary_mass_profile(const ModelParams& params, const PhaseTrajectory& traj, const RadialGrid& grid) {
  if (traj.dim != params.dim()) throw DomainError("stationary_mass_profile: dimension mismatch");
  std::vector<double> m(grid.size(), 0.0);
  const double sigma = params.sigma();
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double r = grid[i];
    const auto p = traj.at(std::log(r));
    m[i] = sigma * std::pow(r, params.dim() - 2) * p.Z;
  }
  return MassProfile(grid, std::move(m));
}

}  // namespace kslab
