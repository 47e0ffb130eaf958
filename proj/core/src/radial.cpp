#include "kslab/radial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "kslab/errors.hpp"

namespace kslab {

namespace {

// Relative slack used when validating monotonicity and signs of mass data.
constexpr double kProfileTol = 1e-10;

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Index k with nodes[k] <= r <= nodes[k+1].
std::size_t bracket(std::span<const double> nodes, double r) {
  auto it = std::upper_bound(nodes.begin(), nodes.end(), r);
  std::size_t k = static_cast<std::size_t>(it - nodes.begin());
  if (k == 0) return 0;
  return std::min(k - 1, nodes.size() - 2);
}

double lerp_at(std::span<const double> nodes, std::span<const double> values, double r) {
  std::size_t k = bracket(nodes, r);
  double w = (r - nodes[k]) / (nodes[k + 1] - nodes[k]);
  return (1.0 - w) * values[k] + w * values[k + 1];
}

}  // namespace

double sphere_measure(int d) {
  if (d < 2) throw DomainError("sphere_measure: dimension must be >= 2");
  const double half = 0.5 * d;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

ModelParams::ModelParams(int d) : d_(d), sigma_(0.0) {
  if (d < 3) throw DomainError("dimension must be >= 3, got " + std::to_string(d));
  sigma_ = sphere_measure(d);
}

RadialGrid::RadialGrid(std::vector<double> nodes) {
  if (nodes.size() < kMinIntervals + 1) {
    throw InvalidProfile("radial grid needs at least 17 nodes, got " + std::to_string(nodes.size()));
  }
  if (nodes.front() != 0.0) throw InvalidProfile("radial grid must start at r = 0");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1]) || !std::isfinite(nodes[i])) {
      std::ostringstream os;
      os << "radial grid not strictly increasing at node " << i;
      throw InvalidProfile(os.str());
    }
  }
  const double h = nodes[1];
  uniform_ = true;
  for (std::size_t i = 1; i < nodes.size() && uniform_; ++i) {
    uniform_ = std::abs((nodes[i] - nodes[i - 1]) - h) <= 1e-9 * h;
  }
  nodes_ = std::make_shared<const std::vector<double>>(std::move(nodes));
}

RadialGrid RadialGrid::uniform(std::size_t intervals, double r_max) {
  if (!(r_max > 0.0)) throw DomainError("uniform grid: r_max must be positive");
  std::vector<double> r(intervals + 1);
  const double h = r_max / static_cast<double>(intervals);
  for (std::size_t i = 0; i <= intervals; ++i) r[i] = h * static_cast<double>(i);
  r.back() = r_max;
  return RadialGrid(std::move(r));
}

RadialGrid RadialGrid::log_spaced(std::size_t intervals, double r_min, double r_max) {
  if (!(r_min > 0.0) || !(r_max > r_min)) throw DomainError("log grid: need 0 < r_min < r_max");
  std::vector<double> r(intervals + 1);
  r[0] = 0.0;
  const double ratio = std::log(r_max / r_min) / static_cast<double>(intervals - 1);
  for (std::size_t i = 1; i <= intervals; ++i) {
    r[i] = r_min * std::exp(ratio * static_cast<double>(i - 1));
  }
  r.back() = r_max;
  return RadialGrid(std::move(r));
}

MassProfile::MassProfile(RadialGrid grid, std::vector<double> values, double time)
    : grid_(std::move(grid)), values_(std::move(values)), time_(time) {
  if (values_.size() != grid_.size()) throw InvalidProfile("mass profile size does not match grid");
  if (!(time_ >= 0.0)) throw InvalidProfile("mass profile time must be >= 0");
  const double tol = kProfileTol * std::max(max_abs(values_), std::numeric_limits<double>::min());
  if (std::abs(values_[0]) > tol) throw InvalidProfile("mass profile must satisfy M(0) = 0");
  values_[0] = 0.0;
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw InvalidProfile("mass profile has non-finite values");
    if (values_[i] < -tol) throw InvalidProfile("mass profile has negative values");
    if (values_[i] < values_[i - 1] - tol) {
      std::ostringstream os;
      os << "mass profile decreases at r = " << grid_[i];
      throw InvalidProfile(os.str());
    }
  }
}

double MassProfile::at(double r) const {
  if (r < 0.0 || r > grid_.r_max()) throw DomainError("mass profile evaluated outside its grid");
  return lerp_at(grid_.nodes(), values_, r);
}

MassProfile MassProfile::retimed(double time) const {
  MassProfile copy = *this;
  copy.time_ = time;
  return copy;
}

DensityProfile::DensityProfile(RadialGrid grid, std::vector<double> values, double time)
    : grid_(std::move(grid)), values_(std::move(values)), time_(time) {
  if (values_.size() != grid_.size()) throw InvalidProfile("density profile size does not match grid");
  for (double u : values_) {
    if (!(u >= 0.0) || !std::isfinite(u)) throw InvalidProfile("density must be finite and nonnegative");
  }
}

double DensityProfile::at(double r) const {
  if (r < 0.0) throw DomainError("density evaluated at negative radius");
  if (r > grid_.r_max()) return 0.0;
  return lerp_at(grid_.nodes(), values_, r);
}

double chandrasekhar_mass(const ModelParams& params, double r) {
  if (r < 0.0) throw DomainError("chandrasekhar_mass: r must be >= 0");
  return 2.0 * params.sigma() * std::pow(r, params.dim() - 2);
}

double chandrasekhar_density(const ModelParams& params, double r) {
  return 2.0 * (params.dim() - 2) / (r * r);
}

double explicit_blowup_mass(const ModelParams& params, double blowup_time, double r, double t) {
  if (!(t < blowup_time)) throw DomainError("explicit_blowup_mass: requires t < T");
  if (r < 0.0) throw DomainError("explicit_blowup_mass: r must be >= 0");
  const int d = params.dim();
  const double c = 2.0 * (d - 2) * (blowup_time - t);
  return 4.0 * params.sigma() * std::pow(r, d) / (r * r + c);
}

DensityProfile density_from_mass(const ModelParams& params, const MassProfile& profile) {
  const auto r = profile.grid().nodes();
  const auto m = profile.values();
  const std::size_t n = r.size();
  const int d = params.dim();
  const double sigma = params.sigma();
  const double scale = max_abs(m);
  std::vector<double> u(n);

  auto emit = [&](std::size_t i, double dm, double h) {
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * scale / h;
    if (dm < -slack) {
      std::ostringstream os;
      os << "negative mass derivative " << dm << " at r = " << r[i];
      throw InvalidProfile(os.str());
    }
    u[i] = std::max(dm, 0.0) / (sigma * std::pow(r[i], d - 1));
  };

  // Weights on the two adjacent differences, exact for M = r^d and M = r^{d+2}.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double lo = std::log(r[i - 1] / r[i]);
    const double hi = std::log(r[i + 1] / r[i]);
    const double a1 = i == 1 ? 1.0 : -std::expm1(d * lo);
    const double a2 = i == 1 ? 1.0 : -std::expm1((d + 2) * lo);
    const double b1 = std::expm1(d * hi);
    const double b2 = std::expm1((d + 2) * hi);
    const double det = a1 * b2 - a2 * b1;
    const double wl = (d * b2 - (d + 2) * b1) / (det * r[i]);
    const double wr = ((d + 2) * a1 - d * a2) / (det * r[i]);
    const double dm = wl * (m[i] - m[i - 1]) + wr * (m[i + 1] - m[i]);
    emit(i, dm, std::min(r[i] - r[i - 1], r[i + 1] - r[i]));
  }
  {
    const std::size_t k = n - 1;
    const double h1 = r[k - 1] - r[k - 2];
    const double h2 = r[k] - r[k - 1];
    double dm = h2 / (h1 * (h1 + h2)) * m[k - 2] - (h1 + h2) / (h1 * h2) * m[k - 1] +
                (h1 + 2.0 * h2) / (h2 * (h1 + h2)) * m[k];
    // The one-sided three-point formula is not sign-preserving on monotone data.
    const double backward = (m[k] - m[k - 1]) / h2;
    if (dm < 0.0 && backward >= 0.0) dm = backward;
    emit(k, dm, std::min(h1, h2));
  }
  u[0] = d * m[1] / (sigma * std::pow(r[1], d));
  return DensityProfile(profile.grid(), std::move(u), profile.time());
}

MassProfile mass_from_density(const ModelParams& params, const DensityProfile& density) {
  const auto r = density.grid().nodes();
  const auto u = density.values();
  const int d = params.dim();
  std::vector<double> m(r.size(), 0.0);
  double prev = u[0] * std::pow(r[0], d - 1);
  for (std::size_t i = 1; i < r.size(); ++i) {
    const double cur = u[i] * std::pow(r[i], d - 1);
    m[i] = m[i - 1] + 0.5 * (r[i] - r[i - 1]) * (prev + cur) * params.sigma();
    prev = cur;
  }
  return MassProfile(density.grid(), std::move(m), density.time());
}

double radial_concentration(const ModelParams& params, const MassProfile& profile) {
  return centered_morrey(params, profile, 0.5 * params.dim());
}

double centered_morrey(const ModelParams& params, const MassProfile& profile, double p) {
  if (!(p >= 1.0)) throw DomainError("centered_morrey: p must be >= 1");
  const auto r = profile.grid().nodes();
  const auto m = profile.values();
  const double expo = params.dim() * (1.0 / p - 1.0);
  double best = 0.0;
  for (std::size_t i = 1; i < r.size(); ++i) best = std::max(best, std::pow(r[i], expo) * m[i]);
  return best;
}

double lq_norm(const ModelParams& params, const DensityProfile& density, double q) {
  if (!(q >= 1.0) || !std::isfinite(q)) throw DomainError("lq_norm: q must satisfy 1 <= q < inf");
  const auto r = density.grid().nodes();
  const auto u = density.values();
  const int d = params.dim();
  double acc = 0.0;
  double prev = std::pow(u[0], q) * std::pow(r[0], d - 1);
  for (std::size_t i = 1; i < r.size(); ++i) {
    const double cur = std::pow(u[i], q) * std::pow(r[i], d - 1);
    acc += 0.5 * (r[i] - r[i - 1]) * (prev + cur);
    prev = cur;
  }
  return std::pow(params.sigma() * acc, 1.0 / q);
}

double potential_gradient_radial(const ModelParams& params, const MassProfile& profile, double r) {
  if (!(r > 0.0)) throw DomainError("potential_gradient_radial: r must be > 0");
  return -profile.at(r) / (params.sigma() * std::pow(r, params.dim() - 1));
}

}  // namespace kslab
