#include "kslab/comparison.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "kslab/errors.hpp"

namespace kslab {

namespace {

// Kernel cutoff e^{-s^2/4t} < 1e-16.
const double kCutoffLog = 16.0 * std::numbers::ln10;

}  // namespace

Barrier::Barrier(const ModelParams& params, double K, double eps, double p)
    : d_(params.dim()), sigma_(params.sigma()), K_(K), eps_(eps), p_(p) {
  const double d = d_;
  if (!(K > 0.0) || !std::isfinite(K)) throw DomainError("barrier: K must be positive");
  if (!(p > 0.5 * d && p < d)) throw DomainError("barrier: p must lie in (d/2, d)");
  if (!(eps > 0.0 && eps < d / (2.0 * p))) throw DomainError("barrier: eps must lie in (0, d/(2p))");
}

double Barrier::crossover_radius() const {
  const double d = d_;
  return std::pow(2.0 * eps_ * sigma_ / K_, 1.0 / (2.0 - d / p_));
}

double barrier_value(const Barrier& b, double r) {
  if (r < 0.0) throw DomainError("barrier_value: r must be >= 0");
  const double d = b.dim();
  const double sigma = sphere_measure(b.dim());
  return std::min(b.K() * std::pow(r, d - d / b.p()), 2.0 * b.eps() * sigma * std::pow(r, d - 2.0));
}

std::optional<BarrierViolation> barrier_check(const MassProfile& profile, const Barrier& b) {
  const auto& grid = profile.grid();
  for (std::size_t i = 1; i < profile.size(); ++i) {
    const double bv = barrier_value(b, grid[i]);
    if (profile[i] >= bv) return BarrierViolation{i, grid[i], profile[i], bv};
  }
  return std::nullopt;
}

SampledFunction::SampledFunction(std::vector<double> x, std::vector<double> values)
    : x_(std::move(x)), v_(std::move(values)) {
  if (x_.size() != v_.size() || x_.size() < 2) throw InvalidProfile("sampled function needs >= 2 matching samples");
  for (std::size_t i = 1; i < x_.size(); ++i) {
    if (!(x_[i] > x_[i - 1])) throw InvalidProfile("sampled function nodes must increase");
  }
  for (double v : v_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidProfile("sampled function must be finite and >= 0");
  }
  std::vector<double> slope(x_.size() + 1, 0.0);
  double steepest = 0.0;
  for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
    slope[i + 1] = (v_[i + 1] - v_[i]) / (x_[i + 1] - x_[i]);
    steepest = std::max(steepest, std::abs(slope[i + 1]));
  }
  for (std::size_t i = 0; i < x_.size(); ++i) {
    const double jump = slope[i + 1] - slope[i];
    if (std::abs(jump) > 1e-12 * steepest) {
      ramps_.push_back({x_[i], jump});
    } else {
      dropped_ += std::abs(jump);
    }
  }
}

double SampledFunction::operator()(double x) const {
  if (x <= x_.front()) return v_.front();
  if (x >= x_.back()) return v_.back();
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double w = (x - x_[k]) / (x_[k + 1] - x_[k]);
  return (1.0 - w) * v_[k] + w * v_[k + 1];
}

double SampledFunction::sup() const { return *std::max_element(v_.begin(), v_.end()); }

HeatValue half_line_heat(const HalfLineDatum& m0, double r, double t, std::span<const double> breaks) {
  if (!(t > 0.0)) throw DomainError("half_line_heat: t must be positive");
  if (r < 0.0) throw DomainError("half_line_heat: r must be >= 0");
  if (r == 0.0) return {};

  const double width = std::sqrt(4.0 * t * kCutoffLog);
  const double lo = std::max(0.0, r - width);
  const double hi = r + width;
  const double pref = 1.0 / std::sqrt(4.0 * std::numbers::pi * t);

  auto integrand = [&](double x) {
    const double s = r - x;
    return std::exp(-s * s / (4.0 * t)) * -std::expm1(-r * x / t) * m0(x);
  };

  std::vector<double> cuts{lo, hi};
  const double sq = std::sqrt(t);
  for (double c : {r - 5.0 * sq, r - 2.0 * sq, r, r + 2.0 * sq, r + 5.0 * sq}) {
    if (c > lo && c < hi) cuts.push_back(c);
  }
  for (double c : breaks) {
    if (c > lo && c < hi) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  HeatValue out;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double err = 0.0;
    out.value += GK::integrate(integrand, cuts[k], cuts[k + 1], 10, 1e-10, &err);
    out.error += err;
  }
  out.value *= pref;
  out.error *= pref;
  const double tail = 0.5 * std::erfc(std::sqrt(kCutoffLog));
  out.error += tail * (m0(hi) + (lo > 0.0 ? m0(lo) : 0.0));
  return out;
}

HeatValue half_line_heat(const SampledFunction& m0, double r, double t) {
  if (!(t > 0.0)) throw DomainError("half_line_heat: t must be positive");
  if (r < 0.0) throw DomainError("half_line_heat: r must be >= 0");
  if (r == 0.0) return {};

  const double s = std::sqrt(2.0 * t);
  auto H = [s](double y) {
    const double z = y / s;
    return y * 0.5 * std::erfc(-z / std::numbers::sqrt2) + s * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  };
  HeatValue out;
  out.value = m0.base() * std::erf(r / std::sqrt(4.0 * t));
  double magnitude = std::abs(out.value);
  for (const auto& ramp : m0.ramps()) {
    const double term = ramp.slope_jump * (H(r - ramp.x) - H(-r - ramp.x));
    out.value += term;
    magnitude += std::abs(ramp.slope_jump) * (std::abs(r - ramp.x) + s);
  }
  out.error = 2.0 * r * m0.dropped_jumps() + 8.0 * std::numeric_limits<double>::epsilon() * magnitude;
  return out;
}

SampledFunction comparison_majorant(const ModelParams& params, const RadialGrid& grid, double K, double p,
                                    double total_mass) {
  const double d = params.dim();
  std::vector<double> x(grid.nodes().begin(), grid.nodes().end());
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    v[i] = std::min({K * std::pow(x[i], d - d / p), chandrasekhar_mass(params, x[i]), total_mass});
  }
  return SampledFunction(std::move(x), std::move(v));
}

ComparisonReport comparison_check(const EvolutionResult& result, const SampledFunction& m0, double rel_tol) {
  ComparisonReport rep;
  if (result.trajectory.empty()) return rep;
  const double t0 = result.trajectory.front().time();
  const double total = result.trajectory.front().total();
  rep.tolerance = rel_tol * total;
  rep.worst_excess = -std::numeric_limits<double>::infinity();

  for (const auto& prof : result.trajectory) {
    const double t = prof.time() - t0;
    const auto& grid = prof.grid();
    for (std::size_t i = 1; i < prof.size(); ++i) {
      HeatValue m = t > 0.0 ? half_line_heat(m0, grid[i], t) : HeatValue{m0(grid[i]), 0.0};
      const double excess = prof[i] - m.value - rep.tolerance - m.error;
      ++rep.checked;
      rep.worst_excess = std::max(rep.worst_excess, excess);
      if (excess > 0.0) {
        ++rep.violations;
        if (!rep.first_violation) rep.first_violation = ComparisonReport::Point{prof.time(), grid[i], prof[i], m.value};
      }
    }
  }
  return rep;
}

double decay_slope(std::span<const double> t, std::span<const double> values, double t_lo, double t_hi) {
  if (t.size() != values.size()) throw DomainError("decay_slope: series lengths differ");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_lo || t[k] > t_hi) continue;
    if (!(t[k] > 0.0) || !(values[k] > 0.0)) {
      std::ostringstream os;
      os << "decay_slope: nonpositive sample at t = " << t[k];
      throw DomainError(os.str());
    }
    const double x = std::log(t[k]);
    const double y = std::log(values[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw DomainError("decay_slope: need at least two samples in the window");
  const double nn = static_cast<double>(n);
  const double den = nn * sxx - sx * sx;
  if (!(den > 0.0)) throw DomainError("decay_slope: window has a single distinct time");
  return (nn * sxy - sx * sy) / den;
}

}  // namespace kslab
