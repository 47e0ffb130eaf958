#include "kslab/mass_pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "kslab/errors.hpp"

namespace kslab {

namespace {

// ARS(2,2,2): L-stable implicit part, second-order explicit companion.
const double kGamma = 1.0 - 1.0 / std::numbers::sqrt2;
const double kDelta = 1.0 - 1.0 / (2.0 * kGamma);

// b^k - a^k for 0 <= a < b without cancellation.
double power_difference(double a, double b, int k) {
  double acc = 0.0;
  double ap = 1.0;
  for (int j = 0; j < k; ++j) {
    acc += ap * std::pow(b, k - 1 - j);
    ap *= a;
  }
  return (b - a) * acc;
}

DiagnosticSample sample(const ModelParams& params, const EvolutionState& state, const SolverConfig& config) {
  DiagnosticSample s;
  const auto& p = state.profile;
  s.t = state.t;
  s.mass = p.total();
  s.half_mass = p.at(0.5 * p.grid().r_max());
  s.concentration = radial_concentration(params, p);
  s.u0 = central_density(params, p);
  s.dt = state.last_dt;
  s.steps = state.steps;
  if (!config.lq_exponents.empty()) {
    const auto u = density_from_mass(params, p);
    for (double q : config.lq_exponents) s.lq.push_back(lq_norm(params, u, q));
  }
  return s;
}

}  // namespace

RadialGrid GridSpec::build() const {
  if (spacing == GridSpacing::Log) return RadialGrid::log_spaced(intervals, r_min, r_max);
  return RadialGrid::uniform(intervals, r_max);
}

void SolverConfig::validate(const ModelParams& params) const {
  auto fail = [](const std::string& field, const std::string& what) {
    throw ValidationError("solver." + field + ": " + what);
  };
  (void)params;
  if (grid.intervals < RadialGrid::kMinIntervals) fail("N", "needs at least 16 intervals");
  if (!(grid.r_max > 0.0)) fail("R_max", "must be positive");
  if (grid.spacing == GridSpacing::Log && !(grid.r_min > 0.0 && grid.r_min < grid.r_max)) {
    fail("r_min", "must lie in (0, R_max)");
  }
  if (!(dt_min > 0.0)) fail("dt_min", "must be positive");
  if (!(dt_min < dt_init)) fail("dt_init", "must exceed dt_min");
  if (!(dt_init <= dt_max)) fail("dt_max", "must be >= dt_init");
  if (!(growth >= 1.0)) fail("growth", "must be >= 1");
  if (!(cfl > 0.0 && cfl <= 1.0)) fail("cfl", "must lie in (0, 1]");
  if (!(u_max > 0.0)) fail("u_max", "must be positive");
  if (!(z_max_over_sigma > 2.0)) fail("z_max", "must exceed 2 sigma_d");
  if (!(collapse_dt >= 0.0)) fail("collapse_dt", "must be >= 0");
  if (!(monotone_tol >= 0.0)) fail("monotone_tol", "must be >= 0");
  if (!(sample_interval >= 0.0)) fail("sample_interval", "must be >= 0");
  for (double q : lq_exponents) {
    if (!(q >= 1.0) || !std::isfinite(q)) fail("lq", "exponents must satisfy 1 <= q < inf");
  }
}

std::string to_string(BlowupTrigger trigger) {
  switch (trigger) {
    case BlowupTrigger::Density: return "density";
    case BlowupTrigger::Concentration: return "concentration";
    case BlowupTrigger::StepCollapse: return "step_collapse";
  }
  return "unknown";
}

std::string to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::ReachedHorizon: return "ReachedHorizon";
    case OutcomeKind::BlowupDetected: return "BlowupDetected";
    case OutcomeKind::StepFailure: return "StepFailure";
  }
  return "unknown";
}

double central_density(const ModelParams& params, const MassProfile& profile) {
  const double r1 = profile.grid()[1];
  return params.dim() * profile[1] / (params.sigma() * std::pow(r1, params.dim()));
}

MassSolver::MassSolver(const ModelParams& params, const RadialGrid& grid, SolverConfig config)
    : params_(params), grid_(grid), config_(std::move(config)) {
  const auto r = grid_.nodes();
  const std::size_t n = r.size();
  const int d = params_.dim();
  up_.assign(n, 0.0);
  down_.assign(n, 0.0);
  wl_.assign(n, 0.0);
  wr_.assign(n, 0.0);
  drift_coef_.assign(n, 0.0);
  spacing_.assign(n, 0.0);
  // Interval j = [r_j, r_{j+1}]: flux weight d / (r_{j+1}^d - r_j^d) and the matching
  // average g_j of r^2, so the stencil is exact on 1, r^d and r^{d+2}.
  std::vector<double> w(n - 1), g(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double pd = power_difference(r[j], r[j + 1], d);
    w[j] = d / pd;
    g[j] = d * power_difference(r[j], r[j + 1], d + 2) / ((d + 2) * pd);
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h1 = r[i] - r[i - 1];
    const double h2 = r[i + 1] - r[i];
    const double ri = std::pow(r[i], d - 1);
    const double vol = (g[i] - g[i - 1]) / (2.0 * r[i]);
    up_[i] = ri * w[i] / vol;
    down_[i] = ri * w[i - 1] / vol;
    wl_[i] = h2 / (h1 * (h1 + h2));
    wr_[i] = h1 / (h2 * (h1 + h2));
    drift_coef_[i] = 1.0 / (params_.sigma() * ri);
    spacing_[i] = std::min(h1, h2);
  }
  k1_.assign(n, 0.0);
  k2_.assign(n, 0.0);
  l2_.assign(n, 0.0);
  y2_.assign(n, 0.0);
  rhs_.assign(n, 0.0);
  cp_.assign(n, 0.0);
  dp_.assign(n, 0.0);
}

void MassSolver::linear(std::span<const double> m, std::span<double> out) const {
  const std::size_t n = m.size();
  out[0] = 0.0;
  out[n - 1] = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out[i] = up_[i] * (m[i + 1] - m[i]) - down_[i] * (m[i] - m[i - 1]);
  }
}

void MassSolver::transport(std::span<const double> m, std::span<double> out) const {
  const std::size_t n = m.size();
  out[0] = 0.0;
  out[n - 1] = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double dm = wl_[i] * (m[i] - m[i - 1]) + wr_[i] * (m[i + 1] - m[i]);
    out[i] = drift_coef_[i] * m[i] * dm;
  }
}

std::vector<double> MassSolver::rates(std::span<const double> m) const {
  std::vector<double> a(m.size()), b(m.size());
  linear(m, a);
  transport(m, b);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

double MassSolver::boundary_value(double t) const {
  if (config_.outer_boundary) return config_.outer_boundary(t);
  return std::numeric_limits<double>::quiet_NaN();
}

// Solves (I - coef L) y = rhs on interior nodes with y_0 = 0, y_N = boundary.
bool MassSolver::implicit_solve(std::span<const double> rhs, double coef, double boundary,
                                std::span<double> out) {
  const std::size_t n = rhs.size();
  const std::size_t last = n - 2;
  for (std::size_t i = 1; i <= last; ++i) {
    const double lower = i > 1 ? -coef * down_[i] : 0.0;
    const double diag = 1.0 + coef * (up_[i] + down_[i]);
    const double upper = i < last ? -coef * up_[i] : 0.0;
    double b = rhs[i];
    if (i == last) b += coef * up_[i] * boundary;
    const double denom = diag - (i > 1 ? lower * cp_[i - 1] : 0.0);
    if (!(std::abs(denom) > 0.0) || !std::isfinite(denom)) return false;
    cp_[i] = upper / denom;
    dp_[i] = (b - (i > 1 ? lower * dp_[i - 1] : 0.0)) / denom;
  }
  out[0] = 0.0;
  out[n - 1] = boundary;
  out[last] = dp_[last];
  for (std::size_t i = last - 1; i >= 1; --i) out[i] = dp_[i] - cp_[i] * out[i + 1];
  for (std::size_t i = 1; i <= last; ++i) {
    if (!std::isfinite(out[i])) return false;
  }
  return true;
}

double MassSolver::stable_dt(const MassProfile& profile) const {
  const auto m = profile.values();
  double limit = std::numeric_limits<double>::infinity();
  double drift_max = 0.0;
  for (std::size_t i = 1; i + 1 < m.size(); ++i) {
    const double a = drift_coef_[i] * m[i];
    if (a > 0.0) limit = std::min(limit, spacing_[i] / a);
    drift_max = std::max(drift_max, a);
  }
  if (drift_max > 0.0) limit = std::min(limit, 2.0 / (drift_max * drift_max));
  if (config_.scheme == TimeScheme::Explicit) {
    double lmax = 0.0;
    for (std::size_t i = 1; i + 1 < m.size(); ++i) lmax = std::max(lmax, up_[i] + down_[i]);
    limit = std::min(limit, 0.9 / (config_.cfl * lmax));
  }
  return config_.cfl * limit;
}

MassSolver::StepResult MassSolver::step(const EvolutionState& state, double dt) {
  if (!(dt > 0.0)) throw DomainError("step: dt must be positive");
  if (!(state.profile.grid() == grid_)) throw InvalidProfile("step: profile grid does not match solver grid");
  const auto m = state.profile.values();
  const std::size_t n = m.size();
  const bool frozen = !config_.outer_boundary;
  const double g_stage = frozen ? m[n - 1] : boundary_value(state.t + kGamma * dt);
  const double g_end = frozen ? m[n - 1] : boundary_value(state.t + dt);
  std::vector<double> y(n);

  if (config_.scheme == TimeScheme::Imex) {
    transport(m, k1_);
    for (std::size_t i = 0; i < n; ++i) rhs_[i] = m[i] + dt * kGamma * k1_[i];
    if (!implicit_solve(rhs_, kGamma * dt, g_stage, y2_)) return {std::nullopt, "stage-1 solve failed"};
    transport(y2_, k2_);
    linear(y2_, l2_);
    for (std::size_t i = 0; i < n; ++i) {
      rhs_[i] = m[i] + dt * (kDelta * k1_[i] + (1.0 - kDelta) * k2_[i] + (1.0 - kGamma) * l2_[i]);
    }
    if (!implicit_solve(rhs_, kGamma * dt, g_end, y)) return {std::nullopt, "stage-2 solve failed"};
  } else {
    // Heun's method on the full operator.
    auto f0 = rates(m);
    for (std::size_t i = 0; i < n; ++i) y2_[i] = m[i] + dt * f0[i];
    y2_[0] = 0.0;
    y2_[n - 1] = g_end;
    auto f1 = rates(y2_);
    for (std::size_t i = 0; i < n; ++i) y[i] = 0.5 * (m[i] + y2_[i] + dt * f1[i]);
    y[0] = 0.0;
    y[n - 1] = g_end;
  }

  const double tol = config_.monotone_tol * std::max(std::abs(y[n - 1]), std::numeric_limits<double>::min());
  std::size_t clips = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (!std::isfinite(y[i])) return {std::nullopt, "non-finite value"};
    if (y[i] < y[i - 1]) {
      if (y[i - 1] - y[i] > tol) {
        std::ostringstream os;
        os << "monotonicity violated at r = " << grid_[i];
        return {std::nullopt, os.str()};
      }
      y[i] = y[i - 1];
      ++clips;
    }
  }

  EvolutionState next{MassProfile(grid_, std::move(y), state.t + dt), state.t + dt, state.steps + 1, dt,
                      state.clips + clips};
  return {std::move(next), {}};
}

std::vector<double> spatial_operator(const ModelParams& params, const MassProfile& profile) {
  MassSolver solver(params, profile.grid(), SolverConfig{});
  return solver.rates(profile.values());
}

std::optional<BlowupTrigger> blowup_monitor(const ModelParams& params, const EvolutionState& state,
                                            const SolverConfig& config, double step_limit) {
  if (central_density(params, state.profile) > config.u_max) return BlowupTrigger::Density;
  if (radial_concentration(params, state.profile) > config.z_max_over_sigma * params.sigma()) {
    return BlowupTrigger::Concentration;
  }
  if (step_limit < config.collapse_dt) return BlowupTrigger::StepCollapse;
  return std::nullopt;
}

EvolutionResult evolve(const ModelParams& params, const MassProfile& initial, const SolverConfig& config,
                       double t_end) {
  config.validate(params);
  if (!(t_end >= initial.time())) throw DomainError("evolve: T_end precedes the initial time");

  EvolutionResult result;
  result.lq_exponents = config.lq_exponents;
  MassSolver solver(params, initial.grid(), config);

  EvolutionState state{initial, initial.time(), 0, 0.0, 0};
  result.trajectory.push_back(state.profile);
  result.diagnostics.push_back(sample(params, state, config));

  const double t_scale = std::max(1.0, std::abs(t_end));
  const double eps_t = 1e-12 * t_scale;
  double next_sample = config.sample_interval > 0.0 ? initial.time() + config.sample_interval
                                                    : std::numeric_limits<double>::infinity();
  double dt = config.dt_init;
  std::size_t since_sample = 0;

  auto record = [&] {
    if (result.trajectory.back().time() < state.t) {
      result.trajectory.push_back(state.profile);
      result.diagnostics.push_back(sample(params, state, config));
    }
    since_sample = 0;
  };

  while (true) {
    const double stable = solver.stable_dt(state.profile);
    if (auto trigger = blowup_monitor(params, state, config, std::min(stable, dt))) {
      record();
      result.outcome = {OutcomeKind::BlowupDetected, state.t, trigger, "trigger: " + to_string(*trigger)};
      break;
    }
    if (state.t >= t_end - eps_t) {
      record();
      result.outcome = {OutcomeKind::ReachedHorizon, state.t, std::nullopt, {}};
      break;
    }

    double dt_try = std::min({dt, config.dt_max, stable});
    bool clipped = false;
    if (state.t + dt_try >= t_end - eps_t) {
      dt_try = t_end - state.t;
      clipped = true;
    }
    if (state.t + dt_try >= next_sample - eps_t) {
      dt_try = next_sample - state.t;
      clipped = true;
    }
    if (dt_try < config.dt_min && !clipped) {
      result.outcome = {OutcomeKind::StepFailure, state.t, std::nullopt, "dt fell below dt_min"};
      record();
      break;
    }

    auto res = solver.step(state, dt_try);
    if (!res.state) {
      ++result.rejections;
      dt = 0.5 * dt_try;
      if (dt < config.dt_min) {
        record();
        result.outcome = {OutcomeKind::StepFailure, state.t, std::nullopt,
                          "dt fell below dt_min after rejection: " + res.rejection};
        break;
      }
      continue;
    }
    state = std::move(*res.state);
    if (!clipped) dt = std::min(dt_try * config.growth, config.dt_max);
    ++since_sample;

    bool due = config.cadence_steps > 0 && since_sample >= config.cadence_steps;
    if (state.t >= next_sample - eps_t) {
      due = true;
      state.t = next_sample;
      state.profile = state.profile.retimed(next_sample);
      next_sample += config.sample_interval;
    }
    if (due) record();
  }

  result.steps = state.steps;
  result.clips = state.clips;
  return result;
}

}  // namespace kslab
