#pragma once

// Time integration of the cumulative-mass equation
//
//   M_t = M_rr - (d-1)/r M_r + sigma^{-1} r^{1-d} M M_r,   M(0,t) = 0,
//
// on [0, R_max] with a Dirichlet condition at R_max (frozen initial value unless
// a boundary trace is supplied). The default scheme is the ARS(2,2,2) IMEX
// Runge-Kutta pair: the linear diffusion part is implicit (tridiagonal solves),
// the quadratic transport term explicit.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kslab/radial.hpp"

namespace kslab {

enum class TimeScheme { Imex, Explicit };
enum class GridSpacing { Uniform, Log };

struct GridSpec {
  std::size_t intervals = 1024;
  double r_max = 20.0;
  GridSpacing spacing = GridSpacing::Uniform;
  double r_min = 1e-3;  ///< first positive node for log spacing

  RadialGrid build() const;
};

struct SolverConfig {
  GridSpec grid;
  double dt_init = 1e-4;
  double dt_min = 1e-12;
  double dt_max = 1e-2;
  double growth = 1.1;  ///< dt multiplier after an accepted step
  double cfl = 0.5;     ///< fraction of the explicit transport limit h / |drift|
  TimeScheme scheme = TimeScheme::Imex;

  double u_max = 1e4;              ///< density cap at the origin
  double z_max_over_sigma = 64.0;  ///< concentration cap in units of sigma_d (> 2)
  double collapse_dt = 1e-8;       ///< controller dt (or stability limit) below this signals collapse

  double monotone_tol = 1e-10;  ///< relative to total mass
  std::size_t cadence_steps = 10;  ///< sample every k accepted steps (0 = off)
  double sample_interval = 0.0;    ///< also sample at multiples of this time (0 = off)
  std::vector<double> lq_exponents{2.0};

  /// Dirichlet value M(R_max, t); empty freezes M(R_max, 0).
  std::function<double(double)> outer_boundary;

  /// Throws ValidationError naming the offending field.
  void validate(const ModelParams& params) const;
};

struct EvolutionState {
  MassProfile profile;
  double t = 0.0;
  std::size_t steps = 0;
  double last_dt = 0.0;
  std::size_t clips = 0;
};

enum class BlowupTrigger { Density, Concentration, StepCollapse };
std::string to_string(BlowupTrigger trigger);

enum class OutcomeKind { ReachedHorizon, BlowupDetected, StepFailure };
std::string to_string(OutcomeKind kind);

struct Outcome {
  OutcomeKind kind = OutcomeKind::ReachedHorizon;
  double time = 0.0;
  std::optional<BlowupTrigger> trigger;
  std::string reason;
};

struct DiagnosticSample {
  double t = 0.0;
  double mass = 0.0;       ///< M(R_max, t)
  double half_mass = 0.0;  ///< M(R_max / 2, t)
  double concentration = 0.0;
  double u0 = 0.0;
  std::vector<double> lq;  ///< one entry per SolverConfig::lq_exponents
  double dt = 0.0;
  std::size_t steps = 0;
};

struct EvolutionResult {
  Outcome outcome;
  std::vector<MassProfile> trajectory;
  std::vector<DiagnosticSample> diagnostics;
  std::vector<double> lq_exponents;
  std::size_t steps = 0;
  std::size_t rejections = 0;
  std::size_t clips = 0;

  const MassProfile& final_profile() const { return trajectory.back(); }
};

/// Interior rates of the semi-discrete equation; boundary rows are zero.
std::vector<double> spatial_operator(const ModelParams& params, const MassProfile& profile);

/// Density at the origin from the small-r Taylor anchor M ~ sigma u(0) r^d / d.
double central_density(const ModelParams& params, const MassProfile& profile);

/// One time step. Owns per-grid coefficients and scratch space; not thread-safe,
/// one instance per run.
class MassSolver {
 public:
  MassSolver(const ModelParams& params, const RadialGrid& grid, SolverConfig config);

  struct StepResult {
    std::optional<EvolutionState> state;  ///< empty when the step is rejected
    std::string rejection;
  };

  /// Advances by dt; rejected if a stage solve fails or the new profile leaves the
  /// monotone cone by more than monotone_tol * M_total.
  StepResult step(const EvolutionState& state, double dt);

  /// Largest dt allowed by the explicit transport term (and diffusion, for the explicit scheme).
  double stable_dt(const MassProfile& profile) const;

  std::vector<double> rates(std::span<const double> m) const;
  double boundary_value(double t) const;

  const SolverConfig& config() const { return config_; }

 private:
  void linear(std::span<const double> m, std::span<double> out) const;
  void transport(std::span<const double> m, std::span<double> out) const;
  bool implicit_solve(std::span<const double> rhs, double coef, double boundary, std::span<double> out);

  ModelParams params_;
  RadialGrid grid_;
  SolverConfig config_;
  double frozen_boundary_ = 0.0;
  bool frozen_set_ = false;

  // Interior stencil: L M_i = up_[i] (M_{i+1} - M_i) - down_[i] (M_i - M_{i-1}).
  std::vector<double> up_, down_;
  // Three-point derivative as positive weights on the two adjacent differences.
  std::vector<double> wl_, wr_;
  std::vector<double> drift_coef_;  // sigma^{-1} r^{1-d}
  std::vector<double> spacing_;      // min adjacent spacing per node

  std::vector<double> k1_, k2_, l2_, y2_, rhs_, cp_, dp_;
};

/// `step_limit` is the smaller of the explicit stability limit and the step the
/// controller would try next; it falling below collapse_dt signals step collapse.
std::optional<BlowupTrigger> blowup_monitor(const ModelParams& params, const EvolutionState& state,
                                            const SolverConfig& config, double step_limit);

EvolutionResult evolve(const ModelParams& params, const MassProfile& initial, const SolverConfig& config,
                       double t_end);

}  // namespace kslab
