#pragma once

// Scenario files (TOML):
//
//   [model]
//   d = 3
//
//   [initial]
//   kind = "chandrasekhar_scaled"   # or explicit_blowup, gaussian, selfsimilar, from_csv
//   eps = 0.5
//
//   [solver]
//   t_end = 50.0
//   intervals = 1024
//
//   [checks]
//   barrier = true
//
//   [output]
//   directory = "run"
//
// Every key has a default except model.d and the datum parameters. Unknown keys are errors.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "kslab/mass_pde.hpp"
#include "kslab/radial.hpp"

namespace kslab::app {

/// u_0 = eps 2(d-2) / (r^2 + smoothing^2); radial concentration tends to eps 2 sigma_d.
struct ChandrasekharScaled {
  double eps = 0.0;
  double smoothing = 1.0;
};

/// The explicit self-focusing solution at t = 0, blowing up at T.
struct ExplicitBlowup {
  double T = 0.0;
};

/// u_0 = A exp(-r^2 / (2 width^2)).
struct Gaussian {
  double A = 0.0;
  double width = 1.0;
};

/// Self-similar profile shot with launch coefficient a, sampled at time t0.
struct SelfSimilar {
  double a = 0.0;
  double t0 = 1.0;
  double y_max = 1e4;
};

/// Profile CSV; its grid replaces the solver grid.
struct FromCsv {
  std::filesystem::path path;
  std::shared_ptr<const MassProfile> profile;
};

using InitialSpec = std::variant<ChandrasekharScaled, ExplicitBlowup, Gaussian, SelfSimilar, FromCsv>;

std::string kind_name(const InitialSpec& spec);

enum class BoundaryKind { Frozen, Exact };

struct Checks {
  bool barrier = false;
  std::optional<double> barrier_eps;  ///< default c + (1 - c)/3 with c the initial concentration over 2 sigma_d
  std::optional<double> barrier_p;    ///< default d / (1 + eps)
  std::optional<double> barrier_K;    ///< default 1.1 sup r^{d/p-d} M_0

  bool comparison = false;
  std::optional<double> comparison_p;  ///< default 3d/4
  double comparison_tol = 1e-6;

  bool criteria = false;

  bool decay = false;
  double decay_q = 2.0;
  double decay_tol = 0.08;
  double decay_window = 0.5;  ///< fit over the last fraction of the run
};

struct OutputSpec {
  std::filesystem::path directory = "kslab-run";
  bool trajectory = true;
};

struct Scenario {
  std::string name = "scenario";
  int dim = 3;
  InitialSpec initial;
  SolverConfig solver;
  double t_end = 1.0;
  BoundaryKind boundary = BoundaryKind::Frozen;
  Checks checks;
  OutputSpec output;
};

/// Throws ValidationError: unknown keys are listed together, other messages start with the field path.
Scenario load_scenario(const std::filesystem::path& path);
/// Relative from_csv paths resolve against `base_dir`.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});

/// Fully resolved scenario, every default written out.
std::string to_toml(const Scenario& scenario);
std::string to_json(const Scenario& scenario);

/// M_0 on the solver grid (or the CSV grid), stamped with the datum's start time.
MassProfile initial_profile(const Scenario& scenario);

/// The solver config with the outer boundary set when `boundary` is exact.
SolverConfig resolved_solver(const Scenario& scenario);

}  // namespace kslab::app
