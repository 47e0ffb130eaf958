#include "kslab/app/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <ostream>
#include <sstream>

#include "kslab/app/run.hpp"
#include "kslab/app/scenario.hpp"
#include "kslab/app/sweep.hpp"
#include "kslab/blowup_criteria.hpp"
#include "kslab/comparison.hpp"
#include "kslab/errors.hpp"
#include "kslab/phase_plane.hpp"
#include "kslab/profile_io.hpp"
#include "kslab/selfsimilar.hpp"

namespace kslab::app {

namespace {

std::string fmt(double x) { return format_double(x); }

std::string label(double q) {
  std::ostringstream os;
  os << q;
  return os.str();
}

int cmd_evolve(const std::string& config, const std::string& out_dir, bool dry_run, std::ostream& out) {
  const Scenario sc = load_scenario(config);
  RunOptions opt;
  opt.dry_run = dry_run;
  if (!out_dir.empty()) opt.directory = out_dir;
  const auto man = run(sc, opt);
  out << "outcome=" << man.outcome << " t=" << fmt(man.outcome_time) << " steps=" << man.steps;
  if (!man.trigger.empty()) out << " trigger=" << man.trigger;
  if (!man.checks.empty()) out << " checks=" << (man.checks_passed() ? "PASS" : "FAIL");
  out << " dir=" << man.directory.string() << "\n";
  for (const auto& c : man.checks) out << c.name << " " << c.status << " " << c.detail << "\n";
  if (man.numerical_failure()) {
    out << "reason=" << man.reason << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_stationary(int d, double tau_max, double delta, double stop_radius, const std::string& path, std::ostream& out) {
  SeparatrixOptions opt;
  opt.tau_max = tau_max;
  opt.delta = delta;
  opt.stop_radius = stop_radius;
  const auto traj = integrate_separatrix(d, opt);
  std::string csv = "tau,X,Z,L\n";
  for (const auto& p : traj.points) {
    csv += fmt(p.tau) + "," + fmt(p.X) + "," + fmt(p.Z) + "," + fmt(lyapunov(d, p.X, p.Z)) + "\n";
  }
  write_atomic(path, csv);
  const auto eig = linearization_eigenvalues(d, FixedPoint::Interior).first;
  out << "d,crossings,terminal_dist,eig_re,eig_im\n"
      << d << "," << count_crossings(traj, 2.0) << "," << fmt(traj.terminal_distance) << "," << fmt(eig.real()) << ","
      << fmt(std::abs(eig.imag())) << "\n";
  return kExitOk;
}

int cmd_selfsimilar(int d, std::optional<double> shoot, std::optional<double> target, double y_max,
                    const std::string& path, std::ostream& out) {
  ShootOptions opt;
  opt.y_max = y_max;
  const auto sol = shoot ? shoot_profile(d, *shoot, opt) : shoot_for_epsilon(d, *target, opt);
  std::string csv = "y,zeta,y_scaled\n";
  for (std::size_t k = 0; k < sol.y.size(); ++k) {
    csv += fmt(sol.y[k]) + "," + fmt(sol.zeta[k]) + "," + fmt(std::pow(sol.y[k], 1.0 - 0.5 * d) * sol.zeta[k]) + "\n";
  }
  write_atomic(path, csv);
  out << "d,a,epsilon,bound_ok\n" << d << "," << fmt(sol.a) << "," << fmt(sol.epsilon) << "," << (sol.bound_ok ? 1 : 0) << "\n";
  return kExitOk;
}

MassProfile load_mass(const std::string& path, std::optional<int> dim, int& d_out) {
  auto file = read_trajectory_csv(path, dim);
  d_out = file.dim;
  return file.profiles.back();
}

int cmd_criteria(const std::string& path, std::optional<int> dim, double alpha, const std::string& ladder,
                 std::ostream& out) {
  int d = 0;
  const auto m = load_mass(path, dim, d);
  const ModelParams params(d);
  CriteriaOptions opt;
  opt.alpha = alpha;
  const auto rep = criteria_report(params, m, opt);
  auto yn = [](bool b) { return b ? "true" : "false"; };
  out << "d=" << d << "\n"
      << "t=" << fmt(m.time()) << "\n"
      << "sigma=" << fmt(rep.sigma) << "\n"
      << "sup_t_heat=" << fmt(rep.sup_t_heat) << "\n"
      << "argsup_t=" << fmt(rep.argsup_t) << "\n"
      << "concentration=" << fmt(rep.concentration) << "\n"
      << "concentration_over_sigma=" << fmt(rep.concentration / rep.sigma) << "\n"
      << "concentration_origin=" << fmt(rep.concentration_origin) << "\n"
      << "upper_bracket=" << fmt(rep.upper_bracket) << "\n";
  double wmax = 0.0;
  for (const auto& mo : rep.moments) wmax = std::max(wmax, mo.scaled);
  out << "bump_moment_max=" << fmt(wmax) << "\n"
      << "exceeds_2=" << yn(rep.exceeds_2) << "\n"
      << "exceeds_4sigma=" << yn(rep.exceeds_4sigma) << "\n"
      << "exceeds_upper_bracket=" << yn(rep.exceeds_upper_bracket) << "\n"
      << "local_exceeds_upper_bracket=" << yn(rep.local_exceeds_upper_bracket) << "\n"
      << "sup_at_boundary=" << yn(rep.sup_at_boundary) << "\n";
  std::string csv = "t,theat\n";
  for (const auto& s : rep.ladder) csv += fmt(s.t) + "," + fmt(s.t_heat) + "\n";
  if (ladder.empty()) {
    out << "\n" << csv;
  } else {
    write_atomic(ladder, csv);
  }
  return kExitOk;
}

int cmd_norms_profile(const std::string& path, std::optional<int> dim, double p, const std::vector<double>& qs,
                      std::ostream& out) {
  int d = 0;
  const auto m = load_mass(path, dim, d);
  const ModelParams params(d);
  const double z = radial_concentration(params, m);
  out << "d=" << d << "\n"
      << "t=" << fmt(m.time()) << "\n"
      << "mass=" << fmt(m.total()) << "\n"
      << "concentration=" << fmt(z) << "\n"
      << "concentration_over_2sigma=" << fmt(z / params.critical_concentration()) << "\n"
      << "morrey_p=" << fmt(p) << "\n"
      << "morrey=" << fmt(centered_morrey(params, m, p)) << "\n";
  if (!qs.empty()) {
    const auto u = density_from_mass(params, m);
    out << "u0=" << fmt(central_density(params, m)) << "\n";
    for (double q : qs) out << "lq_" << label(q) << "=" << fmt(lq_norm(params, u, q)) << "\n";
  }
  return kExitOk;
}

int cmd_norms_slopes(const std::string& path, std::optional<int> dim, double window, std::ostream& out) {
  const auto table = read_numeric_csv(std::filesystem::path(path));
  const int d = dim ? *dim : table.dim.value_or(0);
  if (d < 3) throw ValidationError(path + ": no '# d=<d>' comment; pass --dim");
  if (!(window > 0.0 && window <= 1.0)) throw ValidationError("--window: must lie in (0, 1]");
  const std::size_t ct = table.column("t");
  if (table.rows.empty()) throw ValidationError(path + ": no rows");
  std::vector<double> t;
  for (const auto& row : table.rows) t.push_back(row[ct]);
  const double t_hi = t.back();
  const double t_lo = t_hi - window * (t_hi - t.front());
  out << "q,slope,expected\n";
  for (std::size_t k = 0; k < table.header.size(); ++k) {
    const auto& name = table.header[k];
    if (name.rfind("lq_", 0) != 0) continue;
    const double q = std::stod(name.substr(3));
    std::vector<double> v;
    for (const auto& row : table.rows) v.push_back(row[k]);
    out << label(q) << "," << fmt(decay_slope(t, v, t_lo, t_hi)) << "," << fmt(-0.5 * d * (1.0 - 1.0 / q)) << "\n";
  }
  return kExitOk;
}

int cmd_check(const std::string& path, std::optional<int> dim, double eps, double p, std::optional<double> K,
              std::ostream& out) {
  const auto file = read_trajectory_csv(path, dim);
  const ModelParams params(file.dim);
  const double d = file.dim;
  double k = 0.0;
  if (K) {
    k = *K;
  } else {
    const auto& m0 = file.profiles.front();
    for (std::size_t i = 1; i < m0.size(); ++i) k = std::max(k, std::pow(m0.grid()[i], d / p - d) * m0[i]);
    k *= 1.1;
  }
  const Barrier b(params, k, eps, p);
  const bool many = file.profiles.size() > 1;
  for (const auto& prof : file.profiles) {
    if (auto v = barrier_check(prof, b)) {
      out << "VIOLATION r=" << fmt(v->r) << " M=" << fmt(v->mass) << " b=" << fmt(v->barrier);
    } else {
      out << "PASS";
    }
    if (many) out << " t=" << fmt(prof.time());
    out << "\n";
  }
  return kExitOk;
}

int cmd_sweep(const std::string& tmpl, const std::string& grid, const std::string& out_dir, std::size_t workers,
              std::ostream& out) {
  const auto res = sweep(tmpl, grid, out_dir, workers == 0 ? default_workers() : workers);
  std::size_t ok = 0;
  for (const auto& r : res.runs) ok += r.status == "ok";
  out << "runs=" << res.runs.size() << " ok=" << ok << " failed=" << res.runs.size() - ok
      << " index=" << res.index.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radial Keller-Segel laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::function<int()> action;

  std::string config, out_dir;
  bool dry_run = false;
  auto* evolve = app.add_subcommand("evolve", "Run a scenario file");
  evolve->add_option("--config", config, "Scenario TOML file")->required()->check(CLI::ExistingFile);
  evolve->add_option("--out", out_dir, "Output directory (overrides output.directory)");
  evolve->add_flag("--dry-run", dry_run, "Write the manifest only");
  evolve->callback([&] { action = [&] { return cmd_evolve(config, out_dir, dry_run, out); }; });

  int dim = 0;
  double tau_max = 60.0, delta = 1e-8, stop_radius = 1e-9;
  std::string out_file;
  auto* stationary = app.add_subcommand("stationary", "Integrate the stationary separatrix");
  stationary->add_option("--dim", dim, "Dimension d >= 3")->required();
  stationary->add_option("--tau-max", tau_max, "Final log-radius")->capture_default_str();
  stationary->add_option("--delta", delta, "Launch distance from the origin")->capture_default_str();
  stationary->add_option("--stop-radius", stop_radius, "Stop this close to the interior fixed point")
      ->capture_default_str();
  stationary->add_option("--out", out_file, "CSV file tau,X,Z,L")->required();
  stationary->callback(
      [&] { action = [&] { return cmd_stationary(dim, tau_max, delta, stop_radius, out_file, out); }; });

  double shoot = 0.0, target = 0.0, y_max = 1e4;
  auto* selfsim = app.add_subcommand("selfsimilar", "Shoot a self-similar profile");
  selfsim->add_option("--dim", dim, "Dimension d >= 3")->required();
  auto* shoot_opt = selfsim->add_option("--shoot", shoot, "Launch coefficient a");
  auto* target_opt = selfsim->add_option("--target-eps", target, "Bisect a for this tail amplitude");
  shoot_opt->excludes(target_opt);
  selfsim->add_option("--ymax", y_max, "Last y node")->capture_default_str();
  selfsim->add_option("--out", out_file, "CSV file y,zeta,y_scaled")->required();
  selfsim->callback([&] {
    if (!*shoot_opt && !*target_opt) throw CLI::ValidationError("selfsimilar", "one of --shoot or --target-eps is required");
    action = [&] {
      return cmd_selfsimilar(dim, *shoot_opt ? std::optional(shoot) : std::nullopt,
                             *target_opt ? std::optional(target) : std::nullopt, y_max, out_file, out);
    };
  });

  std::string profile, ladder;
  double alpha = 2.0;
  std::optional<int> dim_opt;
  auto* criteria = app.add_subcommand("criteria", "Blowup criteria of a profile");
  criteria->add_option("--profile", profile, "Profile CSV (r,M or r,u; last block of a trajectory)")
      ->required()
      ->check(CLI::ExistingFile);
  criteria->add_option("--dim", dim_opt, "Dimension when the file has no '# d=' comment");
  criteria->add_option("--alpha", alpha, "Bump exponent")->capture_default_str();
  criteria->add_option("--ladder", ladder, "Write the t,theat ladder here instead of stdout");
  criteria->callback([&] { action = [&] { return cmd_criteria(profile, dim_opt, alpha, ladder, out); }; });

  double p = 0.0;
  std::vector<double> qs;
  std::string diagnostics;
  double window = 0.5;
  auto* norms = app.add_subcommand("norms", "Concentration functionals of a profile, or decay slopes");
  auto* prof_opt = norms->add_option("--profile", profile, "Profile CSV")->check(CLI::ExistingFile);
  auto* diag_opt = norms->add_option("--diagnostics", diagnostics, "diagnostics.csv of a run")->check(CLI::ExistingFile);
  prof_opt->excludes(diag_opt);
  auto* p_opt = norms->add_option("--p", p, "Morrey exponent");
  p_opt->needs(prof_opt);
  norms->add_option("--q", qs, "L^q exponents")->needs(prof_opt);
  norms->add_option("--window", window, "Slope fit over this last fraction of the run")->capture_default_str();
  norms->add_option("--dim", dim_opt, "Dimension when the file has no '# d=' comment");
  norms->callback([&] {
    if (*prof_opt && !*p_opt) throw CLI::ValidationError("norms", "--p is required with --profile");
    if (!*prof_opt && !*diag_opt) throw CLI::ValidationError("norms", "one of --profile or --diagnostics is required");
    action = [&] {
      return *prof_opt ? cmd_norms_profile(profile, dim_opt, p, qs, out)
                       : cmd_norms_slopes(diagnostics, dim_opt, window, out);
    };
  });

  double eps = 0.0;
  std::optional<double> K;
  auto* check = app.add_subcommand("check", "Barrier verdicts for a profile or trajectory CSV");
  check->add_option("--profile", profile, "Profile or trajectory CSV")->required()->check(CLI::ExistingFile);
  check->add_option("--eps", eps, "Barrier amplitude, 0 < eps < d/(2p)")->required();
  check->add_option("--p", p, "Barrier exponent in (d/2, d)")->required();
  check->add_option("--K", K, "Barrier constant (default 1.1 sup r^{d/p-d} M of the first profile)");
  check->add_option("--dim", dim_opt, "Dimension when the file has no '# d=' comment");
  check->callback([&] { action = [&] { return cmd_check(profile, dim_opt, eps, p, K, out); }; });

  std::string tmpl, grid;
  std::size_t workers = 0;
  auto* sw = app.add_subcommand("sweep", "Cartesian parameter sweep over a template scenario");
  sw->add_option("--template", tmpl, "Template scenario TOML")->required()->check(CLI::ExistingFile);
  sw->add_option("--grid", grid, "Grid TOML with arrays at the leaves")->required()->check(CLI::ExistingFile);
  sw->add_option("--out", out_dir, "Sweep directory")->required();
  sw->add_option("--workers", workers, "Concurrent runs (default KSLAB_WORKERS or all cores)");
  sw->callback([&] { action = [&] { return cmd_sweep(tmpl, grid, out_dir, workers, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  try {
    return action();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const InvalidProfile& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace kslab::app
