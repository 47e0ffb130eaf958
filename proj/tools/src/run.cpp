#include "kslab/app/run.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "kslab/blowup_criteria.hpp"
#include "kslab/comparison.hpp"
#include "kslab/errors.hpp"
#include "kslab/profile_io.hpp"

namespace kslab::app {

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string short_number(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string trajectory_csv(int dim, const EvolutionResult& result) {
  std::string out = "# d=" + std::to_string(dim) + "\nt,r,M\n";
  for (const auto& prof : result.trajectory) {
    const std::string t = format_double(prof.time());
    const auto& grid = prof.grid();
    for (std::size_t i = 0; i < prof.size(); ++i) {
      out += t;
      out += ',';
      out += format_double(grid[i]);
      out += ',';
      out += format_double(prof[i]);
      out += '\n';
    }
  }
  return out;
}

std::string diagnostics_csv(int dim, const EvolutionResult& result) {
  std::string out = "# d=" + std::to_string(dim) + "\nt,mass,half_mass,concentration,u0";
  for (double q : result.lq_exponents) out += ",lq_" + short_number(q);
  out += ",dt,steps\n";
  for (const auto& s : result.diagnostics) {
    out += format_double(s.t) + "," + format_double(s.mass) + "," + format_double(s.half_mass) + "," +
           format_double(s.concentration) + "," + format_double(s.u0);
    for (double v : s.lq) out += "," + format_double(v);
    out += "," + format_double(s.dt) + "," + std::to_string(s.steps) + "\n";
  }
  return out;
}

std::string checks_csv(const std::vector<CheckResult>& checks) {
  std::string out = "check,status,value,threshold,detail\n";
  for (const auto& c : checks) {
    out += csv_field(c.name) + "," + c.status + "," + format_double(c.value) + "," + format_double(c.threshold) + "," +
           csv_field(c.detail) + "\n";
  }
  return out;
}

const char* status(bool ok) { return ok ? "PASS" : "FAIL"; }

void barrier_checks(const ModelParams& params, const Scenario& sc, const MassProfile& m0,
                    const EvolutionResult& result, std::vector<CheckResult>& out) {
  const double two_sigma = params.critical_concentration();
  const double c0 = radial_concentration(params, m0) / two_sigma;
  const double d = params.dim();
  const auto& k = sc.checks;
  if (!k.barrier_eps && c0 >= 1.0) {
    out.push_back({"barrier", "SKIP", c0, 1.0, "initial concentration is at or above 2 sigma_d"});
    return;
  }
  const double eps = k.barrier_eps.value_or(c0 + (1.0 - c0) / 3.0);
  const double p = k.barrier_p.value_or(d / (1.0 + eps));
  double K = 0.0;
  if (k.barrier_K) {
    K = *k.barrier_K;
  } else {
    const auto& grid = m0.grid();
    for (std::size_t i = 1; i < m0.size(); ++i) K = std::max(K, std::pow(grid[i], d / p - d) * m0[i]);
    K *= 1.1;
  }
  std::ostringstream detail;
  detail << "eps=" << format_double(eps) << " p=" << format_double(p) << " K=" << format_double(K);
  try {
    const Barrier b(params, K, eps, p);
    if (auto v = barrier_check(m0, b)) {
      detail << " initial datum touches the barrier at r=" << format_double(v->r);
      out.push_back({"barrier", "FAIL", 1.0, 0.0, detail.str()});
      return;
    }
    std::size_t violations = 0;
    std::optional<std::pair<double, BarrierViolation>> first;
    for (const auto& prof : result.trajectory) {
      if (auto v = barrier_check(prof, b)) {
        ++violations;
        if (!first) first = {prof.time(), *v};
      }
    }
    detail << " samples=" << result.trajectory.size();
    if (first) {
      detail << " first: t=" << format_double(first->first) << " r=" << format_double(first->second.r)
             << " M=" << format_double(first->second.mass) << " b=" << format_double(first->second.barrier);
    }
    out.push_back({"barrier", status(violations == 0), static_cast<double>(violations), 0.0, detail.str()});
  } catch (const DomainError& e) {
    detail << " " << e.what();
    out.push_back({"barrier", "FAIL", 0.0, 0.0, detail.str()});
    return;
  }

  double zmax = 0.0;
  for (const auto& s : result.diagnostics) zmax = std::max(zmax, s.concentration);
  out.push_back({"threshold", status(zmax < two_sigma), zmax / two_sigma, 1.0,
                 "max radial concentration over 2 sigma_d"});
}

void comparison_checks(const ModelParams& params, const Scenario& sc, const MassProfile& m0,
                       const EvolutionResult& result, std::vector<CheckResult>& out) {
  const double d = params.dim();
  const double p = sc.checks.comparison_p.value_or(0.75 * d);
  const auto& grid = m0.grid();
  double K = 0.0;
  for (std::size_t i = 1; i < m0.size(); ++i) K = std::max(K, std::pow(grid[i], d / p - d) * m0[i]);
  const auto majorant = comparison_majorant(params, grid, K, p, m0.total());
  const auto rep = comparison_check(result, majorant, sc.checks.comparison_tol);
  std::ostringstream detail;
  detail << "checked=" << rep.checked << " violations=" << rep.violations << " p=" << format_double(p)
         << " K=" << format_double(K) << " tol=" << format_double(rep.tolerance);
  if (rep.first_violation) {
    detail << " first: t=" << format_double(rep.first_violation->t) << " r=" << format_double(rep.first_violation->r)
           << " M=" << format_double(rep.first_violation->mass) << " m=" << format_double(rep.first_violation->majorant);
  }
  out.push_back({"comparison", status(rep.passed()), rep.worst_excess, 0.0, detail.str()});
}

std::string criteria_checks(const ModelParams& params, const MassProfile& m0, std::vector<CheckResult>& out) {
  const auto rep = criteria_report(params, m0);
  auto flag = [](bool b) { return b ? "yes" : "no"; };
  out.push_back({"criteria.sup_t_heat", "INFO", rep.sup_t_heat, 2.0,
                 std::string("argsup_t=") + format_double(rep.argsup_t) + " exceeds=" + flag(rep.exceeds_2)});
  out.push_back({"criteria.concentration", "INFO", rep.concentration, 4.0 * rep.sigma,
                 std::string("exceeds_4sigma=") + flag(rep.exceeds_4sigma) +
                     " exceeds_upper_bracket=" + flag(rep.exceeds_upper_bracket) +
                     " sup_at_boundary=" + flag(rep.sup_at_boundary)});
  out.push_back({"criteria.concentration_origin", "INFO", rep.concentration_origin, rep.upper_bracket,
                 std::string("exceeds=") + flag(rep.local_exceeds_upper_bracket)});
  double wmax = 0.0;
  for (const auto& m : rep.moments) wmax = std::max(wmax, m.scaled);
  out.push_back({"criteria.bump_moment", "INFO", wmax, 0.0, "max over radii of R^{2-d} w_R"});
  std::string csv = "t,theat\n";
  for (const auto& s : rep.ladder) csv += format_double(s.t) + "," + format_double(s.t_heat) + "\n";
  return csv;
}

void decay_checks(const ModelParams& params, const Scenario& sc, const MassProfile& m0, const RunManifest& man,
                  const EvolutionResult& result, std::vector<CheckResult>& out) {
  const auto& k = sc.checks;
  const double d = params.dim();
  const double expected = -0.5 * d * (1.0 - 1.0 / k.decay_q);
  if (man.outcome != "ReachedHorizon") {
    out.push_back({"decay", "FAIL", 0.0, expected, "run did not reach the horizon"});
    return;
  }
  const auto qi = static_cast<std::size_t>(
      std::find(result.lq_exponents.begin(), result.lq_exponents.end(), k.decay_q) - result.lq_exponents.begin());
  const double t0 = m0.time();
  const double t_lo = sc.t_end - k.decay_window * (sc.t_end - t0);
  std::vector<double> t, v, z;
  for (const auto& s : result.diagnostics) {
    t.push_back(s.t);
    v.push_back(s.lq[qi]);
    if (s.t >= t_lo) z.push_back(s.concentration);
  }
  try {
    const double slope = decay_slope(t, v, t_lo, sc.t_end);
    std::ostringstream detail;
    detail << "q=" << short_number(k.decay_q) << " window=[" << format_double(t_lo) << ", " << format_double(sc.t_end)
           << "] tol=" << format_double(k.decay_tol);
    out.push_back({"decay", status(std::abs(slope - expected) <= k.decay_tol), slope, expected, detail.str()});
  } catch (const DomainError& e) {
    out.push_back({"decay", "FAIL", 0.0, expected, e.what()});
  }
  std::size_t rises = 0;
  for (std::size_t i = 1; i < z.size(); ++i) {
    if (z[i] > z[i - 1]) ++rises;
  }
  out.push_back({"decay.monotone", status(rises == 0), static_cast<double>(rises), 0.0,
                 "increases of the radial concentration over the window"});
}

}  // namespace

bool RunManifest::checks_passed() const {
  return std::none_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.status == "FAIL"; });
}

bool RunManifest::numerical_failure() const {
  return outcome == "StepFailure" || outcome == "NumericalFailure" || outcome == "DomainError" ||
         outcome == "InvalidProfile";
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw ValidationError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["artifact"] = "kslab";
  j["version"] = kVersion;
  j["name"] = m.name;
  j["dry_run"] = m.dry_run;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["wall_seconds"] = m.wall_seconds;
  j["outcome"] = {{"kind", m.outcome},         {"time", m.outcome_time},
                  {"trigger", m.trigger},      {"reason", m.reason},
                  {"steps", m.steps},          {"rejections", m.rejections},
                  {"clips", m.clips},          {"samples", m.samples},
                  {"initial_concentration_over_2sigma", m.initial_concentration},
                  {"max_concentration_over_2sigma", m.max_concentration}};
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : m.checks) {
    checks.push_back({{"name", c.name}, {"status", c.status}, {"value", c.value}, {"threshold", c.threshold},
                      {"detail", c.detail}});
  }
  j["checks"] = checks;
  auto files = nlohmann::ordered_json::array();
  for (const auto& f : m.files) files.push_back({{"name", f.name}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  j["files"] = files;
  j["scenario"] = nlohmann::ordered_json::parse(m.scenario_json);
  return j.dump(2) + "\n";
}

RunManifest run(const Scenario& scenario, const RunOptions& options) {
  const auto wall0 = std::chrono::steady_clock::now();
  RunManifest man;
  man.name = scenario.name;
  man.started = utc_now();
  man.dry_run = options.dry_run;
  man.directory = options.directory.value_or(scenario.output.directory);
  Scenario echo = scenario;
  echo.output.directory = man.directory;
  man.scenario_json = to_json(echo);
  std::filesystem::create_directories(man.directory);

  std::vector<std::pair<std::string, std::string>> files;
  if (options.dry_run) {
    man.outcome = "DryRun";
  } else {
    files.emplace_back("scenario.toml", to_toml(echo));
    try {
      const ModelParams params(scenario.dim);
      const MassProfile m0 = initial_profile(scenario);
      const SolverConfig config = resolved_solver(scenario);
      const auto result = evolve(params, m0, config, scenario.t_end);

      man.outcome = to_string(result.outcome.kind);
      man.outcome_time = result.outcome.time;
      man.trigger = result.outcome.trigger ? to_string(*result.outcome.trigger) : "";
      man.reason = result.outcome.reason;
      man.steps = result.steps;
      man.rejections = result.rejections;
      man.clips = result.clips;
      man.samples = result.trajectory.size();
      const double two_sigma = params.critical_concentration();
      man.initial_concentration = radial_concentration(params, m0) / two_sigma;
      for (const auto& s : result.diagnostics) man.max_concentration = std::max(man.max_concentration, s.concentration);
      man.max_concentration /= two_sigma;

      if (scenario.output.trajectory) files.emplace_back("trajectory.csv", trajectory_csv(scenario.dim, result));
      files.emplace_back("diagnostics.csv", diagnostics_csv(scenario.dim, result));
      if (scenario.checks.barrier) barrier_checks(params, scenario, m0, result, man.checks);
      if (scenario.checks.comparison) comparison_checks(params, scenario, m0, result, man.checks);
      if (scenario.checks.criteria) files.emplace_back("criteria.csv", criteria_checks(params, m0, man.checks));
      if (scenario.checks.decay) decay_checks(params, scenario, m0, man, result, man.checks);
      files.emplace_back("checks.csv", checks_csv(man.checks));
    } catch (const NumericalFailure& e) {
      man.outcome = "NumericalFailure";
      man.reason = e.what();
    } catch (const DomainError& e) {
      man.outcome = "DomainError";
      man.reason = e.what();
    } catch (const InvalidProfile& e) {
      man.outcome = "InvalidProfile";
      man.reason = e.what();
    }
  }

  for (const auto& [name, content] : files) {
    const auto path = man.directory / name;
    write_atomic(path, content);
    man.files.push_back({name, content.size(), sha256_file(path)});
  }
  man.finished = utc_now();
  man.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  write_atomic(man.directory / "manifest.json", manifest_json(man));
  return man;
}

}  // namespace kslab::app
