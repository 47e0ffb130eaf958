#include "kslab/app/scenario.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "kslab/errors.hpp"
#include "kslab/profile_io.hpp"
#include "kslab/selfsimilar.hpp"
#include "scenario_toml.hpp"

namespace kslab::app {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ValidationError(path + ": " + what); }

// Reads one table, remembering which keys were consumed.
class Section {
 public:
  Section(const toml::table* table, std::string prefix, std::vector<std::string>& unknown)
      : table_(table), prefix_(std::move(prefix)), unknown_(unknown) {}

  ~Section() {
    if (!table_) return;
    for (auto&& [k, v] : *table_) {
      if (!used_.count(std::string(k.str()))) unknown_.push_back(path(std::string(k.str())));
    }
  }

  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }
  bool has(const std::string& key) const { return table_ && table_->contains(key); }

  const toml::node* node(const std::string& key) {
    used_.insert(key);
    return table_ ? table_->get(key) : nullptr;
  }

  std::optional<double> number(const std::string& key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value<double>(); v && (n->is_floating_point() || n->is_integer())) {
      if (!std::isfinite(*v)) fail(path(key), "must be finite");
      return v;
    }
    fail(path(key), "expected a number");
  }
  double number(const std::string& key, double fallback) { return number(key).value_or(fallback); }
  double required_number(const std::string& key) {
    auto v = number(key);
    if (!v) fail(path(key), "required");
    return *v;
  }

  std::optional<long long> integer(const std::string& key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    if (!n->is_integer()) fail(path(key), "expected an integer");
    return n->value<long long>();
  }

  std::optional<bool> boolean(const std::string& key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    if (!n->is_boolean()) fail(path(key), "expected true or false");
    return n->value<bool>();
  }

  std::optional<std::string> string(const std::string& key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    if (!n->is_string()) fail(path(key), "expected a string");
    return n->value<std::string>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    const auto* arr = n->as_array();
    if (!arr) fail(path(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& el : *arr) {
      if (!(el.is_floating_point() || el.is_integer())) fail(path(key), "expected an array of numbers");
      out.push_back(*el.value<double>());
    }
    return out;
  }

 private:
  const toml::table* table_;
  std::string prefix_;
  std::vector<std::string>& unknown_;
  std::set<std::string> used_;
};

void positive(const std::string& path, double v) {
  if (!(v > 0.0)) fail(path, "must be positive");
}

InitialSpec parse_initial(Section& s, const std::filesystem::path& base_dir) {
  const auto kind = s.string("kind");
  if (!kind) fail(s.path("kind"), "required");
  if (*kind == "chandrasekhar_scaled") {
    ChandrasekharScaled c;
    c.eps = s.required_number("eps");
    c.smoothing = s.number("smoothing", c.smoothing);
    positive(s.path("eps"), c.eps);
    positive(s.path("smoothing"), c.smoothing);
    return c;
  }
  if (*kind == "explicit_blowup") {
    ExplicitBlowup e;
    e.T = s.required_number("T");
    positive(s.path("T"), e.T);
    return e;
  }
  if (*kind == "gaussian") {
    Gaussian g;
    g.A = s.required_number("A");
    g.width = s.number("width", g.width);
    if (!(g.A >= 0.0)) fail(s.path("A"), "must be >= 0");
    positive(s.path("width"), g.width);
    return g;
  }
  if (*kind == "selfsimilar") {
    SelfSimilar p;
    p.a = s.required_number("a");
    p.t0 = s.number("t0", p.t0);
    p.y_max = s.number("y_max", p.y_max);
    if (!(p.a >= 0.0)) fail(s.path("a"), "must be >= 0");
    positive(s.path("t0"), p.t0);
    positive(s.path("y_max"), p.y_max);
    return p;
  }
  if (*kind == "from_csv") {
    FromCsv f;
    const auto p = s.string("path");
    if (!p) fail(s.path("path"), "required");
    f.path = *p;
    const auto resolved = f.path.is_absolute() || base_dir.empty() ? f.path : base_dir / f.path;
    if (!std::filesystem::exists(resolved)) fail(s.path("path"), "file not found: " + resolved.string());
    try {
      auto file = read_profile_csv(resolved);
      f.profile = std::make_shared<const MassProfile>(file.as_mass());
    } catch (const std::exception& e) {
      fail(s.path("path"), e.what());
    }
    f.path = resolved;
    return f;
  }
  fail(s.path("kind"), "unknown kind '" + *kind +
                           "' (expected chandrasekhar_scaled, explicit_blowup, gaussian, selfsimilar or from_csv)");
}

double start_time(const InitialSpec& spec) {
  if (const auto* p = std::get_if<SelfSimilar>(&spec)) return p->t0;
  if (const auto* f = std::get_if<FromCsv>(&spec)) return f->profile->time();
  return 0.0;
}

const toml::table* section_table(const toml::table& root, const std::string& name) {
  const auto* n = root.get(name);
  if (!n) return nullptr;
  if (!n->is_table()) fail(name, "expected a table");
  return n->as_table();
}

std::string spacing_name(GridSpacing s) { return s == GridSpacing::Log ? "log" : "uniform"; }
std::string scheme_name(TimeScheme s) { return s == TimeScheme::Explicit ? "explicit" : "imex"; }

toml::table to_table(const Scenario& sc) {
  toml::table initial;
  initial.insert("kind", kind_name(sc.initial));
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ChandrasekharScaled>) {
          initial.insert("eps", v.eps);
          initial.insert("smoothing", v.smoothing);
        } else if constexpr (std::is_same_v<T, ExplicitBlowup>) {
          initial.insert("T", v.T);
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          initial.insert("A", v.A);
          initial.insert("width", v.width);
        } else if constexpr (std::is_same_v<T, SelfSimilar>) {
          initial.insert("a", v.a);
          initial.insert("t0", v.t0);
          initial.insert("y_max", v.y_max);
        } else {
          initial.insert("path", v.path.string());
        }
      },
      sc.initial);

  const auto& c = sc.solver;
  toml::array lq;
  for (double q : c.lq_exponents) lq.push_back(q);
  toml::table solver{
      {"t_end", sc.t_end},
      {"boundary", sc.boundary == BoundaryKind::Exact ? "exact" : "frozen"},
      {"intervals", static_cast<int64_t>(c.grid.intervals)},
      {"r_max", c.grid.r_max},
      {"spacing", spacing_name(c.grid.spacing)},
      {"r_min", c.grid.r_min},
      {"dt_init", c.dt_init},
      {"dt_min", c.dt_min},
      {"dt_max", c.dt_max},
      {"growth", c.growth},
      {"cfl", c.cfl},
      {"scheme", scheme_name(c.scheme)},
      {"u_max", c.u_max},
      {"z_max_over_sigma", c.z_max_over_sigma},
      {"collapse_dt", c.collapse_dt},
      {"monotone_tol", c.monotone_tol},
      {"lq_exponents", lq},
  };

  const auto& k = sc.checks;
  toml::table checks{
      {"barrier", k.barrier},       {"comparison", k.comparison}, {"comparison_tol", k.comparison_tol},
      {"criteria", k.criteria},     {"decay", k.decay},           {"decay_q", k.decay_q},
      {"decay_tol", k.decay_tol},   {"decay_window", k.decay_window},
  };
  if (k.barrier_eps) checks.insert("barrier_eps", *k.barrier_eps);
  if (k.barrier_p) checks.insert("barrier_p", *k.barrier_p);
  if (k.barrier_K) checks.insert("barrier_K", *k.barrier_K);
  if (k.comparison_p) checks.insert("comparison_p", *k.comparison_p);

  toml::table output{
      {"directory", sc.output.directory.string()},
      {"trajectory", sc.output.trajectory},
      {"cadence_steps", static_cast<int64_t>(c.cadence_steps)},
      {"sample_interval", c.sample_interval},
  };

  return toml::table{
      {"name", sc.name},
      {"model", toml::table{{"d", sc.dim}}},
      {"initial", initial},
      {"solver", solver},
      {"checks", checks},
      {"output", output},
  };
}

// sigma_d \int_{r_{i-1}}^{r_i} u(s) s^{d-1} ds accumulated over the grid.
template <class U>
MassProfile integrate_density(const ModelParams& params, const RadialGrid& grid, U&& u, double time) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  const int d = params.dim();
  auto f = [&](double s) { return u(s) * std::pow(s, d - 1); };
  std::vector<double> m(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    m[i] = m[i - 1] + params.sigma() * GK::integrate(f, grid[i - 1], grid[i], 8, 1e-14);
  }
  return MassProfile(grid, std::move(m), time);
}

}  // namespace

std::string kind_name(const InitialSpec& spec) {
  static const char* names[] = {"chandrasekhar_scaled", "explicit_blowup", "gaussian", "selfsimilar", "from_csv"};
  return names[spec.index()];
}

toml::table parse_toml(std::string_view text, const std::string& source) {
  try {
    return toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
    throw ValidationError(os.str());
  }
}

Scenario parse_scenario_table(const toml::table& root, const std::filesystem::path& base_dir) {
  Scenario sc;
  std::vector<std::string> unknown;
  {
    Section top(&root, "", unknown);
    for (const char* name : {"model", "initial", "solver", "checks", "output"}) top.node(name);
    sc.name = top.string("name").value_or(sc.name);

    const auto* model_t = section_table(root, "model");
    const auto* initial_t = section_table(root, "initial");
    if (!model_t) fail("model", "missing section");
    if (!initial_t) fail("initial", "missing section");

    {
      Section model(model_t, "model", unknown);
      const auto d = model.integer("d");
      if (!d) fail("model.d", "required");
      if (*d < 3 || *d > 64) fail("model.d", "must lie in [3, 64]");
      sc.dim = static_cast<int>(*d);
    }
    {
      Section initial(initial_t, "initial", unknown);
      sc.initial = parse_initial(initial, base_dir);
    }

    Section solver(section_table(root, "solver"), "solver", unknown);
    auto& c = sc.solver;
    sc.t_end = solver.number("t_end", sc.t_end);
    if (auto b = solver.string("boundary")) {
      if (*b == "frozen") {
        sc.boundary = BoundaryKind::Frozen;
      } else if (*b == "exact") {
        sc.boundary = BoundaryKind::Exact;
      } else {
        fail("solver.boundary", "expected frozen or exact");
      }
    }
    if (auto n = solver.integer("intervals")) {
      if (*n < static_cast<long long>(RadialGrid::kMinIntervals)) fail("solver.intervals", "must be >= 16");
      c.grid.intervals = static_cast<std::size_t>(*n);
    }
    c.grid.r_max = solver.number("r_max", c.grid.r_max);
    if (auto sp = solver.string("spacing")) {
      if (*sp == "uniform") {
        c.grid.spacing = GridSpacing::Uniform;
      } else if (*sp == "log") {
        c.grid.spacing = GridSpacing::Log;
      } else {
        fail("solver.spacing", "expected uniform or log");
      }
    }
    c.grid.r_min = solver.number("r_min", c.grid.r_min);
    c.dt_init = solver.number("dt_init", c.dt_init);
    c.dt_min = solver.number("dt_min", c.dt_min);
    c.dt_max = solver.number("dt_max", c.dt_max);
    c.growth = solver.number("growth", c.growth);
    c.cfl = solver.number("cfl", c.cfl);
    if (auto s = solver.string("scheme")) {
      if (*s == "imex") {
        c.scheme = TimeScheme::Imex;
      } else if (*s == "explicit") {
        c.scheme = TimeScheme::Explicit;
      } else {
        fail("solver.scheme", "expected imex or explicit");
      }
    }
    c.u_max = solver.number("u_max", c.u_max);
    c.z_max_over_sigma = solver.number("z_max_over_sigma", c.z_max_over_sigma);
    c.collapse_dt = solver.number("collapse_dt", c.collapse_dt);
    c.monotone_tol = solver.number("monotone_tol", c.monotone_tol);
    if (auto lq = solver.numbers("lq_exponents")) c.lq_exponents = *lq;

    Section output(section_table(root, "output"), "output", unknown);
    if (auto dir = output.string("directory")) sc.output.directory = *dir;
    sc.output.trajectory = output.boolean("trajectory").value_or(sc.output.trajectory);
    if (auto n = output.integer("cadence_steps")) {
      if (*n < 0) fail("output.cadence_steps", "must be >= 0");
      c.cadence_steps = static_cast<std::size_t>(*n);
    }
    c.sample_interval = output.number("sample_interval", c.sample_interval);

    Section checks(section_table(root, "checks"), "checks", unknown);
    auto& k = sc.checks;
    k.barrier = checks.boolean("barrier").value_or(k.barrier);
    k.barrier_eps = checks.number("barrier_eps");
    k.barrier_p = checks.number("barrier_p");
    k.barrier_K = checks.number("barrier_K");
    k.comparison = checks.boolean("comparison").value_or(k.comparison);
    k.comparison_p = checks.number("comparison_p");
    k.comparison_tol = checks.number("comparison_tol", k.comparison_tol);
    k.criteria = checks.boolean("criteria").value_or(k.criteria);
    k.decay = checks.boolean("decay").value_or(k.decay);
    k.decay_q = checks.number("decay_q", k.decay_q);
    k.decay_tol = checks.number("decay_tol", k.decay_tol);
    k.decay_window = checks.number("decay_window", k.decay_window);
  }
  if (!unknown.empty()) {
    std::sort(unknown.begin(), unknown.end());
    std::string list;
    for (const auto& u : unknown) list += (list.empty() ? "" : ", ") + u;
    throw ValidationError("unknown keys: " + list);
  }

  const ModelParams params(sc.dim);
  sc.solver.validate(params);

  const double t0 = start_time(sc.initial);
  if (!(sc.t_end > t0)) fail("solver.t_end", "must exceed the initial time");
  if (sc.boundary == BoundaryKind::Exact &&
      !(std::holds_alternative<ExplicitBlowup>(sc.initial) || std::holds_alternative<SelfSimilar>(sc.initial))) {
    fail("solver.boundary", "exact boundary needs an explicit_blowup or selfsimilar datum");
  }
  if (const auto* p = std::get_if<SelfSimilar>(&sc.initial)) {
    const double R = sc.solver.grid.r_max;
    if (R * R / p->t0 > p->y_max) fail("solver.r_max", "r_max^2 / t0 exceeds initial.y_max");
  }

  const auto& k = sc.checks;
  if (k.barrier_K) positive("checks.barrier_K", *k.barrier_K);
  if (k.barrier_p && !(*k.barrier_p > 0.5 * sc.dim && *k.barrier_p < sc.dim)) {
    fail("checks.barrier_p", "must lie in (d/2, d)");
  }
  if (k.barrier_eps) {
    const double p = k.barrier_p.value_or(sc.dim / (1.0 + *k.barrier_eps));
    if (!(*k.barrier_eps > 0.0 && *k.barrier_eps < sc.dim / (2.0 * p))) {
      fail("checks.barrier_eps", "must lie in (0, d/(2p))");
    }
  }
  if (k.comparison_p) positive("checks.comparison_p", *k.comparison_p);
  positive("checks.comparison_tol", k.comparison_tol);
  positive("checks.decay_tol", k.decay_tol);
  if (!(k.decay_window > 0.0 && k.decay_window <= 1.0)) fail("checks.decay_window", "must lie in (0, 1]");
  if (k.decay) {
    const auto& lq = sc.solver.lq_exponents;
    if (std::find(lq.begin(), lq.end(), k.decay_q) == lq.end()) {
      fail("checks.decay_q", "must be listed in solver.lq_exponents");
    }
  }
  return sc;
}

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  return parse_scenario_table(parse_toml(text, "scenario"), base_dir);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string() + ": cannot open scenario file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_table(parse_toml(buf.str(), path.string()), path.parent_path());
}

std::string to_toml(const Scenario& scenario) {
  std::ostringstream os;
  os << to_table(scenario) << "\n";
  return os.str();
}

std::string to_json(const Scenario& scenario) {
  std::ostringstream os;
  os << toml::json_formatter{to_table(scenario)};
  return os.str();
}

MassProfile initial_profile(const Scenario& sc) {
  const ModelParams params(sc.dim);
  if (const auto* f = std::get_if<FromCsv>(&sc.initial)) return *f->profile;
  const RadialGrid grid = sc.solver.grid.build();
  const double d = sc.dim;
  return std::visit(
      [&](const auto& v) -> MassProfile {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ChandrasekharScaled>) {
          const double a2 = v.smoothing * v.smoothing;
          return integrate_density(params, grid, [&](double r) { return v.eps * 2.0 * (d - 2.0) / (r * r + a2); }, 0.0);
        } else if constexpr (std::is_same_v<T, ExplicitBlowup>) {
          return tabulate_mass(grid, [&](double r) { return explicit_blowup_mass(params, v.T, r, 0.0); });
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          const double w2 = 2.0 * v.width * v.width;
          return integrate_density(params, grid, [&](double r) { return v.A * std::exp(-r * r / w2); }, 0.0);
        } else if constexpr (std::is_same_v<T, SelfSimilar>) {
          ShootOptions opt;
          opt.y_max = v.y_max;
          const auto sol = shoot_profile(sc.dim, v.a, opt);
          return selfsimilar_to_mass(params, sol, v.t0, grid);
        } else {
          return *v.profile;
        }
      },
      sc.initial);
}

SolverConfig resolved_solver(const Scenario& sc) {
  SolverConfig c = sc.solver;
  if (sc.boundary != BoundaryKind::Exact) return c;
  const ModelParams params(sc.dim);
  const double R = std::holds_alternative<FromCsv>(sc.initial) ? 0.0 : c.grid.r_max;
  if (const auto* e = std::get_if<ExplicitBlowup>(&sc.initial)) {
    const double T = e->T;
    c.outer_boundary = [params, T, R](double t) {
      if (t < T) return explicit_blowup_mass(params, T, R, t);
      return chandrasekhar_mass(params, R) * 2.0;
    };
  } else if (const auto* p = std::get_if<SelfSimilar>(&sc.initial)) {
    ShootOptions opt;
    opt.y_max = p->y_max;
    auto sol = std::make_shared<const ProfileSolution>(shoot_profile(sc.dim, p->a, opt));
    c.outer_boundary = [params, sol, R](double t) {
      return params.sigma() * std::pow(t, 0.5 * params.dim() - 1.0) * sol->at(R * R / t)[0];
    };
  }
  return c;
}

}  // namespace kslab::app
