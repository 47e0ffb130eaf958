#include "kslab/app/sweep.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "kslab/errors.hpp"
#include "kslab/profile_io.hpp"
#include "scenario_toml.hpp"

namespace kslab::app {

namespace {

struct Axis {
  std::string key;
  std::vector<const toml::node*> values;
};

void flatten(const toml::table& t, const std::string& prefix, std::vector<Axis>& axes) {
  for (auto&& [k, v] : t) {
    const std::string key = prefix.empty() ? std::string(k.str()) : prefix + "." + std::string(k.str());
    if (const auto* sub = v.as_table()) {
      flatten(*sub, key, axes);
    } else if (const auto* arr = v.as_array()) {
      Axis axis{key, {}};
      for (const auto& el : *arr) axis.values.push_back(&el);
      axes.push_back(std::move(axis));
    } else {
      throw ValidationError("grid." + key + ": expected an array of values");
    }
  }
}

std::string label(const toml::node& n) {
  if (auto s = n.value<std::string>(); s && n.is_string()) return *s;
  if (n.is_integer()) return std::to_string(*n.value<int64_t>());
  if (n.is_floating_point()) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, *n.value<double>());
    return std::string(buf, end);
  }
  if (n.is_boolean()) return *n.value<bool>() ? "true" : "false";
  std::ostringstream os;
  n.visit([&](const auto& v) { os << v; });
  return os.str();
}

void assign(toml::table& root, const std::string& dotted, const toml::node& value) {
  toml::table* t = &root;
  std::size_t pos = 0;
  while (true) {
    const auto dot = dotted.find('.', pos);
    const std::string part = dotted.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (dot == std::string::npos) {
      value.visit([&](const auto& v) { t->insert_or_assign(part, v); });
      return;
    }
    auto* next = t->get(part);
    if (!next) {
      t->insert(part, toml::table{});
      next = t->get(part);
    }
    if (!next->is_table()) throw ValidationError("grid." + dotted + ": " + part + " is not a table in the template");
    t = next->as_table();
    pos = dot + 1;
  }
}

toml::table read_toml(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string() + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str(), path.string());
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

}  // namespace

std::size_t default_workers() {
  if (const char* env = std::getenv("KSLAB_WORKERS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ValidationError(std::string("KSLAB_WORKERS: expected a positive integer, got '") + env + "'");
    return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SweepResult sweep(const std::filesystem::path& template_path, const std::filesystem::path& grid_path,
                  const std::filesystem::path& out_dir, std::size_t workers) {
  const toml::table base = read_toml(template_path);
  const toml::table grid = read_toml(grid_path);
  parse_scenario_table(base, template_path.parent_path());

  std::vector<Axis> axes;
  flatten(grid, "", axes);

  SweepResult res;
  for (const auto& a : axes) res.keys.push_back(a.key);
  std::size_t total = axes.empty() ? 0 : 1;
  for (const auto& a : axes) total *= a.values.size();

  res.runs.resize(total);
  for (std::size_t n = 0; n < total; ++n) {
    auto& r = res.runs[n];
    r.index = n;
    std::ostringstream name;
    name << "run_" << std::setw(4) << std::setfill('0') << n;
    r.directory = out_dir / name.str();
    std::size_t rem = n;
    r.values.resize(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      r.values[k] = label(*axes[k].values[rem % axes[k].values.size()]);
      rem /= axes[k].values.size();
    }
  }

  std::filesystem::create_directories(out_dir);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t n = next++; n < total; n = next++) {
      auto& r = res.runs[n];
      try {
        toml::table t = base;
        std::size_t rem = n;
        for (std::size_t k = axes.size(); k-- > 0;) {
          assign(t, axes[k].key, *axes[k].values[rem % axes[k].values.size()]);
          rem /= axes[k].values.size();
        }
        const Scenario sc = parse_scenario_table(t, template_path.parent_path());
        RunOptions opt;
        opt.directory = r.directory;
        r.manifest = run(sc, opt);
        r.status = r.manifest->numerical_failure() ? "numerical_failure" : "ok";
        if (r.manifest->numerical_failure()) r.error = r.manifest->reason;
      } catch (const ValidationError& e) {
        r.status = "validation_error";
        r.error = e.what();
      } catch (const std::exception& e) {
        r.status = "numerical_failure";
        r.error = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t n = std::max<std::size_t>(1, std::min(workers, total));
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
  }

  std::string csv = "run";
  for (const auto& k : res.keys) csv += "," + csv_field(k);
  csv += ",status,outcome,outcome_time,initial_concentration_over_2sigma,max_concentration_over_2sigma,checks,directory,error\n";
  for (const auto& r : res.runs) {
    csv += std::to_string(r.index);
    for (const auto& v : r.values) csv += "," + csv_field(v);
    csv += "," + r.status;
    if (r.manifest) {
      const auto& m = *r.manifest;
      csv += "," + m.outcome + "," + format_double(m.outcome_time) + "," + format_double(m.initial_concentration) + "," +
             format_double(m.max_concentration) + "," + (m.checks.empty() ? "" : (m.checks_passed() ? "PASS" : "FAIL"));
    } else {
      csv += ",,,,,";
    }
    csv += "," + csv_field(r.directory.filename().string()) + "," + csv_field(r.error) + "\n";
  }
  res.index = out_dir / "index.csv";
  write_atomic(res.index, csv);
  return res;
}

}  // namespace kslab::app
