#include "kslab/profile_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "kslab/errors.hpp"

namespace kslab {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::string s = line;
  for (char& c : s) {
    if (c == ',' || c == ';' || c == '\t') c = ' ';
  }
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_number(const std::string& tok, std::size_t line_no) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used == tok.size()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("line " + std::to_string(line_no) + ": not a number: '" + tok + "'");
}

void parse_comment(const std::string& line, std::optional<int>& dim, std::optional<double>& time) {
  std::istringstream is(line.substr(1));
  std::string tok;
  while (is >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    try {
      if (key == "d") dim = std::stoi(val);
      if (key == "t") time = std::stod(val);
    } catch (const std::exception&) {
      throw ValidationError("bad header value '" + tok + "'");
    }
  }
}

template <class Profile>
void write_impl(std::ostream& os, int dim, const Profile& p, const char* column) {
  os << "# d=" << dim << " t=" << format_double(p.time()) << "\n";
  os << "r," << column << "\n";
  const auto r = p.grid().nodes();
  const auto v = p.values();
  for (std::size_t i = 0; i < r.size(); ++i) os << format_double(r[i]) << ',' << format_double(v[i]) << '\n';
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

MassProfile ProfileFile::as_mass() const {
  if (const auto* m = std::get_if<MassProfile>(&profile)) return *m;
  return mass_from_density(ModelParams(dim), std::get<DensityProfile>(profile));
}

void write_profile_csv(std::ostream& os, int dim, const MassProfile& profile) {
  write_impl(os, dim, profile, "M");
}

void write_profile_csv(std::ostream& os, int dim, const DensityProfile& profile) {
  write_impl(os, dim, profile, "u");
}

ProfileFile read_profile_csv(std::istream& is) {
  std::optional<int> dim;
  std::optional<double> time;
  std::optional<bool> mass_column;
  std::vector<double> r, v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      parse_comment(line.substr(first), dim, time);
      continue;
    }
    auto fields = split_fields(line);
    if (!mass_column) {
      if (fields.size() != 2 || fields[0] != "r" || (fields[1] != "M" && fields[1] != "u")) {
        throw ValidationError("line " + std::to_string(line_no) + ": expected header 'r,M' or 'r,u'");
      }
      mass_column = fields[1] == "M";
      continue;
    }
    if (fields.size() != 2) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected two columns");
    }
    r.push_back(parse_number(fields[0], line_no));
    v.push_back(parse_number(fields[1], line_no));
  }
  if (!mass_column) throw ValidationError("profile CSV has no header");
  if (!dim) throw ValidationError("profile CSV lacks the '# d=<d> t=<t>' comment");

  RadialGrid grid(std::move(r));
  const double t = time.value_or(0.0);
  if (*mass_column) return ProfileFile{*dim, t, MassProfile(grid, std::move(v), t)};
  return ProfileFile{*dim, t, DensityProfile(grid, std::move(v), t)};
}

ProfileFile read_profile_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open profile file " + path.string());
  return read_profile_csv(in);
}

std::size_t NumericTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return k;
  }
  throw ValidationError("table has no column '" + name + "'");
}

NumericTable read_numeric_csv(std::istream& is) {
  NumericTable out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      parse_comment(line.substr(first), out.dim, out.time);
      continue;
    }
    auto fields = split_fields(line);
    if (out.header.empty()) {
      out.header = std::move(fields);
      continue;
    }
    if (fields.size() != out.header.size()) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected " + std::to_string(out.header.size()) +
                            " columns");
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_number(f, line_no));
    out.rows.push_back(std::move(row));
  }
  if (out.header.empty()) throw ValidationError("table has no header");
  return out;
}

NumericTable read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return read_numeric_csv(in);
}

TrajectoryFile read_trajectory_csv(const std::filesystem::path& path, std::optional<int> dim) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const auto table = read_numeric_csv(buf);
  TrajectoryFile out;
  if (dim) {
    out.dim = *dim;
  } else if (table.dim) {
    out.dim = *table.dim;
  } else {
    throw ValidationError(path.string() + ": no '# d=<d>' comment; pass the dimension explicitly");
  }

  if (table.header.size() == 2) {
    if (table.header[0] != "r" || (table.header[1] != "M" && table.header[1] != "u")) {
      throw ValidationError(path.string() + ": expected header 't,r,M', 'r,M' or 'r,u'");
    }
    std::vector<double> r, v;
    for (const auto& row : table.rows) {
      r.push_back(row[0]);
      v.push_back(row[1]);
    }
    const double t = table.time.value_or(0.0);
    RadialGrid grid(std::move(r));
    if (table.header[1] == "M") {
      out.profiles.emplace_back(grid, std::move(v), t);
    } else {
      out.profiles.push_back(mass_from_density(ModelParams(out.dim), DensityProfile(grid, std::move(v), t)));
    }
    return out;
  }
  const std::size_t ct = table.column("t");
  const std::size_t cr = table.column("r");
  const std::size_t cm = table.column("M");
  std::size_t k = 0;
  while (k < table.rows.size()) {
    const double t = table.rows[k][ct];
    std::vector<double> r, m;
    for (; k < table.rows.size() && table.rows[k][ct] == t; ++k) {
      r.push_back(table.rows[k][cr]);
      m.push_back(table.rows[k][cm]);
    }
    out.profiles.emplace_back(RadialGrid(std::move(r)), std::move(m), t);
  }
  return out;
}

}  // namespace kslab
