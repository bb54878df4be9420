#include "canon4/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "CLI11.hpp"

namespace canon4 {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void input_error(const std::string& message) { throw Error(ErrorKind::Input, message); }

// --- serialization ------------------------------------------------------------------------------

std::string number_text(const ojson& j) {
  if (j.is_number_integer()) return j.dump();
  const double x = j.get<double>();
  return std::isfinite(x) ? fmt_num(x) : "null";
}

bool is_flat(const ojson& j) {
  for (const auto& e : j)
    if (e.is_structured()) return false;
  return true;
}

// JSON text with every float printed at 17 significant digits and arrays of scalars kept on one line.
void dump(const ojson& j, std::string& s, int level) {
  const std::string pad(2 * (level + 1), ' '), close(2 * level, ' ');
  if (j.is_object()) {
    if (j.empty()) {
      s += "{}";
      return;
    }
    s += "{\n";
    bool first = true;
    for (const auto& [key, value] : j.items()) {
      if (!first) s += ",\n";
      first = false;
      s += pad + ojson(key).dump() + ": ";
      dump(value, s, level + 1);
    }
    s += "\n" + close + "}";
  } else if (j.is_array()) {
    if (is_flat(j)) {
      s += "[";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) s += ", ";
        dump(j[k], s, level + 1);
      }
      s += "]";
      return;
    }
    s += "[\n";
    for (std::size_t k = 0; k < j.size(); ++k) {
      if (k) s += ",\n";
      s += pad;
      dump(j[k], s, level + 1);
    }
    s += "\n" + close + "]";
  } else if (j.is_number()) {
    s += number_text(j);
  } else {
    s += j.dump();
  }
}

std::string compact(const ojson& j) {
  if (j.is_number()) return number_text(j);
  if (j.is_string()) return j.get<std::string>();
  if (j.is_array()) {
    std::string s = "[";
    for (std::size_t k = 0; k < j.size(); ++k) s += (k ? "," : "") + compact(j[k]);
    return s + "]";
  }
  return j.dump();
}

void flatten(const ojson& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) flatten(value, prefix.empty() ? key : prefix + "." + key, out);
  } else {
    out.emplace_back(prefix, compact(j));
  }
}

ojson bounds_json(const Domain& d) { return ojson::array({d.u_min, d.u_max, d.v_min, d.v_max}); }

ojson lattice_json(const Lattice& l) {
  ojson j = ojson::object();
  j["nu"] = l.nu;
  j["nv"] = l.nv;
  j["bounds"] = bounds_json(l.bounds);
  return j;
}

ojson point_json(Point2 p) { return ojson::array({p.u, p.v}); }

ojson matrix_json(const Eigen::Matrix4d& m) {
  ojson a = ojson::array();
  for (int r = 0; r < 4; ++r) a.push_back(ojson::array({m(r, 0), m(r, 1), m(r, 2), m(r, 3)}));
  return a;
}

ojson vector_json(const Eigen::Vector4d& v) { return ojson::array({v[0], v[1], v[2], v[3]}); }

// --- parsing helpers ----------------------------------------------------------------------------

std::vector<double> split_numbers(const std::string& text, char sep, std::size_t count, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      input_error("malformed " + what + " '" + text + "'");
    }
  }
  if (out.size() != count) input_error("malformed " + what + " '" + text + "'");
  return out;
}

Domain parse_bounds(const std::string& text) {
  const auto b = split_numbers(text, ',', 4, "bounds");
  return {b[0], b[1], b[2], b[3]};
}

Point2 parse_point(const std::string& text) {
  const auto p = split_numbers(text, ',', 2, "point");
  return {p[0], p[1]};
}

std::pair<int, int> parse_grid(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) input_error("malformed grid '" + text + "', expected NUxNV");
  const auto g = split_numbers(text.substr(0, x) + "," + text.substr(x + 1), ',', 2, "grid");
  if (g[0] < 1 || g[1] < 1 || g[0] != std::floor(g[0]) || g[1] != std::floor(g[1]))
    input_error("malformed grid '" + text + "'");
  return {static_cast<int>(g[0]), static_cast<int>(g[1])};
}

std::pair<std::string, double> parse_assignment(const std::string& text, const std::string& what) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) input_error("malformed " + what + " '" + text + "', expected NAME=VALUE");
  return {text.substr(0, eq), split_numbers(text.substr(eq + 1), ',', 1, what)[0]};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) input_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json parse_document(const std::string& text, const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    input_error(origin + ": invalid JSON (" + e.what() + ")");
  }
  if (!j.is_object() || !j.contains("schema") || j["schema"] != kSchemaTag)
    input_error(origin + ": missing \"schema\": \"" + std::string(kSchemaTag) + "\"");
  return j;
}

template <class T>
T field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) input_error(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    input_error(std::string("field '") + key + "' has the wrong type");
  }
}

template <class T>
T field_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? field<T>(j, key) : fallback;
}

Domain domain_from(const std::vector<double>& b) {
  if (b.size() != 4) input_error("bounds need four numbers");
  return {b[0], b[1], b[2], b[3]};
}

Point2 point_from(const std::vector<double>& p) {
  if (p.size() != 2) input_error("a point needs two numbers");
  return {p[0], p[1]};
}

Lattice lattice_from(const nlohmann::json& j) {
  Lattice l{field<int>(j, "nu"), field<int>(j, "nv"), domain_from(field<std::vector<double>>(j, "bounds"))};
  l.validate();
  return l;
}

const char* const kDataFields[4] = {"nu1", "nu2", "lambda", "mu"};

}  // namespace

// --- public I/O ---------------------------------------------------------------------------------

void GridOutput::add(const std::string& name, std::vector<double> values) {
  if (values.size() != lattice.size()) throw Error(ErrorKind::ShapeMismatch, "column '" + name + "' has wrong size");
  columns.emplace_back(name, std::move(values));
}

const std::vector<double>* GridOutput::column(const std::string& name) const {
  for (const auto& [n, values] : columns)
    if (n == name) return &values;
  return nullptr;
}

ojson to_json(const GridOutput& g) {
  ojson j = ojson::object();
  j["schema"] = kSchemaTag;
  j["kind"] = "grid";
  j["command"] = g.command;
  j["source"] = g.source;
  j["lattice"] = lattice_json(g.lattice);
  j["report"] = g.report;
  ojson cols = ojson::object();
  for (const auto& [name, values] : g.columns) cols[name] = values;
  j["columns"] = std::move(cols);
  return j;
}

void write_json(std::ostream& os, const ojson& j) {
  std::string s;
  dump(j, s, 0);
  os << s << '\n';
}

void write_csv(std::ostream& os, const GridOutput& g) {
  const Domain& b = g.lattice.bounds;
  os << "# " << kSchemaTag << " grid nu=" << g.lattice.nu << " nv=" << g.lattice.nv << " bounds=" << fmt_num(b.u_min)
     << ',' << fmt_num(b.u_max) << ',' << fmt_num(b.v_min) << ',' << fmt_num(b.v_max) << '\n';
  os << "# command=" << g.command << '\n';
  os << "# source=" << g.source << '\n';
  std::vector<std::pair<std::string, std::string>> lines;
  flatten(g.report, "", lines);
  for (const auto& [k, v] : lines) os << "# " << k << '=' << v << '\n';
  for (std::size_t c = 0; c < g.columns.size(); ++c) os << (c ? "," : "") << g.columns[c].first;
  os << '\n';
  for (std::size_t k = 0; k < g.lattice.size(); ++k) {
    for (std::size_t c = 0; c < g.columns.size(); ++c) os << (c ? "," : "") << fmt_num(g.columns[c].second[k]);
    os << '\n';
  }
}

GridOutput read_grid(const std::string& text) {
  GridOutput g;
  const auto start = text.find_first_not_of(" \t\r\n");
  if (start != std::string::npos && text[start] == '{') {
    const nlohmann::json j = parse_document(text, "grid");
    g.command = field_or<std::string>(j, "command", "");
    g.source = field_or<std::string>(j, "source", "");
    g.lattice = lattice_from(field<nlohmann::json>(j, "lattice"));
    // Column order is part of the format, so re-read them with insertion order kept.
    const ojson cols = ojson::parse(text)["columns"];
    if (!cols.is_object()) input_error("grid: 'columns' must be an object");
    for (const auto& [name, arr] : cols.items()) {
      if (!arr.is_array()) input_error("grid: column '" + name + "' is not an array");
      std::vector<double> values;
      for (const auto& x : arr) values.push_back(x.is_null() ? kNaN : x.get<double>());
      g.add(name, std::move(values));
    }
    return g;
  }

  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind(std::string("# ") + kSchemaTag + " grid", 0) != 0)
    input_error("grid: missing '# " + std::string(kSchemaTag) + " grid' line");
  std::map<std::string, std::string> meta;
  {
    std::istringstream ls(line.substr(2));
    std::string tok;
    while (ls >> tok) {
      const auto eq = tok.find('=');
      if (eq != std::string::npos) meta[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
  }
  if (!meta.count("nu") || !meta.count("nv") || !meta.count("bounds")) input_error("grid: incomplete lattice line");
  g.lattice = {static_cast<int>(split_numbers(meta["nu"], ',', 1, "nu")[0]),
               static_cast<int>(split_numbers(meta["nv"], ',', 1, "nv")[0]), parse_bounds(meta["bounds"])};
  g.lattice.validate();
  std::vector<std::string> header;
  std::vector<std::vector<double>> values;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (line.rfind("# command=", 0) == 0) g.command = line.substr(eq + 1);
      if (line.rfind("# source=", 0) == 0) g.source = line.substr(eq + 1);
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (header.empty()) {
      header = cells;
      values.assign(header.size(), {});
      continue;
    }
    if (cells.size() != header.size()) input_error("grid: row with " + std::to_string(cells.size()) + " cells");
    for (std::size_t c = 0; c < cells.size(); ++c)
      values[c].push_back(cells[c] == "nan" || cells[c] == "-nan" ? kNaN
                                                                   : split_numbers(cells[c], ',', 1, "cell")[0]);
  }
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (values[c].size() != g.lattice.size())
      throw Error(ErrorKind::ShapeMismatch, "grid: row count does not match the lattice line");
    g.add(header[c], std::move(values[c]));
  }
  return g;
}

SurfaceDefinition surface_from_json(const nlohmann::json& j) {
  SurfaceDefinition s;
  s.name = field_or<std::string>(j, "name", "surface");
  s.description = field_or<std::string>(j, "description", "");
  const auto coords = field<std::vector<std::string>>(j, "coords");
  if (coords.size() != 4) input_error("'coords' needs four expressions");
  for (int k = 0; k < 4; ++k) s.coords[k] = coords[k];
  s.domain = domain_from(field<std::vector<double>>(j, "domain"));
  s.orientation = field_or<int>(j, "orientation", 1);
  if (s.orientation != 1 && s.orientation != -1) input_error("'orientation' must be 1 or -1");
  if (j.contains("base")) s.base = point_from(field<std::vector<double>>(j, "base"));
  s.c1 = field_or<double>(j, "c1", 0.0);
  s.c2 = field_or<double>(j, "c2", 0.0);
  s.c = field_or<double>(j, "c", 1.0);
  to_chart(s);  // validates the expressions and the domain
  return s;
}

ojson surface_to_json(const SurfaceDefinition& s) {
  ojson j = ojson::object();
  j["schema"] = kSchemaTag;
  j["name"] = s.name;
  if (!s.description.empty()) j["description"] = s.description;
  j["coords"] = ojson::array({s.coords[0], s.coords[1], s.coords[2], s.coords[3]});
  j["domain"] = bounds_json(s.domain);
  j["orientation"] = s.orientation;
  j["base"] = point_json(s.base);
  j["c1"] = s.c1;
  j["c2"] = s.c2;
  j["c"] = s.c;
  return j;
}

DataFile data_from_definition(const DataDefinition& d) {
  DataFile f;
  f.name = d.name;
  std::array<Expression, 4> e;
  for (int k = 0; k < 4; ++k) e[k] = parse(d.functions[k]);
  f.data.source = std::make_shared<ExpressionSource>(std::move(e));
  f.data.lattice = d.lattice;
  f.data.base = d.base;
  f.data.c1 = d.c1;
  f.data.c2 = d.c2;
  f.data.c = d.c;
  return f;
}

DataFile data_from_json(const nlohmann::json& j, const Tolerances&) {
  DataFile f;
  f.name = field_or<std::string>(j, "name", "data");
  const Lattice lattice = lattice_from(field<nlohmann::json>(j, "lattice"));
  if (j.contains("functions") == j.contains("grid")) input_error("data needs exactly one of 'functions' or 'grid'");
  if (j.contains("functions")) {
    const auto fn = field<nlohmann::json>(j, "functions");
    std::array<Expression, 4> e;
    for (int k = 0; k < 4; ++k) e[k] = parse(field<std::string>(fn, kDataFields[k]));
    f.data.source = std::make_shared<ExpressionSource>(std::move(e));
  } else {
    const auto grid = field<nlohmann::json>(j, "grid");
    std::array<GridField, 4> fields;
    for (int k = 0; k < 4; ++k) {
      fields[k] = GridField(lattice);
      const auto values = field<std::vector<double>>(grid, kDataFields[k]);
      if (values.size() != lattice.size())
        throw Error(ErrorKind::ShapeMismatch, std::string("grid field '") + kDataFields[k] + "' has " +
                                                  std::to_string(values.size()) + " values, lattice has " +
                                                  std::to_string(lattice.size()));
      fields[k].values = values;
    }
    f.data.source = std::make_shared<GridSource>(std::move(fields));
  }
  f.data.lattice = lattice;
  if (j.contains("base")) f.data.base = point_from(field<std::vector<double>>(j, "base"));
  f.data.c1 = field_or<double>(j, "c1", 0.0);
  f.data.c2 = field_or<double>(j, "c2", 0.0);
  if (j.contains("c")) f.data.c = field<double>(j, "c");
  if (j.contains("initial")) {
    const auto init = field<nlohmann::json>(j, "initial");
    if (init.contains("z")) {
      const auto z = field<std::vector<double>>(init, "z");
      if (z.size() != 4) input_error("'initial.z' needs four numbers");
      f.initial.z = Eigen::Vector4d(z[0], z[1], z[2], z[3]);
    }
    if (init.contains("frame")) {
      const auto rows = field<std::vector<std::vector<double>>>(init, "frame");
      if (rows.size() != 4) input_error("'initial.frame' needs four rows");
      for (int r = 0; r < 4; ++r) {
        if (rows[r].size() != 4) input_error("'initial.frame' rows need four numbers");
        for (int c = 0; c < 4; ++c) f.initial.frame(r, c) = rows[r][c];
      }
    }
  }
  return f;
}

// --- commands -----------------------------------------------------------------------------------

namespace {

struct Options {
  std::string surface_file, catalog, data, grid, bounds, base, format = "json", out, target;
  std::optional<double> c1, c2, c;
  std::vector<std::string> tolerance, perturb, files;
  bool force = false, rotate = false;
};

/// What a command hands back: a document to print and the exit code.
struct Outcome {
  std::optional<GridOutput> grid;
  ojson document;  // used when there is no grid
  int code = 0;
};

Tolerances tolerances(const Options& o) {
  Tolerances tol;
  for (const auto& t : o.tolerance) {
    const auto [name, value] = parse_assignment(t, "tolerance");
    if (!tol.set(name, value)) input_error("unknown tolerance '" + name + "'");
  }
  return tol;
}

SurfaceDefinition load_surface(const Options& o) {
  if (!o.surface_file.empty() && !o.catalog.empty()) input_error("give either --surface or --catalog, not both");
  if (!o.surface_file.empty())
    return surface_from_json(parse_document(read_file(o.surface_file), o.surface_file));
  if (o.catalog.empty()) input_error("no surface given; use --surface FILE or --catalog NAME");
  auto s = find_surface(o.catalog);
  if (!s) input_error("unknown catalog surface '" + o.catalog + "'");
  return *s;
}

Lattice lattice_for(const Options& o, const Domain& fallback, const Lattice* base = nullptr) {
  Lattice l;
  if (base) l = *base;
  else l = {21, 21, fallback};
  if (!o.grid.empty()) std::tie(l.nu, l.nv) = parse_grid(o.grid);
  if (!o.bounds.empty()) l.bounds = parse_bounds(o.bounds);
  l.validate();
  return l;
}

std::vector<double> nodes_u(const Lattice& l) {
  std::vector<double> out(l.size());
  for (int j = 0; j < l.nv; ++j)
    for (int i = 0; i < l.nu; ++i) out[l.index(i, j)] = l.u(i);
  return out;
}

std::vector<double> nodes_v(const Lattice& l) {
  std::vector<double> out(l.size());
  for (int j = 0; j < l.nv; ++j)
    for (int i = 0; i < l.nu; ++i) out[l.index(i, j)] = l.v(j);
  return out;
}

void add_vectors(GridOutput& g, const std::string& prefix, const std::vector<Vec4>& p) {
  for (int k = 0; k < 4; ++k) {
    std::vector<double> col(p.size());
    for (std::size_t n = 0; n < p.size(); ++n) col[n] = p[n][k];
    g.add(prefix + std::to_string(k + 1), std::move(col));
  }
}

GridOutput new_grid(const std::string& command, const std::string& source, const Lattice& l) {
  GridOutput g;
  g.command = command;
  g.source = source;
  g.lattice = l;
  g.add("u", nodes_u(l));
  g.add("v", nodes_v(l));
  return g;
}

Outcome cmd_invariants(const Options& o) {
  const Tolerances tol = tolerances(o);
  const SurfaceDefinition def = load_surface(o);
  const Chart chart = to_chart(def);
  const Lattice l = lattice_for(o, def.domain);
  GridOutput g = new_grid("invariants", def.name, l);

  std::vector<Vec4> z(l.size());
  std::map<std::string, std::vector<double>> c;
  const char* names[] = {"E", "F", "G", "L", "M", "N", "k", "varkappa", "K", "H_norm"};
  for (const char* n : names) c[n].resize(l.size());
  for (int j = 0; j < l.nv; ++j)
    for (int i = 0; i < l.nu; ++i) {
      const std::size_t k = l.index(i, j);
      const double u = l.u(i), v = l.v(j);
      for (int m = 0; m < 4; ++m) z[k][m] = evaluate(chart.coords[m], u, v);
      const FundamentalForms f = fundamental_forms(chart, u, v, tol);
      const Invariants inv = invariants(f);
      c["E"][k] = f.E, c["F"][k] = f.F, c["G"][k] = f.G;
      c["L"][k] = f.L, c["M"][k] = f.M, c["N"][k] = f.N;
      c["k"][k] = inv.k, c["varkappa"][k] = inv.varkappa, c["K"][k] = inv.K, c["H_norm"][k] = inv.H_norm;
    }
  add_vectors(g, "z", z);
  for (const char* n : names) g.add(n, std::move(c[n]));

  const PrincipalCheck pc = is_principal(chart, l, tol);
  bool emitted = false;
  std::size_t masked = 0;
  if (pc.principal) {
    const GeoGrid geo = geometric_grid(chart, l, tol);
    masked = geo.masked;
    if (geo.masked < l.size()) {
      emitted = true;
      const std::pair<const char*, const GridField*> gf[] = {
          {"nu1", &geo.nu1},       {"nu2", &geo.nu2},       {"lambda", &geo.lambda}, {"mu", &geo.mu},
          {"gamma1", &geo.gamma1}, {"gamma2", &geo.gamma2}, {"beta1", &geo.beta1},   {"beta2", &geo.beta2}};
      for (const auto& [n, f] : gf) g.add(n, f->values);
    }
  }
  g.report["principal"] = pc.principal;
  g.report["principal_residual"] = pc.max_residual;
  g.report["minimal_points"] = masked;
  g.report["geometric_functions"] = emitted;
  Outcome out;
  out.grid = std::move(g);
  return out;
}

Outcome cmd_check(const Options& o) {
  const Tolerances tol = tolerances(o);
  const SurfaceDefinition def = load_surface(o);
  const Chart chart = to_chart(def);
  const Lattice l = lattice_for(o, def.domain);
  std::vector<Perturbation> perturb;
  for (const auto& p : o.perturb) {
    const auto [name, factor] = parse_assignment(p, "perturbation");
    perturb.push_back({name, factor});
  }
  const ResidualGrid res = basic_system_residual(chart, l, tol, perturb);
  GridOutput g = new_grid("check", def.name, l);
  ojson max_each = ojson::array(), mean_each = ojson::array();
  double mean_all = 0;
  for (int e = 0; e < 6; ++e) {
    g.add("r" + std::to_string(e + 1), res.r[e].values);
    max_each.push_back(res.r[e].max_abs());
    mean_each.push_back(res.r[e].mean_abs());
    mean_all += res.r[e].mean_abs() / 6.0;
  }
  const double max_all = res.max_abs();
  const bool passed = max_all < tol.tol_residual && res.masked < l.size();
  g.report["max"] = max_all;
  g.report["mean"] = mean_all;
  g.report["max_per_equation"] = std::move(max_each);
  g.report["mean_per_equation"] = std::move(mean_each);
  g.report["minimal_points"] = res.masked;
  g.report["tol_residual"] = tol.tol_residual;
  g.report["passed"] = passed;
  Outcome out;
  out.grid = std::move(g);
  out.code = passed ? 0 : 1;
  return out;
}

ojson canonical_json(const CanonicalReport& r) {
  ojson j = ojson::object();
  j["is_canonical"] = r.is_canonical;
  j["max_deviation"] = r.max_deviation;
  j["phi_spread"] = r.phi_spread;
  j["psi_spread"] = r.psi_spread;
  return j;
}

Outcome cmd_canonize(const Options& o) {
  const Tolerances tol = tolerances(o);
  const SurfaceDefinition def = load_surface(o);
  Chart chart = to_chart(def);
  if (o.rotate) {
    chart = principal_rotation(chart, Lattice{21, 21, chart.domain}, tol);
  }
  const Lattice l = lattice_for(o, chart.domain);
  chart.domain = l.bounds;
  Point2 base = o.base.empty() ? def.base : parse_point(o.base);
  if (o.base.empty() && !chart.domain.contains(base.u, base.v))
    base = {(chart.domain.u_min + chart.domain.u_max) / 2, (chart.domain.v_min + chart.domain.v_max) / 2};
  const CanonicalConstants constants{o.c1.value_or(def.c1), o.c2.value_or(def.c2), false};

  auto patch = std::make_shared<const ChartPatch>(chart, tol);
  const CanonicalReport before = phi_psi(*patch, base, constants, l, tol);
  const CanonizeResult result = canonize_transform(patch, base, constants, tol);
  const Domain nd = result.patch->domain();
  const Lattice nl{l.nu, l.nv, nd};
  const Point2 nbase{result.map_u.forward(base.u), result.map_v.forward(base.v)};
  const CanonicalReport after = phi_psi(*result.patch, nbase, constants, nl, tol);

  double gap = 0;
  for (int i = 0; i < l.nu; ++i) gap = std::max(gap, std::abs(result.map_u.forward(l.u(i)) - l.u(i)));
  for (int j = 0; j < l.nv; ++j) gap = std::max(gap, std::abs(result.map_v.forward(l.v(j)) - l.v(j)));

  GridOutput g = new_grid("canonize", def.name, nl);
  std::vector<double> uo(nl.size()), vo(nl.size());
  std::vector<Vec4> z(nl.size());
  for (int j = 0; j < nl.nv; ++j)
    for (int i = 0; i < nl.nu; ++i) {
      const std::size_t k = nl.index(i, j);
      const Point2 p = result.patch->original(nl.u(i), nl.v(j));
      uo[k] = p.u;
      vo[k] = p.v;
      z[k] = result.patch->position(nl.u(i), nl.v(j));
    }
  g.add("u_orig", std::move(uo));
  g.add("v_orig", std::move(vo));
  add_vectors(g, "z", z);
  g.report["rotated"] = o.rotate;
  g.report["base"] = point_json(base);
  g.report["c1"] = result.c1;
  g.report["c2"] = result.c2;
  g.report["input"] = canonical_json(before);
  g.report["output"] = canonical_json(after);
  g.report["map_identity_gap"] = gap;
  g.report["input_domain"] = bounds_json(chart.domain);
  g.report["output_domain"] = bounds_json(nd);
  Outcome out;
  out.grid = std::move(g);
  return out;
}

DataFile load_data(const Options& o, const Tolerances& tol) {
  if (o.data.empty()) input_error("no data given; use --data FILE or a catalog data name");
  if (auto d = find_data(o.data)) return data_from_definition(*d);
  return data_from_json(parse_document(read_file(o.data), o.data), tol);
}

Outcome cmd_reconstruct(const Options& o) {
  const Tolerances tol = tolerances(o);
  DataFile f = load_data(o, tol);
  DeterminingData& d = f.data;
  d.lattice = lattice_for(o, d.lattice.bounds, &d.lattice);
  if (!o.base.empty()) d.base = parse_point(o.base);
  if (o.c1) d.c1 = *o.c1;
  if (o.c2) d.c2 = *o.c2;
  if (o.c) d.c = *o.c;

  ReconstructOptions ro;
  ro.initial = f.initial;
  ro.force = o.force;
  const Reconstruction r = reconstruct(d, ro, tol);
  const FrameGrid& fg = r.grid;

  GridOutput g = new_grid("reconstruct", f.name, d.lattice);
  add_vectors(g, "z", fg.z);
  add_vectors(g, "x", fg.x);
  add_vectors(g, "y", fg.y);
  add_vectors(g, "b", fg.b);
  add_vectors(g, "l", fg.l);
  g.add("phi", fg.phi.values);
  g.add("psi", fg.psi.values);
  g.add("beta1", fg.beta1.values);
  g.add("beta2", fg.beta2.values);
  g.add("compat_gauss", r.compat.gauss.values);
  g.add("compat_normal", r.compat.normal.values);
  g.add("commutation", fg.commutation.values);

  g.report["base"] = point_json(d.base);
  g.report["c1"] = d.c1;
  g.report["c2"] = d.c2;
  g.report["c"] = d.ratio();
  g.report["compat_max"] = r.compat_max;
  g.report["compat_passed"] = r.compat_passed;
  g.report["forced"] = o.force;
  g.report["commutation_max"] = fg.commutation_max;
  g.report["max_drift"] = fg.max_drift;
  g.report["max_gram_error"] = fg.max_gram_error;
  g.report["valid"] = bounds_json(r.valid);
  if (!o.target.empty()) {
    SurfaceDefinition target;
    if (auto s = find_surface(o.target)) target = *s;
    else target = surface_from_json(parse_document(read_file(o.target), o.target));
    const RigidMotion m = align_rigid(fg.z, sample_positions(to_chart(target), d.lattice));
    ojson a = ojson::object();
    a["target"] = target.name;
    a["rms"] = m.rms;
    a["reflection"] = m.reflection;
    a["det"] = m.Q.determinant();
    a["Q"] = matrix_json(m.Q);
    a["t"] = vector_json(m.t);
    g.report["alignment"] = std::move(a);
  }
  Outcome out;
  out.grid = std::move(g);
  return out;
}

std::vector<Vec4> positions(const GridOutput& g, const std::string& origin) {
  std::vector<Vec4> p(g.lattice.size());
  for (int k = 0; k < 4; ++k) {
    const auto* col = g.column("z" + std::to_string(k + 1));
    if (!col) input_error(origin + ": no column z" + std::to_string(k + 1));
    for (std::size_t n = 0; n < p.size(); ++n) p[n][k] = (*col)[n];
  }
  return p;
}

Outcome cmd_compare(const Options& o) {
  if (o.files.size() != 2) input_error("compare needs two grid files");
  const GridOutput a = read_grid(read_file(o.files[0]));
  const GridOutput b = read_grid(read_file(o.files[1]));
  if (a.lattice.nu != b.lattice.nu || a.lattice.nv != b.lattice.nv)
    throw Error(ErrorKind::ShapeMismatch, "grids have shapes " + std::to_string(a.lattice.nu) + "x" +
                                              std::to_string(a.lattice.nv) + " and " + std::to_string(b.lattice.nu) +
                                              "x" + std::to_string(b.lattice.nv));
  const RigidMotion m = align_rigid(positions(a, o.files[0]), positions(b, o.files[1]));
  Outcome out;
  ojson j = ojson::object();
  j["schema"] = kSchemaTag;
  j["kind"] = "motion";
  j["rms"] = m.rms;
  j["det"] = m.Q.determinant();
  j["reflection"] = m.reflection;
  j["Q"] = matrix_json(m.Q);
  j["t"] = vector_json(m.t);
  out.document = std::move(j);
  return out;
}

void write_motion_csv(std::ostream& os, const ojson& j) {
  os << "# " << kSchemaTag << " motion\n";
  os << "# rms=" << compact(j["rms"]) << "\n# det=" << compact(j["det"]) << "\n# reflection=" << compact(j["reflection"])
     << '\n';
  os << "row,q1,q2,q3,q4,t\n";
  for (int r = 0; r < 4; ++r) {
    os << r + 1;
    for (int c = 0; c < 4; ++c) os << ',' << compact(j["Q"][r][c]);
    os << ',' << compact(j["t"][r]) << '\n';
  }
}

void emit(const Options& o, const Outcome& res, std::ostream& out) {
  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out, std::ios::binary);
    if (!file) input_error("cannot write '" + o.out + "'");
  }
  std::ostream& os = o.out.empty() ? out : file;
  if (res.grid) {
    if (o.format == "csv") write_csv(os, *res.grid);
    else write_json(os, to_json(*res.grid));
  } else {
    if (o.format == "csv") write_motion_csv(os, res.document);
    else write_json(os, res.document);
  }
}

void error_record(std::ostream& err, ErrorKind kind, const std::string& message, const std::optional<Point2>& where) {
  ojson e = ojson::object();
  e["kind"] = std::string(error_kind_name(kind));
  e["message"] = message;
  if (where) e["where"] = point_json(*where);
  ojson j = ojson::object();
  j["schema"] = kSchemaTag;
  j["error"] = std::move(e);
  write_json(err, j);
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--tolerance", o.tolerance, "Override a tolerance, NAME=VALUE (repeatable)");
  sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--out", o.out, "Write the output to FILE instead of stdout");
}

void add_surface(CLI::App* sub, Options& o) {
  sub->add_option("--surface", o.surface_file, "Surface definition JSON file");
  sub->add_option("--catalog", o.catalog, "Built-in catalog surface name");
  sub->add_option("--grid", o.grid, "Lattice size NUxNV (default 21x21)");
  sub->add_option("--bounds", o.bounds, "Lattice bounds u_min,u_max,v_min,v_max (default: the surface domain)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"canon4: surfaces in R^4, canonical principal parameters and reconstruction", "canon4"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  auto* inv = app.add_subcommand("invariants", "Forms, curvatures and geometric functions on a lattice");
  add_surface(inv, o);
  add_common(inv, o);

  auto* chk = app.add_subcommand("check", "Residuals of the six compatibility equations");
  add_surface(chk, o);
  add_common(chk, o);
  chk->add_option("--perturb", o.perturb, "Scale a geometric function, FIELD=FACTOR (repeatable)");

  auto* can = app.add_subcommand("canonize", "Canonical report and the reparametrized surface");
  add_surface(can, o);
  add_common(can, o);
  can->add_option("--base", o.base, "Base point u0,v0");
  can->add_option("--c1", o.c1, "Integration constant c1");
  can->add_option("--c2", o.c2, "Integration constant c2");
  can->add_flag("--rotate", o.rotate, "Apply u -> u + v, v -> u - v first");

  auto* rec = app.add_subcommand("reconstruct", "Surface from determining data");
  rec->add_option("--data", o.data, "Determining-data JSON file or catalog data name")->required();
  rec->add_option("--grid", o.grid, "Output lattice size NUxNV");
  rec->add_option("--bounds", o.bounds, "Output lattice bounds");
  rec->add_option("--base", o.base, "Base point u0,v0 (a lattice node)");
  rec->add_option("--c1", o.c1, "Integration constant c1");
  rec->add_option("--c2", o.c2, "Integration constant c2");
  rec->add_option("--c", o.c, "Ratio c (default exp(c2 - c1))");
  rec->add_flag("--force", o.force, "Continue when the compatibility gate fails");
  rec->add_option("--target", o.target, "Align the result to a catalog surface or surface file");
  add_common(rec, o);

  auto* cmp = app.add_subcommand("compare", "Rigid motion taking grid A onto grid B");
  cmp->add_option("files", o.files, "Grid files A and B")->expected(2)->required();
  add_common(cmp, o);

  std::vector<std::string> storage = args;
  storage.insert(storage.begin(), "canon4");
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    Outcome res;
    if (*inv) res = cmd_invariants(o);
    else if (*chk) res = cmd_check(o);
    else if (*can) res = cmd_canonize(o);
    else if (*rec) res = cmd_reconstruct(o);
    else res = cmd_compare(o);
    emit(o, res, out);
    return res.code;
  } catch (const Error& e) {
    error_record(err, e.kind(), e.what(), e.where());
    return e.kind() == ErrorKind::CompatibilityGate ? 3 : 2;
  } catch (const std::exception& e) {
    error_record(err, ErrorKind::Input, e.what(), std::nullopt);
    return 2;
  }
}

}  // namespace canon4
