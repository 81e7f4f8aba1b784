#pragma once

// Run configuration: a flat sectioned key = value document (grammar in
// docs/config.md). Parsing is strict: unknown sections or keys, duplicates
// and type mismatches are errors carrying the line and column.

#include <cctype>
#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "vkplate/assembly.hpp"
#include "vkplate/constitutive.hpp"
#include "vkplate/expression.hpp"
#include "vkplate/grid.hpp"
#include "vkplate/korn.hpp"
#include "vkplate/stepper.hpp"

namespace vkplate {

class ConfigError : public ValidationError {
 public:
  ConfigError(int line, int column, const std::string& msg)
      : ValidationError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// `isotropic(mu, lambda)` or `voigt(c11, ..., c66)` for a 3D tensor.
struct TensorSpec {
  enum class Kind { isotropic, voigt };
  Kind kind = Kind::isotropic;
  double mu = 1.0;
  double lambda = 0.0;
  Eigen::Matrix<double, 6, 6> voigt = Eigen::Matrix<double, 6, 6>::Zero();

  SymTensor3D tensor() const {
    return kind == Kind::isotropic ? make_isotropic_c3(mu, lambda) : SymTensor3D::from_voigt(voigt);
  }
};

struct GridConfig {
  int nx = 8;
  int ny = 8;
  double lx = 1.0;
  double ly = 1.0;
  EdgeSet dirichlet{Edge::left};
};

struct MaterialConfig {
  TensorSpec elastic;
  TensorSpec viscous;
  Eigen::Matrix3d b_full = Eigen::Matrix3d::Zero();
  double cv_bar = 1.0;
  Eigen::Matrix3d k3 = Eigen::Matrix3d::Identity();
  double kappa = 0.0;
  double alpha = 4.0;
};

struct LoadsConfig {
  Expression f2d;
  Expression mu_flat;
  std::optional<Expression> test_only_gu1;
  std::optional<Expression> test_only_gu2;
};

struct IcConfig {
  Expression u1, u2, v, mu;
  std::optional<Expression> v_d1, v_d2, v_d12;
};

struct OutputConfig {
  std::string csv = "ledger.csv";
  int vtk_stride = 0;  ///< 0 disables VTK output
  std::string vtk_prefix = "state";
};

struct KornConfig {
  std::vector<double> hs{0.4, 0.2, 0.1};
  int n = 8;
  int nz = 3;
  ZKind z = ZKind::identity;
};

struct RunConfig {
  GridConfig grid;
  MaterialConfig material;
  LoadsConfig loads;
  IcConfig ic;
  SimParams sim;
  OutputConfig output;
  KornConfig korn;

  PlateMesh mesh() const {
    return build_grid(grid.nx, grid.ny, grid.lx, grid.ly, grid.dirichlet);
  }

  MaterialSet material_set() const {
    return make_material_set(material.elastic.tensor(), material.viscous.tensor(), material.b_full,
                             material.cv_bar, material.k3, material.kappa, material.alpha);
  }

  Loads plate_loads() const {
    Loads l;
    l.f2d = loads.f2d;
    l.mu_flat = loads.mu_flat;
    if (loads.test_only_gu1 || loads.test_only_gu2) {
      const Expression g1 = loads.test_only_gu1.value_or(Expression(0.0));
      const Expression g2 = loads.test_only_gu2.value_or(Expression(0.0));
      l.gu_test = [g1, g2](double x1, double x2, double t) { return Eigen::Vector2d(g1(x1, x2, t), g2(x1, x2, t)); };
    }
    return l;
  }

  InitialConditions initial_conditions() const {
    InitialConditions c;
    c.u1 = ic.u1;
    c.u2 = ic.u2;
    c.v = ic.v;
    c.mu = ic.mu;
    if (ic.v_d1) c.v_d1 = ScalarField(*ic.v_d1);
    if (ic.v_d2) c.v_d2 = ScalarField(*ic.v_d2);
    if (ic.v_d12) c.v_d12 = ScalarField(*ic.v_d12);
    return c;
  }
};

namespace detail {

struct ConfigValue {
  std::string text;
  int line = 0;
  int column = 0;  ///< of the first character of the value
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

class ConfigReader {
 public:
  using Section = std::map<std::string, ConfigValue>;

  explicit ConfigReader(std::string_view text) {
    static const std::map<std::string, std::set<std::string>> schema{
        {"grid", {"nx", "ny", "lx", "ly", "dirichlet_edges"}},
        {"material", {"elastic", "viscous", "b_full", "cv_bar", "k3", "kappa", "alpha"}},
        {"loads", {"f2d", "mu_flat", "test_only_gu1", "test_only_gu2"}},
        {"ic", {"u0_1", "u0_2", "v0", "v0_d1", "v0_d2", "v0_d12", "mu0"}},
        {"sim", {"dt", "t_end", "newton_tol", "newton_max_iter", "heat_solver"}},
        {"output", {"csv", "vtk_stride", "vtk_prefix"}},
        {"korn", {"hs", "n", "nz", "z"}},
    };
    std::string section;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view raw = text.substr(start, end - start);
      ++line_no;
      start = end + 1;
      if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
      const std::size_t hash = raw.find('#');
      const std::string_view line = hash == std::string_view::npos ? raw : raw.substr(0, hash);
      const std::string_view body = trim(line);
      if (body.empty()) {
        if (end == text.size()) break;
        continue;
      }
      const int indent = static_cast<int>(line.find_first_not_of(" \t")) + 1;
      if (body.front() == '[') {
        if (body.back() != ']') throw ConfigError(line_no, indent, "malformed section header");
        section = std::string(trim(body.substr(1, body.size() - 2)));
        if (!schema.count(section)) throw ConfigError(line_no, indent + 1, "unknown section '" + section + "'");
        if (sections_.count(section)) throw ConfigError(line_no, indent + 1, "duplicate section '" + section + "'");
        sections_[section];
      } else {
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(line_no, indent, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        if (section.empty()) throw ConfigError(line_no, indent, "key '" + key + "' outside of a section");
        if (key.empty()) throw ConfigError(line_no, indent, "missing key");
        if (!schema.at(section).count(key)) {
          throw ConfigError(line_no, indent, "unknown key '" + key + "' in section [" + section + "]");
        }
        if (sections_[section].count(key)) throw ConfigError(line_no, indent, "duplicate key '" + key + "'");
        const std::string_view after = line.substr(eq + 1);
        const std::string_view value = trim(after);
        if (value.empty()) throw ConfigError(line_no, static_cast<int>(eq) + 2, "missing value for '" + key + "'");
        const int column = static_cast<int>(eq + 1 + after.find_first_not_of(" \t")) + 1;
        sections_[section][key] = ConfigValue{std::string(value), line_no, column};
      }
      if (end == text.size()) break;
    }
  }

  const ConfigValue* find(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

 private:
  std::map<std::string, Section> sections_;
};

[[noreturn]] inline void value_error(const ConfigValue& v, const std::string& key, const std::string& msg) {
  throw ConfigError(v.line, v.column, "'" + key + "': " + msg);
}

inline double parse_number(const ConfigValue& v, std::string_view text, const std::string& key) {
  text = trim(text);
  double out = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
    value_error(v, key, "expected a number, got '" + std::string(text) + "'");
  }
  return out;
}

inline int parse_int(const ConfigValue& v, const std::string& key) {
  const std::string_view text = trim(v.text);
  int out = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    value_error(v, key, "expected an integer, got '" + std::string(text) + "'");
  }
  return out;
}

inline std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> items;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = text.find(',', start);
    items.push_back(trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

inline std::vector<double> parse_numbers(const ConfigValue& v, std::string_view text, const std::string& key) {
  std::vector<double> out;
  for (std::string_view item : split_list(text)) out.push_back(parse_number(v, item, key));
  return out;
}

inline Eigen::Matrix3d parse_matrix3(const ConfigValue& v, const std::string& key) {
  const std::vector<double> xs = parse_numbers(v, v.text, key);
  if (xs.size() != 9) value_error(v, key, "expected 9 comma-separated numbers (row-major 3x3)");
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = xs[i];
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * m.cwiseAbs().maxCoeff()) {
    value_error(v, key, "matrix must be symmetric");
  }
  return m;
}

inline TensorSpec parse_tensor(const ConfigValue& v, const std::string& key) {
  const std::string_view text = trim(v.text);
  const std::size_t open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    value_error(v, key, "expected isotropic(mu, lambda) or voigt(36 numbers)");
  }
  const std::string_view kind = trim(text.substr(0, open));
  const std::string_view args = text.substr(open + 1, text.size() - open - 2);
  const std::vector<double> xs = parse_numbers(v, args, key);
  TensorSpec spec;
  if (kind == "isotropic") {
    if (xs.size() != 2) value_error(v, key, "isotropic takes (mu, lambda)");
    spec.kind = TensorSpec::Kind::isotropic;
    spec.mu = xs[0];
    spec.lambda = xs[1];
    if (!(spec.mu > 0.0)) value_error(v, key, "isotropic mu must be positive");
    if (!(spec.lambda >= 0.0)) value_error(v, key, "isotropic lambda must be nonnegative");
  } else if (kind == "voigt") {
    if (xs.size() != 36) value_error(v, key, "voigt takes 36 numbers (row-major 6x6)");
    spec.kind = TensorSpec::Kind::voigt;
    for (int i = 0; i < 36; ++i) spec.voigt(i / 6, i % 6) = xs[i];
  } else {
    value_error(v, key, "unknown tensor kind '" + std::string(kind) + "'");
  }
  try {
    const SymTensor3D t = spec.tensor();
    if (!t.is_positive_definite()) value_error(v, key, "tensor is not positive definite");
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    value_error(v, key, e.what());
  }
  return spec;
}

inline Expression parse_expr(const ConfigValue& v, const std::string& key) {
  try {
    return Expression::parse(v.text);
  } catch (const ExpressionError& e) {
    throw ConfigError(v.line, v.column + e.column() - 1, "'" + key + "': " + e.what());
  }
}

}  // namespace detail

inline RunConfig parse_config(std::string_view text) {
  using namespace detail;
  const ConfigReader reader(text);
  RunConfig cfg;

  auto get = [&](const char* section, const char* key) { return reader.find(section, key); };
  auto number = [&](const char* section, const char* key, double& out) -> const ConfigValue* {
    if (const ConfigValue* v = get(section, key)) {
      out = parse_number(*v, v->text, key);
      return v;
    }
    return nullptr;
  };
  auto integer = [&](const char* section, const char* key, int& out) -> const ConfigValue* {
    if (const ConfigValue* v = get(section, key)) {
      out = parse_int(*v, key);
      return v;
    }
    return nullptr;
  };
  auto expr = [&](const char* section, const char* key, Expression& out) {
    if (const ConfigValue* v = get(section, key)) out = parse_expr(*v, key);
  };
  auto opt_expr = [&](const char* section, const char* key, std::optional<Expression>& out) {
    if (const ConfigValue* v = get(section, key)) out = parse_expr(*v, key);
  };

  // [grid]
  if (const ConfigValue* v = integer("grid", "nx", cfg.grid.nx); v && cfg.grid.nx < 2) value_error(*v, "nx", "must be >= 2");
  if (const ConfigValue* v = integer("grid", "ny", cfg.grid.ny); v && cfg.grid.ny < 2) value_error(*v, "ny", "must be >= 2");
  if (const ConfigValue* v = number("grid", "lx", cfg.grid.lx); v && !(cfg.grid.lx > 0)) value_error(*v, "lx", "must be positive");
  if (const ConfigValue* v = number("grid", "ly", cfg.grid.ly); v && !(cfg.grid.ly > 0)) value_error(*v, "ly", "must be positive");
  if (const ConfigValue* v = get("grid", "dirichlet_edges")) {
    EdgeSet edges;
    for (std::string_view name : split_list(v->text)) {
      try {
        edges.insert(parse_edge(name));
      } catch (const ValidationError& e) {
        value_error(*v, "dirichlet_edges", e.what());
      }
    }
    cfg.grid.dirichlet = edges;
  }

  // [material]
  const ConfigValue* el = get("material", "elastic");
  const ConfigValue* vi = get("material", "viscous");
  if (el) cfg.material.elastic = parse_tensor(*el, "elastic");
  if (vi) cfg.material.viscous = parse_tensor(*vi, "viscous");
  if (const ConfigValue* v = get("material", "b_full")) cfg.material.b_full = parse_matrix3(*v, "b_full");
  if (const ConfigValue* v = get("material", "k3")) {
    cfg.material.k3 = parse_matrix3(*v, "k3");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cfg.material.k3, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0.0)) {
      std::ostringstream os;
      os << "heat conductivity must be symmetric positive definite (min eigenvalue "
         << es.eigenvalues().minCoeff() << ")";
      value_error(*v, "k3", os.str());
    }
  }
  if (const ConfigValue* v = number("material", "cv_bar", cfg.material.cv_bar); v && !(cfg.material.cv_bar > 0)) {
    value_error(*v, "cv_bar", "must be positive");
  }
  if (const ConfigValue* v = number("material", "kappa", cfg.material.kappa); v && !(cfg.material.kappa >= 0)) {
    value_error(*v, "kappa", "must be nonnegative");
  }
  if (const ConfigValue* v = number("material", "alpha", cfg.material.alpha);
      v && !(cfg.material.alpha >= 2.0 && cfg.material.alpha <= 4.0)) {
    value_error(*v, "alpha", "out of range [2, 4]");
  }

  // [loads]
  expr("loads", "f2d", cfg.loads.f2d);
  expr("loads", "mu_flat", cfg.loads.mu_flat);
  opt_expr("loads", "test_only_gu1", cfg.loads.test_only_gu1);
  opt_expr("loads", "test_only_gu2", cfg.loads.test_only_gu2);

  // [ic]
  expr("ic", "u0_1", cfg.ic.u1);
  expr("ic", "u0_2", cfg.ic.u2);
  expr("ic", "v0", cfg.ic.v);
  expr("ic", "mu0", cfg.ic.mu);
  opt_expr("ic", "v0_d1", cfg.ic.v_d1);
  opt_expr("ic", "v0_d2", cfg.ic.v_d2);
  opt_expr("ic", "v0_d12", cfg.ic.v_d12);

  // [sim]
  if (const ConfigValue* v = number("sim", "dt", cfg.sim.dt); v && !(cfg.sim.dt > 0)) value_error(*v, "dt", "must be positive");
  if (const ConfigValue* v = number("sim", "t_end", cfg.sim.t_end); v && !(cfg.sim.t_end > 0)) {
    value_error(*v, "t_end", "must be positive");
  }
  if (const ConfigValue* v = number("sim", "newton_tol", cfg.sim.newton_tol); v && !(cfg.sim.newton_tol > 0)) {
    value_error(*v, "newton_tol", "must be positive");
  }
  if (const ConfigValue* v = integer("sim", "newton_max_iter", cfg.sim.newton_max_iter); v && cfg.sim.newton_max_iter < 1) {
    value_error(*v, "newton_max_iter", "must be >= 1");
  }
  if (const ConfigValue* v = get("sim", "heat_solver")) {
    if (v->text == "direct") {
      cfg.sim.heat_solver = LinearSolver::direct;
    } else if (v->text == "cg") {
      cfg.sim.heat_solver = LinearSolver::cg;
    } else {
      value_error(*v, "heat_solver", "expected 'direct' or 'cg'");
    }
  }
  if (cfg.sim.dt > cfg.sim.t_end) {
    if (const ConfigValue* v = get("sim", "dt")) value_error(*v, "dt", "must not exceed t_end");
    const ConfigValue* v = get("sim", "t_end");
    value_error(*v, "t_end", "must not be smaller than dt");
  }

  // [output]
  if (const ConfigValue* v = get("output", "csv")) cfg.output.csv = v->text;
  if (const ConfigValue* v = integer("output", "vtk_stride", cfg.output.vtk_stride); v && cfg.output.vtk_stride < 0) {
    value_error(*v, "vtk_stride", "must be >= 0");
  }
  if (const ConfigValue* v = get("output", "vtk_prefix")) cfg.output.vtk_prefix = v->text;

  // [korn]
  if (const ConfigValue* v = get("korn", "hs")) cfg.korn.hs = parse_numbers(*v, v->text, "hs");
  if (const ConfigValue* v = integer("korn", "n", cfg.korn.n); v && cfg.korn.n < 2) value_error(*v, "n", "must be >= 2");
  if (const ConfigValue* v = integer("korn", "nz", cfg.korn.nz); v && cfg.korn.nz < 2) value_error(*v, "nz", "must be >= 2");
  if (const ConfigValue* v = get("korn", "z")) {
    if (v->text == "identity") {
      cfg.korn.z = ZKind::identity;
    } else if (v->text == "perturbed") {
      cfg.korn.z = ZKind::perturbed;
    } else {
      value_error(*v, "z", "expected 'identity' or 'perturbed'");
    }
  }

  return cfg;
}

}  // namespace vkplate
