#include "osgood_cli/config.hpp"

#include "osgood/errors.hpp"
#include "osgood/graph_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

namespace osgood::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void allow_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) {
    throw InputError(where + ": expected an object");
  }
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw InputError(where + ": unknown key \"" + item.key() + "\"");
    }
  }
}

double number(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) {
    return fallback;
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) {
    throw InputError(where + "." + key + ": expected a number");
  }
  const double x = v.get<double>();
  if (!std::isfinite(x)) {
    throw InputError(where + "." + key + ": not finite");
  }
  return x;
}

double positive(const json& obj, const char* key, double fallback, const std::string& where) {
  const double x = number(obj, key, fallback, where);
  if (!(x > 0.0)) {
    throw InputError(where + "." + key + ": must be positive");
  }
  return x;
}

Index count(const json& obj, const char* key, Index fallback, const std::string& where) {
  if (!obj.contains(key)) {
    return fallback;
  }
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw InputError(where + "." + key + ": expected a nonnegative integer");
  }
  return static_cast<Index>(v.get<long long>());
}

std::string text(const json& obj, const char* key, const std::string& fallback, const std::string& where) {
  if (!obj.contains(key)) {
    return fallback;
  }
  const auto& v = obj.at(key);
  if (v.is_number_integer()) {
    return std::to_string(v.get<long long>());
  }
  if (!v.is_string()) {
    throw InputError(where + "." + key + ": expected a string");
  }
  return v.get<std::string>();
}

fs::path file(const json& obj, const char* key, const fs::path& base, const std::string& where) {
  fs::path p = text(obj, key, "", where);
  if (p.empty()) {
    throw InputError(where + "." + key + ": empty path");
  }
  if (p.is_relative()) {
    p = base / p;
  }
  if (!fs::exists(p)) {
    throw InputError(where + "." + key + ": file not found: " + p.string());
  }
  return p;
}

std::vector<double> numbers(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_array()) {
    throw InputError(where + "." + key + ": expected an array of numbers");
  }
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) {
      throw InputError(where + "." + key + ": expected an array of numbers");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

void one_of(const std::string& value, std::initializer_list<const char*> options, const std::string& where) {
  for (const char* o : options) {
    if (value == o) {
      return;
    }
  }
  throw InputError(where + ": unsupported value \"" + value + "\"");
}

GraphSpec parse_graph(const json& obj, const fs::path& base) {
  const std::string w = "graph";
  allow_keys(obj, {"edges", "measure", "generator", "n", "sides", "p", "mass", "center_mass"}, w);
  GraphSpec g;
  if (obj.contains("edges")) {
    if (obj.contains("generator")) {
      throw InputError("graph: give either edges or generator, not both");
    }
    g.edges = file(obj, "edges", base, w);
    if (obj.contains("measure")) {
      g.measure = file(obj, "measure", base, w);
    }
    return g;
  }
  if (!obj.contains("generator")) {
    throw InputError("graph: need \"edges\" or \"generator\"");
  }
  g.generator = text(obj, "generator", "", w);
  one_of(g.generator, {"path", "cycle", "grid", "torus", "star", "edgeless", "random"}, w + ".generator");
  g.n = count(obj, "n", 0, w);
  if (obj.contains("sides")) {
    for (const double s : numbers(obj, "sides", w)) {
      if (!(s >= 1.0) || s != std::floor(s)) {
        throw InputError("graph.sides: expected positive integers");
      }
      g.sides.push_back(static_cast<Index>(s));
    }
  }
  g.p = number(obj, "p", 0.1, w);
  g.mass = positive(obj, "mass", 1.0, w);
  g.center_mass = positive(obj, "center_mass", 1.0, w);
  const bool needs_sides = g.generator == "grid" || g.generator == "torus";
  if (needs_sides && g.sides.empty()) {
    throw InputError("graph: generator " + g.generator + " needs \"sides\"");
  }
  if (!needs_sides && g.n == 0) {
    throw InputError("graph: generator " + g.generator + " needs a positive \"n\"");
  }
  if (g.p < 0.0 || g.p > 1.0) {
    throw InputError("graph.p: must lie in [0, 1]");
  }
  return g;
}

KernelSpec parse_kernel(const json& obj) {
  const std::string w = "kernel";
  allow_keys(obj, {"family", "topology", "dim", "mesh", "period", "length", "beta", "mass_scale", "lower_bound_c"}, w);
  KernelSpec k;
  k.family = text(obj, "family", "gaussian", w);
  one_of(k.family, {"gaussian", "stable"}, w + ".family");
  k.topology = text(obj, "topology", "torus", w);
  one_of(k.topology, {"torus", "interval"}, w + ".topology");
  k.dim = static_cast<int>(count(obj, "dim", 1, w));
  k.mesh = count(obj, "mesh", 128, w);
  if (k.topology == "torus") {
    if (obj.contains("length")) {
      throw InputError("kernel.length applies to the interval topology; use period");
    }
    k.extent = positive(obj, "period", 20.0, w);
  } else {
    if (obj.contains("period")) {
      throw InputError("kernel.period applies to the torus topology; use length");
    }
    k.extent = positive(obj, "length", 20.0, w);
    if (k.dim != 1) {
      throw InputError("kernel: the interval topology is one-dimensional");
    }
  }
  k.beta = positive(obj, "beta", k.family == "gaussian" ? 2.0 : 1.0, w);
  if (k.family == "gaussian" && k.beta != 2.0) {
    throw InputError("kernel.beta: the Gaussian family has beta = 2");
  }
  k.mass_scale = positive(obj, "mass_scale", 1.0, w);
  if (obj.contains("lower_bound_c")) {
    k.lower_bound_c = number(obj, "lower_bound_c", 0.0, w);
    if (*k.lower_bound_c < 0.0) {
      throw InputError("kernel.lower_bound_c: must be nonnegative");
    }
  }
  return k;
}

SourceSpec parse_source(const json& obj, const fs::path& base) {
  const std::string w = "source";
  allow_keys(obj, {"family", "alpha", "path", "kappa", "gamma"}, w);
  SourceSpec s;
  s.family = text(obj, "family", "power", w);
  one_of(s.family, {"power", "exp_minus_one", "power_over_exp", "tabulated"}, w + ".family");
  if (obj.contains("alpha") && s.family != "power") {
    throw InputError("source.alpha applies to the power family only");
  }
  s.alpha = number(obj, "alpha", 1.0, w);
  if (s.family == "tabulated") {
    s.path = file(obj, "path", base, w);
  } else if (obj.contains("path")) {
    throw InputError("source.path applies to the tabulated family only");
  }
  if (obj.contains("kappa") != obj.contains("gamma")) {
    throw InputError("source: kappa and gamma must be given together");
  }
  if (obj.contains("kappa")) {
    s.kappa = positive(obj, "kappa", 1.0, w);
    s.gamma = positive(obj, "gamma", 1.0, w);
  }
  return s;
}

InitialSpec parse_initial(const json& obj, const fs::path& base) {
  const std::string w = "initial";
  allow_keys(obj, {"kind", "vertex", "height", "value", "path", "values"}, w);
  InitialSpec s;
  s.kind = text(obj, "kind", "constant", w);
  one_of(s.kind, {"point_mass", "constant", "file", "values"}, w + ".kind");
  if (s.kind == "point_mass") {
    if (!obj.contains("vertex")) {
      throw InputError("initial: point_mass needs \"vertex\"");
    }
    s.vertex = text(obj, "vertex", "", w);
    s.height = number(obj, "height", 1.0, w);
    if (s.height < 0.0) {
      throw InputError("initial.height: must be nonnegative");
    }
  } else if (s.kind == "constant") {
    s.value = number(obj, "value", 0.0, w);
    if (s.value < 0.0) {
      throw InputError("initial.value: must be nonnegative");
    }
  } else if (s.kind == "file") {
    s.path = file(obj, "path", base, w);
  } else {
    if (!obj.contains("values")) {
      throw InputError("initial: kind values needs \"values\"");
    }
    s.values = numbers(obj, "values", w);
  }
  return s;
}

AnalysisSpec parse_analysis(const json& obj) {
  const std::string w = "analysis";
  allow_keys(obj, {"t_min", "t_max", "t_grid", "horizon", "rtol", "threshold", "method", "krylov_tolerance",
                   "r_max", "basepoint", "dump_states", "validate"},
             w);
  AnalysisSpec a;
  a.t_min = positive(obj, "t_min", a.t_min, w);
  a.t_max = positive(obj, "t_max", a.t_max, w);
  if (!(a.t_max > a.t_min)) {
    throw InputError("analysis: t_max must exceed t_min");
  }
  a.t_grid = count(obj, "t_grid", 0, w);
  if (a.t_grid == 1) {
    throw InputError("analysis.t_grid: need at least 2 points");
  }
  a.horizon = positive(obj, "horizon", a.horizon, w);
  a.rtol = positive(obj, "rtol", a.rtol, w);
  a.threshold = positive(obj, "threshold", a.threshold, w);
  a.method = text(obj, "method", "auto", w);
  one_of(a.method, {"auto", "dense", "krylov"}, w + ".method");
  a.krylov_tolerance = positive(obj, "krylov_tolerance", a.krylov_tolerance, w);
  a.r_max = count(obj, "r_max", a.r_max, w);
  if (a.r_max < 2) {
    throw InputError("analysis.r_max: must be at least 2");
  }
  if (obj.contains("basepoint")) {
    a.basepoint = text(obj, "basepoint", "", w);
  }
  if (obj.contains("dump_states")) {
    if (!obj.at("dump_states").is_boolean()) {
      throw InputError("analysis.dump_states: expected a boolean");
    }
    a.dump_states = obj.at("dump_states").get<bool>();
  }
  if (obj.contains("validate")) {
    const auto& v = obj.at("validate");
    const std::string wv = "analysis.validate";
    allow_keys(v, {"times", "t_grid", "samples", "tolerance", "p", "jensen_cases", "jensen_max_vertices"}, wv);
    if (v.contains("times")) {
      a.validate.times = numbers(v, "times", wv);
    }
    if (v.contains("t_grid")) {
      a.validate.t_grid = numbers(v, "t_grid", wv);
    }
    for (const double t : a.validate.times) {
      if (!(t > 0.0)) {
        throw InputError("analysis.validate.times: must be positive");
      }
    }
    for (const double t : a.validate.t_grid) {
      if (!(t > 0.0)) {
        throw InputError("analysis.validate.t_grid: must be positive");
      }
    }
    a.validate.samples = count(v, "samples", a.validate.samples, wv);
    a.validate.tolerance = positive(v, "tolerance", a.validate.tolerance, wv);
    a.validate.p = positive(v, "p", a.validate.p, wv);
    a.validate.jensen_cases = count(v, "jensen_cases", 0, wv);
    a.validate.jensen_max_vertices = count(v, "jensen_max_vertices", 20, wv);
    if (a.validate.jensen_max_vertices < 1 || a.validate.samples < 1) {
      throw InputError("analysis.validate: samples and jensen_max_vertices must be positive");
    }
  }
  return a;
}

}  // namespace

RunConfig parse_config(const json& doc, const fs::path& base_dir) {
  allow_keys(doc, {"graph", "kernel", "source", "initial", "analysis", "output", "seed"}, "config");
  RunConfig c;
  c.base_dir = base_dir;
  if (doc.contains("graph") == doc.contains("kernel")) {
    throw InputError("config: give exactly one of \"graph\" or \"kernel\"");
  }
  if (doc.contains("graph")) {
    c.graph = parse_graph(doc.at("graph"), base_dir);
  } else {
    c.kernel = parse_kernel(doc.at("kernel"));
  }
  if (doc.contains("source")) {
    c.source = parse_source(doc.at("source"), base_dir);
  }
  if (doc.contains("initial")) {
    c.initial = parse_initial(doc.at("initial"), base_dir);
  }
  if (doc.contains("analysis")) {
    c.analysis = parse_analysis(doc.at("analysis"));
  }
  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    if (o.is_string()) {
      c.output = o.get<std::string>();
    } else {
      allow_keys(o, {"directory"}, "output");
      c.output = text(o, "directory", "osgood-out", "output");
    }
  }
  if (doc.contains("seed")) {
    const auto& s = doc.at("seed");
    if (!s.is_number_unsigned()) {
      throw InputError("seed: expected a nonnegative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  return c;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot read " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

RunConfig load_config(const fs::path& path) {
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  return parse_config(read_json(path), base);
}

std::optional<Index> Problem::find(const std::string& label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    return std::nullopt;
  }
  return static_cast<Index>(it - labels.begin());
}

KernelModel build_kernel(const KernelSpec& spec) {
  const PointCloud space = spec.topology == "torus" ? PointCloud::torus(spec.dim, spec.mesh, spec.extent)
                                                    : PointCloud::interval(spec.mesh, spec.extent);
  KernelModel k = spec.family == "gaussian" ? KernelModel::gaussian(space)
                                            : KernelModel::fractional_stable(space, spec.beta);
  if (spec.mass_scale != 1.0) {
    k = k.with_mass_scale(spec.mass_scale);
  }
  if (spec.lower_bound_c) {
    LowerBound b = k.lower_bound();
    const double c = *spec.lower_bound_c;
    const double power = -(spec.dim + spec.beta) / 2.0;
    if (spec.family == "gaussian") {
      b.phi = [c](double s) { return c * std::exp(-s * s / 4.0); };
      b.formula = "c exp(-s^2/4), c = " + std::to_string(c);
    } else {
      b.phi = [c, power](double s) { return c * std::pow(1.0 + s * s, power); };
      b.formula = "c (1 + s^2)^(-(N+beta)/2), c = " + std::to_string(c);
    }
    k = k.with_lower_bound(std::move(b));
  }
  return k;
}

Problem build_problem(const RunConfig& config) {
  Problem p;
  if (config.kernel) {
    p.kernel = build_kernel(*config.kernel);
    p.semigroup = semigroup_from_kernel(*p.kernel);
    for (Index i = 0; i < p.semigroup->size(); ++i) {
      p.labels.push_back(std::to_string(i));
    }
    return p;
  }
  const GraphSpec& g = *config.graph;
  if (g.edges) {
    p.graph = std::make_shared<const WeightedGraph>(io::read_graph(*g.edges, g.measure));
  } else if (g.generator == "path") {
    p.graph = std::make_shared<const WeightedGraph>(generators::path(g.n));
  } else if (g.generator == "cycle") {
    p.graph = std::make_shared<const WeightedGraph>(generators::cycle(g.n));
  } else if (g.generator == "grid") {
    p.graph = std::make_shared<const WeightedGraph>(generators::grid(g.sides));
  } else if (g.generator == "torus") {
    p.graph = std::make_shared<const WeightedGraph>(generators::torus(g.sides));
  } else if (g.generator == "star") {
    p.graph = std::make_shared<const WeightedGraph>(generators::star(g.n, g.center_mass));
  } else if (g.generator == "edgeless") {
    p.graph = std::make_shared<const WeightedGraph>(generators::edgeless(g.n, g.mass));
  } else {
    std::mt19937_64 rng(config.seed);
    p.graph = std::make_shared<const WeightedGraph>(generators::random_connected(g.n, g.p, rng));
  }
  const std::string& m = config.analysis.method;
  const ExpMethod method = m == "dense" ? ExpMethod::Dense : m == "krylov" ? ExpMethod::Krylov : ExpMethod::Auto;
  p.graph_semigroup = std::make_shared<const SemigroupOperator>(p.graph, method, config.analysis.krylov_tolerance);
  p.semigroup = p.graph_semigroup;
  p.labels = p.graph->labels();
  return p;
}

SourceTerm build_source(const SourceSpec& spec) {
  SourceTerm f = [&] {
    if (spec.family == "power") {
      return SourceTerm::power(spec.alpha);
    }
    if (spec.family == "exp_minus_one") {
      return SourceTerm::exp_minus_one();
    }
    if (spec.family == "power_over_exp") {
      return SourceTerm::power_over_exp();
    }
    auto [t, v] = io::read_two_columns(*spec.path, "t", "f");
    return SourceTerm::tabulated(std::move(t), std::move(v));
  }();
  if (spec.kappa) {
    f = f.with_asymptotics({*spec.kappa, *spec.gamma});
  }
  return f;
}

Vector build_initial(const InitialSpec& spec, const Problem& problem) {
  const auto n = static_cast<Eigen::Index>(problem.size());
  Vector a = Vector::Zero(n);
  if (spec.kind == "constant") {
    a.setConstant(spec.value);
  } else if (spec.kind == "point_mass") {
    const auto x = problem.find(spec.vertex);
    if (!x) {
      throw InputError("initial.vertex: unknown vertex \"" + spec.vertex + "\"");
    }
    a[static_cast<Eigen::Index>(*x)] = spec.height;
  } else if (spec.kind == "values") {
    if (static_cast<Eigen::Index>(spec.values.size()) != n) {
      throw InputError("initial.values: expected " + std::to_string(n) + " values, got " +
                       std::to_string(spec.values.size()));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      a[i] = spec.values[static_cast<std::size_t>(i)];
    }
  } else {
    if (!problem.graph) {
      throw InputError("initial: file input needs a graph problem");
    }
    a = io::read_vertex_values(*spec.path, *problem.graph);
  }
  if (!a.allFinite() || (a.array() < 0.0).any()) {
    throw InputError("initial value must be finite and nonnegative");
  }
  return a;
}

}  // namespace osgood::cli
