#include "osgood_cli/commands.hpp"

#include "osgood/blowup.hpp"
#include "osgood/errors.hpp"
#include "osgood/graph.hpp"
#include "osgood/kernel_models.hpp"
#include "osgood/mild_solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace osgood::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void write_json(const fs::path& path, const json& doc) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) {
    throw InputError("cannot write " + path.string());
  }
  out << doc.dump(2) << '\n';
}

std::size_t grid_size(const AnalysisSpec& a) {
  if (a.t_grid >= 2) {
    return a.t_grid;
  }
  const double decades = std::log10(a.t_max / a.t_min);
  return static_cast<std::size_t>(std::ceil(200.0 * decades)) + 1;
}

const SourceSpec& need_source(const RunConfig& c) {
  if (!c.source) {
    throw InputError("config: this command needs a \"source\" section");
  }
  return *c.source;
}

const InitialSpec& need_initial(const RunConfig& c) {
  if (!c.initial) {
    throw InputError("config: this command needs an \"initial\" section");
  }
  return *c.initial;
}

json labels_of(const Problem& p, const Subset& G) {
  json out = json::array();
  for (const Index x : G) {
    out.push_back(p.labels[x]);
  }
  return out;
}

json certificate_json(const BlowupCertificate& c, const Problem& p) {
  return json{{"T", c.T},
              {"G", labels_of(p, c.G)},
              {"mean", c.mean_value},
              {"threshold", c.threshold},
              {"margin", c.margin},
              {"form", to_string(c.form)}};
}

// --verify-only: recompute a stored certificate.
int verify_stored(const RunConfig& config, const fs::path& file, std::ostream& log) {
  const Problem problem = build_problem(config);
  const SourceTerm f = build_source(need_source(config));
  const Vector a = build_initial(need_initial(config), problem);
  const json doc = read_json(file);
  if (!doc.is_object() || !doc.contains("T") || !doc.contains("G") || !doc.contains("margin")) {
    throw InputError(file.string() + ": not a certificate");
  }
  const double T = doc.at("T").get<double>();
  Subset G;
  for (const auto& v : doc.at("G")) {
    const std::string label = v.is_string() ? v.get<std::string>() : v.dump();
    const auto x = problem.find(label);
    if (!x) {
      throw InputError(file.string() + ": unknown vertex \"" + label + "\"");
    }
    G.push_back(*x);
  }
  const double stored = doc.at("margin").get<double>();
  const double stored_mean = doc.value("mean", stored);
  const Verification v = verify_certificate(*problem.semigroup, f, a, T, G);
  const double drift = std::abs(v.margin - stored);
  const bool reproduced = drift <= kReverifyTolerance * std::max(std::abs(stored_mean), 1e-300);
  const bool ok = v.certificate.has_value() && reproduced;
  json report{{"certificate", file.string()},
              {"T", T},
              {"mean", v.mean_value},
              {"threshold", v.threshold},
              {"margin", v.margin},
              {"stored_margin", stored},
              {"margin_drift", drift},
              {"certified", v.certificate.has_value()},
              {"reproduced", reproduced},
              {"seed", config.seed}};
  if (!v.reason.empty()) {
    report["reason"] = v.reason;
  }
  write_json(config.output / "verification.json", report);
  log << "verify: margin " << v.margin << " (stored " << stored << ", drift " << drift << ") "
      << (ok ? "reproduced" : "NOT reproduced") << '\n';
  return ok ? kExitOk : kExitNoCertificate;
}

// Random nonnegative vector with roughly half the entries nonzero.
Vector random_phi(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector phi(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    phi[i] = u(rng) < 0.5 ? 2.0 * u(rng) : 0.0;
  }
  return phi;
}

json graph_validation(const RunConfig& config, const Problem& problem, bool& passed) {
  const auto& v = config.analysis.validate;
  const SemigroupOperator& S = *problem.graph_semigroup;
  const Index n = S.size();
  std::mt19937_64 rng(config.seed);
  json checks = json::array();
  const auto check = [&](const std::string& name, double t, double residual, double tolerance) {
    const bool ok = residual <= tolerance;
    passed = passed && ok;
    checks.push_back({{"check", name}, {"t", t}, {"residual", residual}, {"tolerance", tolerance}, {"passed", ok}});
  };

  for (const double t : v.times) {
    const Vector phi = random_phi(n, rng);
    check("semigroup law", t, semigroup_law_error(S, t, t, phi), 1e-8);
    const Vector ones = Vector::Ones(static_cast<Eigen::Index>(n));
    check("sub-Markov", t, std::max((S.apply(t, ones).array() - 1.0).maxCoeff(), 0.0), 1e-12);
    if (n <= SemigroupOperator::kDenseLimit) {
      const Matrix P = S.kernel_matrix(t);
      check("positivity", t, std::max(-P.minCoeff(), 0.0), 1e-12);
      check("symmetry", t, kernel_asymmetry(S, t), 1e-10);
      check("chapman-kolmogorov", t, check_chapman_kolmogorov(S, t, t), 1e-8);
    }
    if (config.source) {
      const SourceTerm f = build_source(*config.source);
      const JensenReport j = check_jensen(S, f, t, phi);
      check("jensen " + f.name(), t, std::max(-j.min_slack, 0.0), JensenReport::kTolerance);
    }
  }

  // Random Jensen suite over small graphs and the three reference sources.
  std::size_t failures = 0;
  double worst = 0.0;
  const std::vector<SourceTerm> families{SourceTerm::power(1.0), SourceTerm::power(2.0), SourceTerm::exp_minus_one()};
  std::uniform_int_distribution<Index> size(1, v.jensen_max_vertices);
  for (std::size_t c = 0; c < v.jensen_cases; ++c) {
    auto g = std::make_shared<const WeightedGraph>(generators::random_connected(size(rng), 0.2, rng));
    const SemigroupOperator Sg(g);
    const Vector phi = random_phi(g->size(), rng);
    const double t = v.times[c % v.times.size()];
    const JensenReport j = check_jensen(Sg, families[c % families.size()], t, phi);
    worst = std::max(worst, -j.min_slack);
    failures += j.passed ? 0 : 1;
  }
  if (v.jensen_cases > 0) {
    passed = passed && failures == 0;
    checks.push_back({{"check", "jensen suite"},
                      {"cases", v.jensen_cases},
                      {"failures", failures},
                      {"worst_violation", worst},
                      {"tolerance", JensenReport::kTolerance},
                      {"passed", failures == 0}});
  }
  return checks;
}

json kernel_validation(const RunConfig& config, const Problem& problem, bool& passed) {
  const auto& v = config.analysis.validate;
  const KernelModel& k = *problem.kernel;
  std::vector<double> grid = v.t_grid;
  if (grid.empty()) {
    grid = geometric_grid(0.01, 1.0, 10);
  }
  const auto samples = spread_samples(k.space().size(), v.samples);
  AxiomOptions options;
  options.tolerance = v.tolerance;
  options.p = v.p;
  const AxiomReport report = validate_axioms(k, grid, samples, options);
  json checks = json::array();
  for (const AxiomResult* r : report.all()) {
    checks.push_back({{"check", r->axiom},
                      {"residual", r->residual},
                      {"t", r->t},
                      {"x", r->x},
                      {"y", r->y},
                      {"tolerance", report.tolerance},
                      {"passed", r->passed}});
  }
  std::vector<std::pair<Index, Index>> pairs;
  const Index n = k.space().size();
  const Index stride = std::max<Index>(1, n / 64);
  for (const Index x : samples) {
    for (Index y = 0; y < n; y += stride) {
      pairs.emplace_back(x, y);
    }
  }
  const LowerBoundReport lb = lower_bound_check(k, grid, pairs);
  checks.push_back({{"check", "p5 lower bound"},
                    {"slack", lb.slack},
                    {"t", lb.t},
                    {"x", lb.x},
                    {"y", lb.y},
                    {"bound", k.lower_bound().formula},
                    {"tolerance", LowerBoundReport::kTolerance},
                    {"passed", lb.passed}});
  passed = report.passed() && lb.passed;
  return checks;
}

// Bare sweep keys for the common parameters.
std::string expand_key(const std::string& key) {
  static const std::map<std::string, std::string> aliases{
      {"alpha", "source.alpha"},         {"kappa", "source.kappa"},      {"gamma", "source.gamma"},
      {"beta", "kernel.beta"},           {"mesh", "kernel.mesh"},        {"extent", "kernel.extent"},
      {"horizon", "analysis.horizon"},   {"rtol", "analysis.rtol"},      {"threshold", "analysis.threshold"},
      {"t_min", "analysis.t_min"},       {"t_max", "analysis.t_max"},    {"height", "initial.height"},
      {"value", "initial.value"},        {"n", "graph.n"},               {"seed", "seed"}};
  const auto it = aliases.find(key);
  return it == aliases.end() ? key : it->second;
}

// Sets `dotted.key` in a JSON document, creating objects on the way.
void set_dotted(json& doc, const std::string& key, const json& value) {
  json* node = &doc;
  std::stringstream parts(expand_key(key));
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) {
    if (part.empty()) {
      throw InputError("--sweep: malformed key \"" + key + "\"");
    }
    path.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    node = &(*node)[path[i]];
  }
  (*node)[path.back()] = value;
}

struct SweepPoint {
  json doc;
  std::string name;
};

std::vector<SweepPoint> expand_sweeps(const json& base, const std::vector<std::string>& sweeps) {
  std::vector<SweepPoint> points{{base, ""}};
  for (const auto& spec : sweeps) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw InputError("--sweep: expected key=v1,v2,... (got \"" + spec + "\")");
    }
    const std::string key = spec.substr(0, eq);
    std::vector<std::string> values;
    std::stringstream list(spec.substr(eq + 1));
    std::string item;
    while (std::getline(list, item, ',')) {
      if (item.empty()) {
        throw InputError("--sweep: empty value in \"" + spec + "\"");
      }
      values.push_back(item);
    }
    std::vector<SweepPoint> next;
    for (const auto& p : points) {
      for (const auto& value : values) {
        json parsed = json::parse(value, nullptr, /*allow_exceptions=*/false);
        if (parsed.is_discarded()) {
          parsed = value;
        }
        SweepPoint q = p;
        set_dotted(q.doc, key, parsed);
        q.name += (q.name.empty() ? "" : "_") + key + "=" + value;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

int run_one(const std::string& command, const RunConfig& config, const CommandOptions& options,
            std::ostream& log) {
  if (command == "certify") {
    return cmd_certify(config, options, log);
  }
  if (command == "simulate") {
    return cmd_simulate(config, options, log);
  }
  if (command == "criteria") {
    return cmd_criteria(config, options, log);
  }
  if (command == "validate") {
    return cmd_validate(config, options, log);
  }
  throw InputError("unknown command \"" + command + "\"");
}

}  // namespace

unsigned thread_limit() {
  if (const char* env = std::getenv("OSGOOD_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) {
      return static_cast<unsigned>(v);
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void apply_overrides(RunConfig& config, const CommandOptions& options) {
  auto& a = config.analysis;
  if (options.out) {
    config.output = *options.out;
  }
  if (options.seed) {
    config.seed = *options.seed;
  }
  if (options.t_min) {
    a.t_min = *options.t_min;
  }
  if (options.t_max) {
    a.t_max = *options.t_max;
  }
  if (options.t_grid) {
    a.t_grid = *options.t_grid;
  }
  if (options.horizon) {
    a.horizon = *options.horizon;
  }
  if (options.threshold) {
    a.threshold = *options.threshold;
  }
  if (!(a.t_min > 0.0) || !(a.t_max > a.t_min)) {
    throw InputError("need 0 < t_min < t_max");
  }
  if (a.t_grid == 1) {
    throw InputError("--t-grid: need at least 2 points");
  }
  if (!(a.horizon > 0.0) || !(a.threshold > 0.0)) {
    throw InputError("horizon and threshold must be positive");
  }
}

int cmd_certify(const RunConfig& config, const CommandOptions& options, std::ostream& log) {
  if (options.verify_only) {
    return verify_stored(config, *options.verify_only, log);
  }
  const Problem problem = build_problem(config);
  const SourceTerm f = build_source(need_source(config));
  const Vector a = build_initial(need_initial(config), problem);
  const auto& an = config.analysis;
  const std::size_t points = grid_size(an);
  SearchOptions search;
  search.threads = thread_limit();
  const SearchResult result =
      search_certificate(*problem.semigroup, OsgoodFunctional(f), a, an.t_min, an.t_max, points, search);
  const json context{{"t_min", an.t_min},
                     {"t_max", an.t_max},
                     {"grid_size", points},
                     {"evaluated", result.evaluated},
                     {"reverify_failures", result.reverify_failures}};
  json doc;
  if (result.certificate) {
    doc = certificate_json(*result.certificate, problem);
  } else {
    doc["certificate"] = nullptr;
  }
  doc["source"] = f.name();
  doc["search"] = context;
  doc["seed"] = config.seed;
  write_json(config.output / "certificate.json", doc);
  if (!result.certificate) {
    log << "certify: no certificate on " << points << " grid points in [" << an.t_min << ", " << an.t_max << "]\n";
    return kExitNoCertificate;
  }
  const auto& c = *result.certificate;
  log << "certify: T = " << c.T << ", |G| = " << c.G.size() << ", mean = " << c.mean_value
      << ", F^-1(T) = " << c.threshold << ", margin = " << c.margin << " (" << to_string(c.form) << ")\n";
  return kExitOk;
}

int cmd_simulate(const RunConfig& config, const CommandOptions& /*options*/, std::ostream& log) {
  const Problem problem = build_problem(config);
  const SourceTerm f = build_source(need_source(config));
  const Vector a = build_initial(need_initial(config), problem);
  StepControls controls;
  controls.rtol = config.analysis.rtol;
  controls.divergence_threshold = config.analysis.threshold;
  controls.store_states = config.analysis.dump_states;
  const SolutionTrace trace = solve(*problem.semigroup, f, a, config.analysis.horizon, controls);

  fs::create_directories(config.output);
  write_trace_csv(trace, config.output / "trace.csv");
  if (config.analysis.dump_states) {
    write_state_dump(trace, config.output / "states.bin");
  }
  json status{{"status", to_string(trace.status)},
              {"end_time", trace.end_time()},
              {"horizon", trace.horizon},
              {"steps", trace.times.size() - 1},
              {"rejected_steps", trace.rejected_steps},
              {"divergence_threshold", trace.divergence_threshold},
              {"final_sup_norm", trace.sup_norms.back()},
              {"source", f.name()},
              {"seed", config.seed}};
  if (trace.status == SolveStatus::BlowUp) {
    status["T_emp"] = trace.t_emp;
    status["T_emp_error"] = trace.t_emp_error;
  }
  if (trace.status == SolveStatus::StepFailure) {
    status["failure_reason"] = trace.failure_reason;
  }
  write_json(config.output / "status.json", status);

  switch (trace.status) {
    case SolveStatus::ReachedHorizon:
      log << "simulate: reached horizon " << trace.horizon << ", sup norm " << trace.sup_norms.back() << '\n';
      return kExitOk;
    case SolveStatus::BlowUp:
      log << "simulate: blow-up detected, T_emp = " << trace.t_emp << " +- " << trace.t_emp_error << '\n';
      return kExitBlowUp;
    case SolveStatus::StepFailure:
      log << "simulate: step failure: " << trace.failure_reason << '\n';
      return kExitStepFailure;
  }
  return kExitStepFailure;
}

int cmd_criteria(const RunConfig& config, const CommandOptions& /*options*/, std::ostream& log) {
  const Problem problem = build_problem(config);
  const SourceTerm f = build_source(need_source(config));
  const auto asym = f.asymptotics();
  if (!asym) {
    throw InputError("source: " + f.name() + " needs declared \"kappa\" and \"gamma\"");
  }
  const OsgoodFunctional F(f);
  const auto grid = geometric_grid(1.0, 1e8, 81);
  const AsymptoticsReport ar = check_asymptotics(F, asym->kappa, asym->gamma, grid);
  json doc;
  doc["asymptotics"] = {{"kappa", ar.kappa},
                        {"gamma", ar.gamma},
                        {"holds_everywhere", ar.holds_everywhere},
                        {"worst_ratio", ar.worst_ratio},
                        {"last_violation", ar.last_violation ? json(*ar.last_violation) : json(nullptr)}};
  CriterionVerdict verdict;
  if (problem.graph) {
    const WeightedGraph& g = *problem.graph;
    Index x = g.size() / 2;
    if (config.analysis.basepoint) {
      const auto found = g.find(*config.analysis.basepoint);
      if (!found) {
        throw InputError("analysis.basepoint: unknown vertex \"" + *config.analysis.basepoint + "\"");
      }
      x = *found;
    }
    const VolumeGrowthFit fit = fit_volume_growth(g, x, config.analysis.r_max);
    doc["volume_growth"] = {{"theta", fit.degree},
                            {"constant", fit.constant},
                            {"threshold", fit.threshold},
                            {"basepoint", g.label(x)},
                            {"r_max", config.analysis.r_max},
                            {"volumes", fit.volumes}};
    if (!(fit.degree > 0.0)) {
      throw InputError("volume growth fit gave theta = " + std::to_string(fit.degree) + "; graph too small");
    }
    verdict = criterion_graph(fit.degree, ar.gamma);
    doc["criterion"] = "theta gamma < 2";
  } else {
    const LowerBound& b = problem.kernel->lower_bound();
    doc["kernel"] = {{"family", problem.kernel->name()}, {"alpha", b.alpha}, {"beta", b.beta}, {"phi", b.formula}};
    verdict = criterion_mms(b.alpha, b.beta, ar.gamma);
    doc["criterion"] = "alpha gamma < beta";
  }
  doc["product"] = verdict.product;
  doc["bound"] = verdict.bound;
  doc["verdict"] = verdict_string(verdict);
  doc["source"] = f.name();
  doc["seed"] = config.seed;
  write_json(config.output / "criteria.json", doc);
  log << "criteria: product " << verdict.product << " vs bound " << verdict.bound << " -> " << verdict_string(verdict)
      << '\n';
  return kExitOk;
}

int cmd_validate(const RunConfig& config, const CommandOptions& /*options*/, std::ostream& log) {
  const Problem problem = build_problem(config);
  bool passed = true;
  json checks = problem.graph ? graph_validation(config, problem, passed) : kernel_validation(config, problem, passed);
  const json doc{{"passed", passed}, {"checks", checks}, {"seed", config.seed}};
  write_json(config.output / "validate.json", doc);
  for (const auto& c : checks) {
    log << "validate: " << c.at("check").get<std::string>() << (c.at("passed").get<bool>() ? " pass" : " FAIL");
    if (c.contains("residual")) {
      log << " (residual " << c.at("residual").get<double>() << ")";
    } else if (c.contains("slack")) {
      log << " (slack " << c.at("slack").get<double>() << ")";
    }
    log << '\n';
  }
  return passed ? kExitOk : kExitValidationFailed;
}

int run_command(const std::string& command, const fs::path& config_path, const CommandOptions& options,
                std::ostream& log, std::ostream& err) {
  std::vector<SweepPoint> points;
  try {
    const json base = read_json(config_path);
    points = expand_sweeps(base, options.sweep);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  const fs::path base_dir = config_path.has_parent_path() ? config_path.parent_path() : fs::path(".");

  const auto execute = [&](const SweepPoint& point, std::ostream& out, std::ostream& errs) -> int {
    try {
      RunConfig config = parse_config(point.doc, base_dir);
      apply_overrides(config, options);
      if (!point.name.empty()) {
        config.output /= point.name;
      }
      return run_one(command, config, options, out);
    } catch (const InputError& e) {
      errs << "error: " << e.what() << '\n';
    } catch (const NonOsgoodError& e) {
      errs << "error: " << e.what() << '\n';
    } catch (const InvalidSourceError& e) {
      errs << "error: " << e.what() << '\n';
    } catch (const DomainError& e) {
      errs << "error: " << e.what() << '\n';
    } catch (const nlohmann::json::exception& e) {
      errs << "error: " << e.what() << '\n';
    } catch (const std::filesystem::filesystem_error& e) {
      errs << "error: " << e.what() << '\n';
    }
    return kExitInputError;
  };

  if (points.size() == 1 && points.front().name.empty()) {
    return execute(points.front(), log, err);
  }

  // Sweep: independent runs on a bounded pool, output replayed in order.
  std::vector<int> codes(points.size(), kExitInputError);
  std::vector<std::string> logs(points.size());
  std::vector<std::string> errors(points.size());
  std::atomic<std::size_t> next{0};
  const unsigned workers = std::min<unsigned>(thread_limit(), static_cast<unsigned>(points.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < points.size(); i = next++) {
        std::ostringstream out;
        std::ostringstream errs;
        codes[i] = execute(points[i], out, errs);
        logs[i] = out.str();
        errors[i] = errs.str();
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
  json summary = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    log << "[" << points[i].name << "] " << logs[i];
    err << errors[i];
    summary.push_back({{"run", points[i].name}, {"exit_code", codes[i]}});
  }
  try {
    RunConfig config = parse_config(points.front().doc, base_dir);
    apply_overrides(config, options);
    write_json(config.output / "sweep.json", json{{"command", command}, {"runs", summary}});
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  if (std::find(codes.begin(), codes.end(), kExitInputError) != codes.end()) {
    return kExitInputError;
  }
  return *std::max_element(codes.begin(), codes.end());
}

}  // namespace osgood::cli
