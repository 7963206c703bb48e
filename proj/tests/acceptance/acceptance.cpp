// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include "osgood/blowup.hpp"
#include "osgood/kernel_models.hpp"
#include "osgood/mild_solver.hpp"
#include "osgood/semigroup.hpp"
#include "osgood/source_term.hpp"
#include "osgood_cli/config.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace osgood;

namespace {

constexpr std::uint64_t kSeed = 20240917;

struct Outcome {
  bool passed = true;
  std::string detail;
};

class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      passed_ = false;
      if (failures_++ < 3) {
        notes_ << (notes_.tellp() > 0 ? "; " : "") << what;
      }
    }
  }
  void note(const std::string& s) { info_ << (info_.tellp() > 0 ? ", " : "") << s; }
  Outcome outcome() const {
    std::string d = info_.str();
    if (!passed_) {
      d += (d.empty() ? "" : " | ") + std::string("failed: ") + notes_.str();
      if (failures_ > 3) {
        d += " (+" + std::to_string(failures_ - 3) + " more)";
      }
    }
    return {passed_, d};
  }

 private:
  bool passed_ = true;
  int failures_ = 0;
  std::ostringstream notes_;
  std::ostringstream info_;
};

std::string fmt(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

std::shared_ptr<const WeightedGraph> share(WeightedGraph g) {
  return std::make_shared<const WeightedGraph>(std::move(g));
}

Vector random_nonnegative(Eigen::Index n, std::mt19937_64& rng, double hi) {
  std::uniform_real_distribution<double> u(0.0, hi);
  Vector v(n);
  for (auto& x : v) {
    x = u(rng);
  }
  return v;
}

Outcome scalar_oracle() {
  Checker c;
  const SemigroupOperator S(share(generators::edgeless(1)));
  const auto f = SourceTerm::power(1.0);
  const Vector a = Vector::Constant(1, 2.0);
  const auto trace = solve(S, f, a, 1.0);
  c.expect(trace.status == SolveStatus::BlowUp, "no blow-up detected");
  c.expect(std::abs(trace.t_emp - 0.5) <= 0.01 * 0.5, "T_emp off by more than 1%");
  c.note("T_emp = " + fmt(trace.t_emp, 8) + " +- " + fmt(trace.t_emp_error, 2));

  const auto search = search_certificate(S, OsgoodFunctional(f), a, 0.01, 10.0, 400);
  const double step = 0.5 * (std::pow(1000.0, 1.0 / 399.0) - 1.0);
  c.expect(search.certificate.has_value(), "no certificate");
  if (search.certificate) {
    const double T = search.certificate->T;
    c.expect(T > 0.5 && T - 0.5 <= step * (1.0 + 1e-9), "certified T not within one grid step of 0.5");
    c.note("certified T = " + fmt(T, 8) + " (step " + fmt(step, 3) + ")");
  }
  return c.outcome();
}

Outcome closed_form_semigroup() {
  Checker c;
  const std::vector<Edge> e{{0, 1, 1.0}};
  const SemigroupOperator S(share(WeightedGraph(2, e, Vector::Ones(2))));
  double worst = 0.0;
  for (const double t : {0.1, 1.0, 10.0}) {
    const Vector u = S.apply(t, Vector::Unit(2, 0));
    const double x = std::exp(-2.0 * t);
    worst = std::max({worst, std::abs(u[0] - 0.5 * (1.0 + x)), std::abs(u[1] - 0.5 * (1.0 - x))});
  }
  c.expect(worst <= 1e-10, "apply deviates from the closed form");
  c.note("max error " + fmt(worst, 3));
  const Vector a(Eigen::Vector2d(4.0, 0.0));
  const auto v = verify_certificate(S, SourceTerm::power(1.0), a, 1.0, {0});
  const double expected = 2.0 + 2.0 * std::exp(-2.0);
  c.expect(v.certificate.has_value(), "no certificate at T = 1");
  c.expect(std::abs(v.mean_value - expected) <= 1e-10 && v.mean_value > 1.0, "mean differs from 2 + 2e^-2");
  c.note("mean " + fmt(v.mean_value, 7) + " > F^-1(1) = " + fmt(v.threshold, 7));
  return c.outcome();
}

Outcome jensen_suite() {
  Checker c;
  std::mt19937_64 rng(kSeed);
  const std::vector<SourceTerm> fs{SourceTerm::power(1.0), SourceTerm::power(2.0), SourceTerm::exp_minus_one()};
  const std::array<double, 3> times{0.1, 1.0, 10.0};
  std::uniform_int_distribution<Index> size(1, 20);
  std::uniform_int_distribution<int> pick(0, 2);
  int failures = 0;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const SemigroupOperator S(share(generators::random_connected(size(rng), 0.2, rng)));
    const Vector phi = random_nonnegative(static_cast<Eigen::Index>(S.size()), rng, 2.0);
    const auto r = check_jensen(S, fs[pick(rng)], times[pick(rng)], phi);
    failures += r.passed ? 0 : 1;
    worst = std::min(worst, r.min_slack);
  }
  c.expect(failures == 0, std::to_string(failures) + " Jensen failures");
  c.note("200 cases, min slack " + fmt(worst, 3));
  return c.outcome();
}

Outcome semigroup_axioms() {
  Checker c;
  std::mt19937_64 rng(kSeed + 1);
  std::uniform_int_distribution<Index> size(2, 50);
  double ck = 0.0;
  double sub = 0.0;
  double pos = 0.0;
  double law = 0.0;
  double sym = 0.0;
  for (int i = 0; i < 50; ++i) {
    const SemigroupOperator S(share(generators::random_connected(size(rng), 0.15, rng)));
    const auto n = static_cast<Eigen::Index>(S.size());
    for (const double t : {0.1, 1.0, 10.0}) {
      ck = std::max(ck, check_chapman_kolmogorov(S, t, t));
      const Vector phi = random_nonnegative(n, rng, 1.0);
      const Vector u = S.apply(t, phi);
      sub = std::max(sub, std::max(u.maxCoeff() - 1.0, 0.0));
      pos = std::max(pos, std::max(-u.minCoeff(), 0.0));
      pos = std::max(pos, std::max(-S.kernel_matrix(t).minCoeff(), 0.0));
      law = std::max(law, semigroup_law_error(S, t, 0.5 * t, phi) / std::max(phi.cwiseAbs().maxCoeff(), 1e-300));
      sym = std::max(sym, kernel_asymmetry(S, t));
    }
  }
  c.expect(ck <= 1e-8, "Chapman-Kolmogorov");
  c.expect(sub <= 1e-12, "sub-Markov");
  c.expect(pos <= 1e-12, "positivity");
  c.expect(law <= 1e-8, "semigroup law");
  c.expect(sym <= 1e-10, "symmetry");
  c.note("CK " + fmt(ck, 2) + ", sub-Markov " + fmt(sub, 2) + ", positivity " + fmt(pos, 2) + ", law " +
         fmt(law, 2) + ", symmetry " + fmt(sym, 2));
  return c.outcome();
}

struct SoundnessCase {
  std::shared_ptr<const SemigroupOperator> S;
  SourceTerm f;
  Vector a;
  std::optional<BlowupCertificate> certificate;
  SolutionTrace trace;
};

std::vector<SoundnessCase> soundness_cases;

Outcome certificate_soundness() {
  Checker c;
  std::mt19937_64 rng(kSeed + 2);
  std::uniform_int_distribution<Index> size(2, 50);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::array<double, 3> alphas{0.5, 1.0, 2.0};
  int found = 0;
  int sound = 0;
  double worst_gap = -1e300;
  for (int i = 0; i < 50; ++i) {
    auto S = std::make_shared<const SemigroupOperator>(share(generators::random_connected(size(rng), 0.1, rng)));
    const auto n = static_cast<Eigen::Index>(S->size());
    Vector a = Vector::Zero(n);
    for (Eigen::Index x = 0; x < n; ++x) {
      if (u(rng) < 0.3) {
        a[x] = 2.0 * u(rng);
      }
    }
    if (a.maxCoeff() == 0.0) {
      a[static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n))] = 0.5 + u(rng);
    }
    const auto f = SourceTerm::power(alphas[static_cast<std::size_t>(i) % 3]);
    const auto search = search_certificate(*S, OsgoodFunctional(f), a, 1e-3, 1e6, 1801);
    if (!search.certificate) {
      c.expect(false, "case " + std::to_string(i) + ": no certificate");
      continue;
    }
    ++found;
    const double T = search.certificate->T;
    const auto trace = solve(*S, f, a, 1.5 * T);
    const bool ok = trace.status == SolveStatus::BlowUp && trace.t_emp - trace.t_emp_error <= T;
    c.expect(ok, "case " + std::to_string(i) + ": T_emp " + fmt(trace.t_emp) + " vs certified " + fmt(T));
    sound += ok ? 1 : 0;
    if (trace.status == SolveStatus::BlowUp) {
      worst_gap = std::max(worst_gap, (trace.t_emp - T) / T);
    }
    soundness_cases.push_back({S, f, a, search.certificate, trace});
  }
  // Negative control.
  const SemigroupOperator S(share(generators::cycle(10)));
  const auto f = SourceTerm::power(1.0);
  const auto none = search_certificate(S, OsgoodFunctional(f), Vector::Zero(10), 1e-3, 1e6, 1801);
  const auto flat = solve(S, f, Vector::Zero(10), 10.0);
  const bool control = !none.certificate && flat.status == SolveStatus::ReachedHorizon &&
                       *std::max_element(flat.sup_norms.begin(), flat.sup_norms.end()) == 0.0;
  c.expect(control, "zero initial value control");
  c.note(std::to_string(found) + "/50 certified, " + std::to_string(sound) + "/50 with T_emp <= T, max (T_emp-T)/T " +
         fmt(worst_gap, 3) + ", zero control " + (control ? "ok" : "bad"));
  return c.outcome();
}

Outcome on_diagonal() {
  Checker c;
  const SemigroupOperator S(share(generators::path(4001)));
  for (const double t : {25.0, 100.0}) {
    const double p = S.heat_kernel(t, 2000, 2000).value;
    const double oracle = std::exp(-2.0 * t) * boost::math::cyl_bessel_i(0, 2.0 * t);
    c.expect(std::abs(p * std::sqrt(t) - 0.2821) <= 0.02, "t = " + fmt(t) + " outside 0.2821 +- 0.02");
    c.expect(std::abs(p - oracle) <= 1e-8 * oracle, "t = " + fmt(t) + " disagrees with e^-2t I0(2t)");
    c.note("t=" + fmt(t) + ": p*sqrt(t) = " + fmt(p * std::sqrt(t), 6) + " (Bessel " + fmt(oracle * std::sqrt(t), 6) +
           ")");
  }
  return c.outcome();
}

Outcome osgood_functional() {
  Checker c;
  const std::vector<SourceTerm> families{SourceTerm::power(0.5), SourceTerm::power(1.0), SourceTerm::power(2.0),
                                         SourceTerm::exp_minus_one(), SourceTerm::power_over_exp()};
  double round_trip = 0.0;
  for (const auto& f : families) {
    const OsgoodFunctional F(f);
    for (double y = 1e-4; y <= 1e2 * 1.0001; y *= std::pow(10.0, 0.25)) {
      round_trip = std::max(round_trip, std::abs(F(F.inverse(y)) - y) / y);
    }
  }
  double closed = 0.0;
  for (const double alpha : {0.5, 1.0, 2.0}) {
    const OsgoodFunctional F(SourceTerm::power(alpha));
    for (double t = 1e-3; t <= 1e3 * 1.0001; t *= 10.0) {
      const double e = 1.0 / (alpha * std::pow(t, alpha));
      const double i = std::pow(1.0 / (alpha * t), 1.0 / alpha);
      closed = std::max({closed, std::abs(F(t) - e) / e, std::abs(F.inverse(t) - i) / i});
    }
  }
  std::vector<double> ts{0.0};
  std::vector<double> fs{0.0};
  for (int i = 0; i < 60000; ++i) {
    const double s = 1e-3 * std::pow(1e6, i / 59999.0);
    ts.push_back(s);
    fs.push_back(s * s);
  }
  const OsgoodFunctional T(SourceTerm::tabulated(ts, fs));
  double tab = 0.0;
  for (const double x : {0.1, 0.5, 1.0, 2.0, 10.0, 100.0}) {
    tab = std::max(tab, std::abs(T(x) - 1.0 / x) * x);
  }
  c.expect(round_trip <= 1e-8, "round trip");
  c.expect(closed <= 1e-12, "power closed forms");
  c.expect(tab <= 1e-8, "tabulated t^2");
  c.note("round trip " + fmt(round_trip, 2) + ", power closed form " + fmt(closed, 2) + ", tabulated " + fmt(tab, 2));
  return c.outcome();
}

Outcome diagnostics_criterion() {
  Checker c;
  double mono = 0.0;
  double gap = 1e300;
  int checked = 0;
  for (const auto& k : soundness_cases) {
    if (!k.certificate || k.trace.status != SolveStatus::BlowUp) {
      continue;
    }
    const auto d = diagnostics(k.trace, *k.S, k.f, 0.9 * k.trace.t_emp, k.certificate->G);
    mono = std::max(mono, d.monotonicity_violation);
    gap = std::min(gap, d.min_derivative_gap);
    ++checked;
  }
  c.expect(checked == 50, "only " + std::to_string(checked) + " traces available");
  c.expect(mono <= 1e-6, "j not monotone");
  c.expect(gap >= -1e-4, "finite-difference j' below f(j)");
  c.note(std::to_string(checked) + " traces, monotonicity violation " + fmt(mono, 2) + ", min j'-f(j) " + fmt(gap, 3));
  return c.outcome();
}

Outcome criterion_arithmetic() {
  Checker c;
  struct Row {
    bool graph;
    double x;
    double beta;
    double gamma;
    bool predicted;
  };
  const std::vector<Row> rows{
      {true, 1.0, 2.0, 1.0, true},   {true, 2.0, 2.0, 1.0, false},  {true, 1.0, 2.0, 2.0, false},
      {true, 4.0, 2.0, 0.5, false},  {true, 3.0, 2.0, 0.5, true},   {true, 0.5, 2.0, 5.0, false},
      {false, 1.0, 2.0, 1.0, true},  {false, 2.0, 2.0, 1.0, false}, {false, 1.0, 1.0, 1.0, false},
      {false, 3.0, 2.0, 0.5, true},  {false, 1.0, 1.5, 1.4, true},  {false, 2.0, 0.5, 0.25, false},
  };
  int agree = 0;
  for (const auto& r : rows) {
    const auto v = r.graph ? criterion_graph(r.x, r.gamma) : criterion_mms(r.x, r.beta, r.gamma);
    const bool ok = v.blowup_predicted == r.predicted &&
                    verdict_string(v) == (r.predicted ? "blow-up-predicted" : "theorem-silent");
    agree += ok ? 1 : 0;
  }
  c.expect(agree == 12, std::to_string(12 - agree) + " verdicts wrong");

  const auto config = cli::load_config(OSGOOD_CONFIG_DIR "/gaussian_torus.json");
  const auto& v = config.analysis.validate;
  auto spec = *config.kernel;
  const auto coarse = cli::build_kernel(spec);
  spec.mesh *= 2;
  const auto fine = cli::build_kernel(spec);
  AxiomOptions options;
  options.tolerance = 5e-3;
  const auto r1 = validate_axioms(coarse, v.t_grid, spread_samples(coarse.space().size(), v.samples), options);
  const auto r2 = validate_axioms(fine, v.t_grid, spread_samples(fine.space().size(), v.samples), options);
  double worst = 0.0;
  for (const auto* r : r1.all()) {
    worst = std::max(worst, r->residual);
  }
  c.expect(r1.passed() && worst <= 5e-3, "shipped Gaussian config fails the axioms");
  c.expect(2.0 * r2.p1.residual <= r1.p1.residual && 2.0 * r2.p3.residual <= r1.p3.residual,
           "residuals do not halve under refinement");
  c.note("12/12 verdicts " + std::string(agree == 12 ? "ok" : "wrong") + ", mesh " + std::to_string(spec.mesh / 2) +
         " p1 " + fmt(r1.p1.residual, 2) + " p3 " + fmt(r1.p3.residual, 2) + " p4 " + fmt(r1.p4.residual, 2) +
         "; mesh " + std::to_string(spec.mesh) + " p1 " + fmt(r2.p1.residual, 2) + " p3 " + fmt(r2.p3.residual, 2));
  return c.outcome();
}

}  // namespace

int main() {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;  // <= 0: none
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "scalar oracle exactness", 1.0, scalar_oracle},
      {2, "closed-form semigroup", 1.0, closed_form_semigroup},
      {3, "Jensen suite", 30.0, jensen_suite},
      {4, "semigroup axioms", 60.0, semigroup_axioms},
      {5, "certificate soundness", 600.0, certificate_soundness},
      {6, "on-diagonal kernel asymptotics", 120.0, on_diagonal},
      {7, "Osgood functional", 0.0, osgood_functional},
      {8, "diagnostics", 0.0, diagnostics_criterion},
      {9, "criterion arithmetic", 0.0, criterion_arithmetic},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0.0 && seconds >= c.limit_seconds) {
      o.passed = false;
      o.detail += " | runtime limit " + fmt(c.limit_seconds) + " s exceeded";
    }
    failed += o.passed ? 0 : 1;
    std::printf("criterion %d %s: %s (%.2f s) %s\n", c.id, o.passed ? "PASS" : "FAIL", c.name, seconds,
                o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
