#include "osgood/blowup.hpp"
#include "osgood/errors.hpp"
#include "osgood/mild_solver.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

using namespace osgood;

namespace {

std::shared_ptr<const WeightedGraph> share(WeightedGraph g) {
  return std::make_shared<const WeightedGraph>(std::move(g));
}

std::shared_ptr<const WeightedGraph> two_vertex() {
  const std::vector<Edge> e{{0, 1, 1.0}};
  return share(WeightedGraph(2, e, Vector::Ones(2)));
}

}  // namespace

TEST_CASE("scalar oracle") {
  const SemigroupOperator S(share(generators::edgeless(1)));
  const auto f = SourceTerm::power(1.0);
  const Vector a = Vector::Constant(1, 2.0);
  const auto trace = solve(S, f, a, 1.0);
  REQUIRE(trace.status == SolveStatus::BlowUp);
  CHECK(std::abs(trace.t_emp - 0.5) <= 0.005);
  CHECK(std::abs(trace.t_emp - 0.5) <= trace.t_emp_error);
  CHECK(trace.sup_norms.back() > 1e8);
  // Near the singularity an error in time of dt shows up as 2 u^2 dt.
  for (std::size_t i = 0; i < trace.times.size(); i += 97) {
    const double t = trace.times[i];
    if (t < 0.499) {
      const double exact = 2.0 / (1.0 - 2.0 * t);
      CHECK(std::abs(trace.states[i][0] - exact) <= 1e-5 * exact + 2e-6 * exact * exact);
    }
  }

  StepControls tight;
  tight.rtol = 0.5e-6;
  const auto finer = solve(S, f, a, 1.0, tight);
  CHECK(std::abs(finer.t_emp - trace.t_emp) <= trace.t_emp_error);
}

TEST_CASE("zero initial value is a fixed point") {
  const SemigroupOperator S(share(generators::cycle(6)));
  const auto trace = solve(S, SourceTerm::power(1.0), Vector::Zero(6), 2.0);
  CHECK(trace.status == SolveStatus::ReachedHorizon);
  CHECK(trace.end_time() == doctest::Approx(2.0));
  for (const auto& u : trace.states) {
    CHECK(u.cwiseAbs().maxCoeff() == 0.0);
  }
  const auto r = check_residual(trace, S, SourceTerm::power(1.0), Vector::Zero(6), trace.times[trace.times.size() / 2]);
  CHECK(r.residual == 0.0);
  const auto d = diagnostics(trace, S, SourceTerm::power(1.0), 1.0, {0, 1});
  for (const double j : d.values) {
    CHECK(j == 0.0);
  }
  CHECK(d.monotonicity_violation == 0.0);
}

TEST_CASE("residual of the variation-of-constants formula") {
  const SemigroupOperator S(share(generators::edgeless(1)));
  const auto f = SourceTerm::power(1.0);
  const Vector a = Vector::Constant(1, 2.0);
  const auto trace = solve(S, f, a, 1.0);
  std::size_t k = 0;
  while (trace.times[k + 1] <= 0.25) {
    ++k;
  }
  const auto r = check_residual(trace, S, f, a, trace.times[k]);
  CHECK(r.relative <= 1e-5);
  CHECK_THROWS_AS(check_residual(trace, S, f, a, 0.5 * (trace.times[k] + trace.times[k + 1])), DomainError);

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    auto g = share(generators::random_connected(8 + trial, 0.3, rng));
    const SemigroupOperator Sg(g);
    Vector b(static_cast<Eigen::Index>(g->size()));
    for (auto& x : b) {
      x = 2.0 * u(rng);
    }
    const auto tr = solve(Sg, f, b, 100.0);
    REQUIRE(tr.status == SolveStatus::BlowUp);
    std::size_t idx = 0;
    while (tr.times[idx + 1] <= 0.5 * tr.t_emp) {
      ++idx;
    }
    CHECK(check_residual(tr, Sg, f, b, tr.times[idx]).relative <= 1e-4);
  }
}

TEST_CASE("solution dominates the linear flow and stays nonnegative") {
  std::mt19937_64 rng(32);
  auto g = share(generators::random_connected(15, 0.2, rng));
  const SemigroupOperator S(g);
  Vector a = Vector::Zero(15);
  a[4] = 3.0;
  const auto trace = solve(S, SourceTerm::exp_minus_one(), a, 10.0);
  CHECK(trace.min_component >= -1e-12);
  for (std::size_t i = 0; i < trace.times.size(); i += 13) {
    const Vector lin = S.apply(trace.times[i], a);
    CHECK((trace.states[i] - lin).minCoeff() >= -1e-8);
    CHECK(trace.states[i].minCoeff() >= 0.0);
  }
}

TEST_CASE("diagnostics on the scalar oracle") {
  const SemigroupOperator S(share(generators::edgeless(1)));
  const auto f = SourceTerm::power(1.0);
  const auto trace = solve(S, f, Vector::Constant(1, 2.0), 1.0);
  const auto d = diagnostics(trace, S, f, 0.4, {0});
  REQUIRE(d.values.size() >= 3);
  for (std::size_t i = 0; i < d.times.size(); ++i) {
    const double exact = 2.0 / (1.0 - 2.0 * d.times[i]);
    CHECK(std::abs(d.values[i] - exact) <= 1e-5 * exact);
  }
  CHECK(d.monotonicity_violation == 0.0);
  CHECK(d.min_derivative_gap >= -1e-4);
  CHECK_THROWS_AS(diagnostics(trace, S, f, 0.6, {0}), DomainError);
}

TEST_CASE("two-vertex soundness against a reference run") {
  const SemigroupOperator S(two_vertex());
  const auto f = SourceTerm::power(1.0);
  const Vector a(Eigen::Vector2d(4.0, 0.0));
  const auto trace = solve(S, f, a, 5.0);
  REQUIRE(trace.status == SolveStatus::BlowUp);
  StepControls tight;
  tight.rtol = 1e-7;
  const auto ref = solve(S, f, a, 5.0, tight);
  CHECK(std::abs(trace.t_emp - ref.t_emp) <= trace.t_emp_error + ref.t_emp_error);

  const OsgoodFunctional F(f);
  const auto search = search_certificate(S, F, a, 1e-2, 1e2, 801);
  REQUIRE(search.certificate.has_value());
  CHECK(trace.t_emp - trace.t_emp_error <= search.certificate->T);
  const auto at_one = verify_certificate(S, F, a, 1.0, {0});
  REQUIRE(at_one.certificate.has_value());
  CHECK(trace.t_emp <= 1.0);

  const auto d = diagnostics(trace, S, f, 0.9 * trace.t_emp, search.certificate->G);
  CHECK(d.monotonicity_violation <= 1e-6);
  CHECK(d.min_derivative_gap >= -1e-4);
}

TEST_CASE("step budget produces a step failure") {
  const SemigroupOperator S(share(generators::edgeless(1)));
  StepControls c;
  c.max_steps = 5;
  const auto trace = solve(S, SourceTerm::power(1.0), Vector::Constant(1, 0.01), 50.0, c);
  CHECK(trace.status == SolveStatus::StepFailure);
  CHECK_FALSE(trace.failure_reason.empty());
  CHECK(to_string(trace.status) == "step-failure");
  CHECK_THROWS_AS(solve(S, SourceTerm::power(1.0), Vector::Constant(1, -1.0), 1.0), DomainError);
  CHECK_THROWS_AS(solve(S, SourceTerm::power(1.0), Vector::Constant(1, 1.0), 0.0), DomainError);
}

TEST_CASE("trace export round trip") {
  const SemigroupOperator S(two_vertex());
  const auto trace = solve(S, SourceTerm::power(1.0), Vector(Eigen::Vector2d(1.0, 0.5)), 0.3);
  std::ostringstream csv;
  write_trace_csv(trace, csv);
  const std::string text = csv.str();
  CHECK(text.rfind("t,sup_norm,p_norm\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == trace.times.size() + 1);

  const auto path = std::filesystem::temp_directory_path() / "osgood_state_dump_test.bin";
  write_state_dump(trace, path);
  const auto back = read_state_dump(path);
  std::filesystem::remove(path);
  REQUIRE(back.times.size() == trace.times.size());
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    CHECK(back.times[i] == trace.times[i]);
    CHECK(back.states[i] == trace.states[i]);
    CHECK(back.sup_norms[i] == trace.sup_norms[i]);
  }
  CHECK_THROWS_AS(read_state_dump("/nonexistent/osgood.bin"), InputError);
}
