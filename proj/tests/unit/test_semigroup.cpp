#include "osgood/errors.hpp"
#include "osgood/semigroup.hpp"

#include "doctest.h"

#include <boost/math/special_functions/bessel.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <array>
#include <random>

using namespace osgood;

namespace {

std::shared_ptr<const WeightedGraph> share(WeightedGraph g) {
  return std::make_shared<const WeightedGraph>(std::move(g));
}

std::shared_ptr<const WeightedGraph> two_vertex() {
  const std::vector<Edge> e{{0, 1, 1.0}};
  return share(WeightedGraph(2, e, Vector::Ones(2)));
}

// Generator matrix of L from the edge list: L = M^{-1}(D - B).
Matrix generator(const WeightedGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Matrix L = Matrix::Zero(n, n);
  for (const auto& e : g.edges()) {
    const auto u = static_cast<Eigen::Index>(e.u);
    const auto v = static_cast<Eigen::Index>(e.v);
    L(u, v) -= e.weight;
    L(v, u) -= e.weight;
    L(u, u) += e.weight;
    L(v, v) += e.weight;
  }
  return g.measure().cwiseInverse().asDiagonal() * L;
}

Vector random_nonnegative(Eigen::Index n, std::mt19937_64& rng, double hi = 1.0) {
  std::uniform_real_distribution<double> u(0.0, hi);
  Vector v(n);
  for (auto& x : v) {
    x = u(rng);
  }
  return v;
}

}  // namespace

TEST_CASE("two-vertex closed form") {
  const SemigroupOperator S(two_vertex());
  for (const double t : {0.0, 0.1, 1.0, 10.0}) {
    const Vector u = S.apply(t, Vector::Unit(2, 0));
    const double e = std::exp(-2.0 * t);
    CHECK(std::abs(u[0] - 0.5 * (1.0 + e)) <= 1e-12);
    CHECK(std::abs(u[1] - 0.5 * (1.0 - e)) <= 1e-12);
    if (t > 0.0) {
      CHECK(std::abs(S.heat_kernel(t, 0, 0).value - 0.5 * (1.0 + e)) <= 1e-12);
    }
  }
  CHECK(check_chapman_kolmogorov(S, 1.0, 1.0) <= 1e-10);
  CHECK_THROWS_AS(S.apply(-1.0, Vector::Ones(2)), DomainError);
  CHECK_THROWS_AS(S.heat_kernel(0.0, 0, 1), DomainError);
}

TEST_CASE("dense and Krylov routes match an independent matrix exponential") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = share(generators::random_connected(5 + 4 * trial, 0.25, rng));
    const Matrix L = generator(*g);
    const SemigroupOperator dense(g, ExpMethod::Dense);
    const SemigroupOperator krylov(g, ExpMethod::Krylov);
    const Vector phi = random_nonnegative(L.rows(), rng, 3.0);
    for (const double t : {0.05, 1.0, 7.0}) {
      const Matrix E = (-t * L).exp();
      const Vector oracle = E * phi;
      const double scale = phi.cwiseAbs().maxCoeff();
      CHECK((dense.apply(t, phi) - oracle).cwiseAbs().maxCoeff() <= 1e-10 * scale);
      CHECK((krylov.apply(t, phi) - oracle).cwiseAbs().maxCoeff() <= 1e-9 * scale);
      // p_t(x, y) = E(x, y) / m(y).
      const Matrix P = dense.kernel_matrix(t);
      const Matrix expected = E * g->measure().cwiseInverse().asDiagonal();
      CHECK((P - expected).cwiseAbs().maxCoeff() <= 1e-10 * expected.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("semigroup properties on random graphs") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<Index> size(2, 50);
    auto g = share(generators::random_connected(size(rng), 0.15, rng));
    const SemigroupOperator S(g);
    const auto n = static_cast<Eigen::Index>(g->size());
    const Vector phi = random_nonnegative(n, rng);
    for (const double t : {0.1, 1.0, 10.0}) {
      const Vector u = S.apply(t, phi);
      CHECK(u.minCoeff() >= -1e-12);
      CHECK(u.maxCoeff() <= 1.0 + 1e-12);
      CHECK((S.apply(t, Vector::Ones(n)).array() - 1.0).abs().maxCoeff() <= 1e-10);
      CHECK(semigroup_law_error(S, t, 0.5 * t, phi) <= 1e-8 * phi.cwiseAbs().maxCoeff());
      CHECK(kernel_asymmetry(S, t) <= 1e-10);
      CHECK(check_chapman_kolmogorov(S, t, t) <= 1e-8);
      const Matrix P = S.kernel_matrix(t);
      CHECK(P.minCoeff() >= -1e-12);
      const Vector mass = P * g->measure();
      CHECK(mass.maxCoeff() <= 1.0 + 1e-10);
      // Heat kernel consistent with apply.
      const Vector via_kernel = P * (phi.array() * g->measure().array()).matrix();
      CHECK((via_kernel - u).cwiseAbs().maxCoeff() <= 1e-10);
    }
    CHECK((S.apply(0.0, phi) - phi).cwiseAbs().maxCoeff() == 0.0);
    const double t = 2.0;
    const Matrix a = S.kernel_matrix(t);
    const Matrix b = S.kernel_matrix(t + 1e-8);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("Krylov agrees with dense up to 500 vertices") {
  std::mt19937_64 rng(13);
  for (const Index n : {100, 300, 500}) {
    auto g = share(generators::random_connected(n, 0.01, rng));
    const SemigroupOperator dense(g, ExpMethod::Dense);
    const SemigroupOperator krylov(g, ExpMethod::Krylov);
    const Vector phi = random_nonnegative(static_cast<Eigen::Index>(n), rng);
    for (const double t : {0.3, 3.0, 30.0}) {
      CHECK((dense.apply(t, phi) - krylov.apply(t, phi)).cwiseAbs().maxCoeff() <= 1e-8);
    }
    CHECK((dense.apply_reference(1.0, phi) - dense.apply(1.0, phi)).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("on-diagonal heat kernel of a long path matches the Bessel oracle") {
  // On Z with unit weights, p_t(0,0) = e^{-2t} I_0(2t).
  auto g = share(generators::path(4001));
  const SemigroupOperator S(g);
  CHECK(S.method() == ExpMethod::Krylov);
  for (const double t : {25.0, 100.0}) {
    const double oracle = std::exp(-2.0 * t) * boost::math::cyl_bessel_i(0, 2.0 * t);
    const double p = S.heat_kernel(t, 2000, 2000).value;
    CHECK(std::abs(p - oracle) <= 1e-8 * oracle);
    CHECK(std::abs(p * std::sqrt(t) - 0.2821) <= 0.02);
  }
}

TEST_CASE("Jensen examples") {
  const SemigroupOperator S(two_vertex());
  const auto sq = SourceTerm::power(1.0);
  const auto c = check_jensen(S, sq, 0.7, Vector::Constant(2, 1.3));
  CHECK(std::abs(c.min_slack) <= 1e-12);
  const auto r = check_jensen(S, sq, 0.5, Vector::Unit(2, 0));
  CHECK(r.passed);
  // S f(phi) - f(S phi) at vertex 0: (1+e)/2 - ((1+e)/2)^2 with e = e^{-1}.
  const double e = std::exp(-1.0);
  CHECK(r.min_slack >= 0.0);
  CHECK(r.min_slack <= 0.5 * (1.0 + e) - 0.25 * (1.0 + e) * (1.0 + e) + 1e-12);
  CHECK_THROWS_AS(check_jensen(S, sq, 0.5, Vector::Constant(2, -1.0)), DomainError);
}

TEST_CASE("Jensen property on random cases") {
  std::mt19937_64 rng(14);
  const std::vector<SourceTerm> fs{SourceTerm::power(1.0), SourceTerm::power(2.0), SourceTerm::exp_minus_one()};
  std::uniform_int_distribution<Index> size(1, 20);
  int failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const SemigroupOperator S(share(generators::random_connected(size(rng), 0.2, rng)));
    const Vector phi = random_nonnegative(static_cast<Eigen::Index>(S.size()), rng, 2.0);
    const double t = std::array<double, 3>{0.1, 1.0, 10.0}[trial % 3];
    failures += check_jensen(S, fs[trial % 3], t, phi).passed ? 0 : 1;
  }
  CHECK(failures == 0);
}

TEST_CASE("Krylov expv reports its work") {
  auto g = share(generators::path(50));
  const SemigroupOperator S(g);
  KrylovStats stats;
  const Vector v = Vector::Unit(50, 25);
  const Vector u = expv_symmetric(S.symmetric_generator(), 2.0, v, {}, &stats);
  CHECK(stats.matvecs > 0);
  CHECK((u - S.apply_dense(2.0, v)).cwiseAbs().maxCoeff() <= 1e-10);
}
