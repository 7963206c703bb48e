#pragma once

#include "osgood/graph.hpp"
#include "osgood/krylov.hpp"
#include "osgood/source_term.hpp"
#include "osgood/types.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

namespace osgood {

/// A sub-Markovian semigroup acting on functions over a finite measure space.
/// Implementations are immutable after construction and safe to share
/// between threads.
class SemigroupAction {
 public:
  virtual ~SemigroupAction() = default;

  virtual Index size() const = 0;
  virtual const Vector& measure() const = 0;
  /// S(t) phi; throws DomainError for t < 0.
  virtual Vector apply(double t, const Vector& phi) const = 0;
  /// Recomputation of S(t) phi along a different numerical route, used to
  /// re-verify certificates.
  virtual Vector apply_reference(double t, const Vector& phi) const { return apply(t, phi); }
  virtual std::string label(Index x) const { return std::to_string(x); }
};

enum class ExpMethod { Auto, Dense, Krylov };

struct HeatKernelEntry {
  double t;
  Index x;
  Index y;
  double value;
};

/// Heat semigroup e^{-tL} of a finite weighted graph.
///
/// L is similar to the symmetric matrix A = M^{-1/2} (D - B) M^{-1/2}, so
/// e^{-tL} = M^{-1/2} e^{-tA} M^{1/2}. The dense route diagonalizes A once
/// and reuses the spectrum for every t; the Krylov route runs Lanczos on A.
class SemigroupOperator final : public SemigroupAction {
 public:
  static constexpr Index kDenseLimit = 2000;

  explicit SemigroupOperator(std::shared_ptr<const WeightedGraph> graph,
                             ExpMethod method = ExpMethod::Auto, double tolerance = 1e-10);

  Index size() const override { return graph_->size(); }
  const Vector& measure() const override { return graph_->measure(); }
  Vector apply(double t, const Vector& phi) const override;
  Vector apply_reference(double t, const Vector& phi) const override;
  std::string label(Index x) const override { return graph_->label(x); }

  Vector apply_dense(double t, const Vector& phi) const;
  Vector apply_krylov(double t, const Vector& phi, double tolerance) const;

  /// p_t(x, y) = (1/m(y)) (e^{-tL} 1_y)(x).
  HeatKernelEntry heat_kernel(double t, Index x, Index y) const;
  /// p_t(., y); memoized per (t, y).
  Vector kernel_column(double t, Index y) const;
  /// Full kernel p_t as a matrix; requires size() <= kDenseLimit.
  Matrix kernel_matrix(double t) const;

  ExpMethod method() const noexcept { return method_; }
  double tolerance() const noexcept { return tolerance_; }
  const WeightedGraph& graph() const noexcept { return *graph_; }
  const std::shared_ptr<const WeightedGraph>& graph_ptr() const noexcept { return graph_; }
  const SparseMatrix& symmetric_generator() const noexcept { return generator_; }

 private:
  struct Spectrum {
    Vector eigenvalues;
    Matrix eigenvectors;
  };
  const Spectrum& spectrum() const;
  void check_input(double t, const Vector& phi) const;

  std::shared_ptr<const WeightedGraph> graph_;
  ExpMethod method_;
  double tolerance_;
  SparseMatrix generator_;
  Vector sqrt_m_;

  mutable std::once_flag spectrum_once_;
  mutable std::unique_ptr<Spectrum> spectrum_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<double, Index>, Vector> column_cache_;
};

struct JensenReport {
  Vector slack;  // S(t) f(phi) - f(S(t) phi)
  double min_slack = 0.0;
  Index worst_vertex = 0;
  bool passed = true;

  static constexpr double kTolerance = 1e-9;
};

/// Componentwise check of f(S(t) phi) <= S(t) f(phi) for phi >= 0.
JensenReport check_jensen(const SemigroupAction& S, const SourceTerm& f, double t, const Vector& phi);

/// max_{x,y} |p_{t+s}(x,y) - sum_z p_t(x,z) p_s(z,y) m(z)|.
double check_chapman_kolmogorov(const SemigroupOperator& S, double t, double s);

/// ||S(t) S(s) phi - S(t+s) phi||_inf.
double semigroup_law_error(const SemigroupAction& S, double t, double s, const Vector& phi);

/// max_{x,y} |p_t(x,y) - p_t(y,x)|.
double kernel_asymmetry(const SemigroupOperator& S, double t);

}  // namespace osgood
