#pragma once

#include "osgood/semigroup.hpp"
#include "osgood/stable_density.hpp"
#include "osgood/types.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace osgood {

/// Quadrature point cloud standing in for a metric measure space: either a
/// regular mesh^N grid on the flat torus [0, period)^N or a midpoint mesh on
/// an interval [0, length]. Each point carries the cell volume as its mass.
class PointCloud {
 public:
  enum class Topology { Torus, Interval };

  static PointCloud torus(int dim, Index mesh, double period);
  static PointCloud interval(Index mesh, double length);

  Topology topology() const noexcept { return topology_; }
  int dim() const noexcept { return dim_; }
  Index mesh() const noexcept { return mesh_; }
  double extent() const noexcept { return extent_; }
  double spacing() const noexcept { return extent_ / static_cast<double>(mesh_); }
  Index size() const noexcept { return size_; }
  const Vector& measure() const noexcept { return measure_; }

  /// Grid coordinates of point x (row-major, last axis fastest).
  std::vector<Index> cell(Index x) const;
  std::vector<double> coordinates(Index x) const;
  /// Per-axis offset counts between x and y: minimal image on the torus.
  std::vector<Index> offsets(Index x, Index y) const;
  double distance(Index x, Index y) const;
  /// Largest per-axis offset count (mesh/2 on the torus, mesh-1 on an interval).
  Index max_offset() const noexcept;

 private:
  PointCloud(Topology topology, int dim, Index mesh, double extent);

  Topology topology_;
  int dim_;
  Index mesh_;
  double extent_;
  Index size_;
  Vector measure_;
};

/// Lower bound p_t(x,y) >= t^{-alpha/beta} Phi(d(x,y) / t^{1/beta}).
struct LowerBound {
  double alpha = 0.0;
  double beta = 0.0;
  std::function<double(double)> phi;
  std::string formula;
};

enum class KernelFamily { Gaussian, FractionalStable };

/// Heat-kernel family on a point cloud. Immutable; evaluation is pure.
///
/// Gaussian(N):         p_t(r) = (4 pi t)^{-N/2} exp(-r^2 / 4t)
/// FractionalStable:    p_t(r) = t^{-N/beta} g(r t^{-1/beta})
///
/// On the torus the kernel is periodized over lattice images.
class KernelModel {
 public:
  static KernelModel gaussian(PointCloud space);
  static KernelModel fractional_stable(PointCloud space, double beta);

  /// Multiplies every kernel value; 1 is the genuine kernel.
  KernelModel with_mass_scale(double scale) const;
  KernelModel with_lower_bound(LowerBound bound) const;

  KernelFamily family() const noexcept { return family_; }
  std::string name() const;
  const PointCloud& space() const noexcept { return *space_; }
  const LowerBound& lower_bound() const noexcept { return bound_; }
  double mass_scale() const noexcept { return mass_scale_; }
  /// Walk dimension: 2 for the Gaussian, beta for the stable family.
  double beta() const noexcept { return beta_; }

  /// p_t as a function of the per-axis offset counts between two points.
  double kernel(double t, const std::vector<Index>& offsets) const;
  double density(double t, Index x, Index y) const { return kernel(t, space_->offsets(x, y)); }
  double operator()(double t, Index x, Index y) const { return density(t, x, y); }

  /// Kernel values for every offset pattern, indexed row-major over
  /// (max_offset()+1)^N.
  std::vector<double> table(double t) const;
  Index table_index(const std::vector<Index>& offsets) const;

 private:
  KernelModel() = default;
  double free_space(double t, double r) const;

  KernelFamily family_ = KernelFamily::Gaussian;
  std::shared_ptr<const PointCloud> space_;
  std::shared_ptr<const StableProfile> profile_;
  double beta_ = 2.0;
  double mass_scale_ = 1.0;
  int images_ = 0;
  LowerBound bound_;
};

struct AxiomResult {
  std::string axiom;
  bool passed = true;
  double residual = 0.0;
  double t = 0.0;
  Index x = 0;
  Index y = 0;
};

struct AxiomOptions {
  double tolerance = 5e-3;
  double p = 2.0;
  /// Width of the (p4) sample bumps; <= 0 selects extent / 8.
  double bump_width = 0.0;
};

struct AxiomReport {
  AxiomResult p1;  // mass
  AxiomResult p2;  // symmetry
  AxiomResult p3;  // Chapman-Kolmogorov
  AxiomResult p4;  // strong continuity at the smallest t
  double tolerance = 0.0;

  bool passed() const noexcept { return p1.passed && p2.passed && p3.passed && p4.passed; }
  std::vector<const AxiomResult*> all() const { return {&p1, &p2, &p3, &p4}; }
};

AxiomReport validate_axioms(const KernelModel& k, const std::vector<double>& t_grid,
                            const std::vector<Index>& sample_points, const AxiomOptions& options = {});

struct LowerBoundReport {
  double slack = 0.0;
  double t = 0.0;
  Index x = 0;
  Index y = 0;
  bool passed = true;

  static constexpr double kTolerance = 1e-12;
};

LowerBoundReport lower_bound_check(const KernelModel& k, const std::vector<double>& t_grid,
                                   const std::vector<std::pair<Index, Index>>& pairs);

/// S(t) phi (x) = sum_y p_t(x,y) phi(y) m(y) on the point cloud.
class KernelSemigroup final : public SemigroupAction {
 public:
  explicit KernelSemigroup(KernelModel model);

  Index size() const override { return model_.space().size(); }
  const Vector& measure() const override { return model_.space().measure(); }
  /// Table-driven application.
  Vector apply(double t, const Vector& phi) const override;
  /// Direct evaluation of every kernel entry.
  Vector apply_reference(double t, const Vector& phi) const override;

  const KernelModel& model() const noexcept { return model_; }

 private:
  KernelModel model_;
  std::vector<std::vector<Index>> cells_;
};

std::shared_ptr<KernelSemigroup> semigroup_from_kernel(const KernelModel& k);

/// Evenly spaced sample indices (at most `count`).
std::vector<Index> spread_samples(Index n, Index count);

}  // namespace osgood
