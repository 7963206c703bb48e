#pragma once

#include "osgood/types.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace osgood {

/// One undirected edge with weight b(u, v) = b(v, u) > 0.
struct Edge {
  Index u;
  Index v;
  double weight;
};

struct Neighbor {
  Index vertex;
  double weight;
};

/// Finite weighted graph b over a discrete measure space (X, m).
///
/// Vertices carry string labels. Edge weights are symmetric and positive,
/// there are no self loops, and m(x) > 0 for every vertex. Adjacency is
/// stored in compressed rows, so neighbor lists are contiguous spans.
class WeightedGraph {
 public:
  WeightedGraph(std::vector<std::string> labels, std::span<const Edge> edges, Vector measure);

  /// Unlabelled constructor; vertex labels are "0", "1", ...
  WeightedGraph(Index n, std::span<const Edge> edges, Vector measure);

  Index size() const noexcept { return labels_.size(); }
  const std::string& label(Index x) const { return labels_.at(x); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<Index> find(const std::string& label) const;

  const Vector& measure() const noexcept { return measure_; }
  double measure_of(std::span<const Index> subset) const;
  double total_measure() const { return measure_.sum(); }

  std::span<const Neighbor> neighbors(Index x) const;
  std::size_t edge_count() const noexcept { return adjacency_.size() / 2; }
  std::vector<Edge> edges() const;

 private:
  void build(std::span<const Edge> edges);

  std::vector<std::string> labels_;
  std::unordered_map<std::string, Index> index_;
  Vector measure_;
  std::vector<std::size_t> row_start_;
  std::vector<Neighbor> adjacency_;
};

/// (L phi)(x) = (1/m(x)) sum_y b(x, y) (phi(x) - phi(y)).
Vector apply_laplacian(const WeightedGraph& g, const Vector& phi);

struct DegreeReport {
  Vector degree;  // Deg(x) = (1/m(x)) sum_y b(x, y)
  double sup = 0.0;
};

DegreeReport weighted_degree(const WeightedGraph& g);

inline constexpr std::uint64_t kUnreachable = std::numeric_limits<std::uint64_t>::max();

struct DistanceReport {
  std::vector<std::uint64_t> distance;  // kUnreachable outside the component
  bool connected = true;
};

/// Breadth-first combinatorial distance from x; edges are pairs with b > 0.
DistanceReport combinatorial_distance(const WeightedGraph& g, Index x);

/// Connected component label per vertex, labels 0..k-1.
std::vector<Index> connected_components(const WeightedGraph& g);

struct VolumeGrowthFit {
  Index basepoint = 0;
  double degree = 0.0;    // theta
  double constant = 0.0;  // d
  double threshold = 0.0; // r0; V_r <= d r^theta for sampled r > r0
  std::vector<double> volumes;    // V_r for r = 1..r_max
  std::vector<double> residuals;  // d r^theta - V_r on the fit window
};

/// Least-squares fit of log V_r against log r over [r_max/2, r_max], with d
/// the smallest constant making V_r <= d r^theta on that window.
VolumeGrowthFit fit_volume_growth(const WeightedGraph& g, Index x, Index r_max);

/// Built-in generators. All use unit weights and counting measure unless a
/// measure is passed.
namespace generators {

WeightedGraph path(Index n);
WeightedGraph cycle(Index n);
/// Rectangular patch of Z^d with the given side lengths.
WeightedGraph grid(std::span<const Index> sides);
/// Discrete torus (Z/n_1) x ... x (Z/n_d).
WeightedGraph torus(std::span<const Index> sides);
/// Star with k leaves; the center is vertex 0 with mass `center_mass`.
WeightedGraph star(Index k, double center_mass = 1.0);
/// Edgeless graph on n vertices (L = 0).
WeightedGraph edgeless(Index n, double mass = 1.0);
/// Connected random graph: random spanning tree plus extra edges with
/// probability `extra_edge_prob`; weights in [w_lo, w_hi], masses in [m_lo, m_hi].
WeightedGraph random_connected(Index n, double extra_edge_prob, std::mt19937_64& rng,
                               double w_lo = 0.1, double w_hi = 2.0, double m_lo = 0.5,
                               double m_hi = 2.0);

}  // namespace generators

}  // namespace osgood
