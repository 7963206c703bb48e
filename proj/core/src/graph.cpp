#include "osgood/graph.hpp"

#include "osgood/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <utility>

namespace osgood {
namespace {

std::vector<std::string> index_labels(Index n) {
  std::vector<std::string> labels(n);
  for (Index i = 0; i < n; ++i) {
    labels[i] = std::to_string(i);
  }
  return labels;
}

}  // namespace

WeightedGraph::WeightedGraph(std::vector<std::string> labels, std::span<const Edge> edges,
                             Vector measure)
    : labels_(std::move(labels)), measure_(std::move(measure)) {
  const Index n = labels_.size();
  if (n == 0) {
    throw InputError("graph has no vertices");
  }
  if (static_cast<Index>(measure_.size()) != n) {
    throw InputError("measure has " + std::to_string(measure_.size()) + " entries for " +
                     std::to_string(n) + " vertices");
  }
  for (Index x = 0; x < n; ++x) {
    if (!(measure_[x] > 0.0) || !std::isfinite(measure_[x])) {
      throw InputError("measure must be positive and finite at vertex '" + labels_[x] + "'");
    }
    if (!index_.emplace(labels_[x], x).second) {
      throw InputError("duplicate vertex label '" + labels_[x] + "'");
    }
  }
  build(edges);
}

WeightedGraph::WeightedGraph(Index n, std::span<const Edge> edges, Vector measure)
    : WeightedGraph(index_labels(n), edges, std::move(measure)) {}

void WeightedGraph::build(std::span<const Edge> edges) {
  const Index n = labels_.size();
  std::set<std::pair<Index, Index>> seen;
  std::vector<std::size_t> degree(n, 0);
  for (const Edge& e : edges) {
    if (e.u >= n || e.v >= n) {
      throw InputError("edge endpoint out of range");
    }
    if (e.u == e.v) {
      throw InputError("self loop at vertex '" + labels_[e.u] + "' (b(x,x) must be 0)");
    }
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw InputError("edge weight must be nonnegative and finite");
    }
    if (!seen.emplace(std::min(e.u, e.v), std::max(e.u, e.v)).second) {
      throw InputError("edge '" + labels_[e.u] + "'-'" + labels_[e.v] + "' listed twice");
    }
    if (e.weight > 0.0) {
      ++degree[e.u];
      ++degree[e.v];
    }
  }
  row_start_.assign(n + 1, 0);
  for (Index x = 0; x < n; ++x) {
    row_start_[x + 1] = row_start_[x] + degree[x];
  }
  adjacency_.resize(row_start_[n]);
  std::vector<std::size_t> fill(row_start_.begin(), row_start_.end() - 1);
  for (const Edge& e : edges) {
    if (e.weight > 0.0) {
      adjacency_[fill[e.u]++] = {e.v, e.weight};
      adjacency_[fill[e.v]++] = {e.u, e.weight};
    }
  }
  for (Index x = 0; x < n; ++x) {
    std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(row_start_[x]),
              adjacency_.begin() + static_cast<std::ptrdiff_t>(row_start_[x + 1]),
              [](const Neighbor& a, const Neighbor& b) { return a.vertex < b.vertex; });
  }
}

std::optional<Index> WeightedGraph::find(const std::string& label) const {
  const auto it = index_.find(label);
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

double WeightedGraph::measure_of(std::span<const Index> subset) const {
  double total = 0.0;
  for (Index x : subset) {
    total += measure_[static_cast<Eigen::Index>(x)];
  }
  return total;
}

std::span<const Neighbor> WeightedGraph::neighbors(Index x) const {
  return {adjacency_.data() + row_start_[x], row_start_[x + 1] - row_start_[x]};
}

std::vector<Edge> WeightedGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (Index x = 0; x < size(); ++x) {
    for (const Neighbor& nb : neighbors(x)) {
      if (x < nb.vertex) {
        out.push_back({x, nb.vertex, nb.weight});
      }
    }
  }
  return out;
}

Vector apply_laplacian(const WeightedGraph& g, const Vector& phi) {
  if (static_cast<Index>(phi.size()) != g.size()) {
    throw DomainError("apply_laplacian: vector has " + std::to_string(phi.size()) +
                      " entries, graph has " + std::to_string(g.size()) + " vertices");
  }
  Vector out(phi.size());
  for (Index x = 0; x < g.size(); ++x) {
    const auto xi = static_cast<Eigen::Index>(x);
    double acc = 0.0;
    for (const Neighbor& nb : g.neighbors(x)) {
      acc += nb.weight * (phi[xi] - phi[static_cast<Eigen::Index>(nb.vertex)]);
    }
    out[xi] = acc / g.measure()[xi];
  }
  return out;
}

DegreeReport weighted_degree(const WeightedGraph& g) {
  DegreeReport report;
  report.degree.resize(static_cast<Eigen::Index>(g.size()));
  for (Index x = 0; x < g.size(); ++x) {
    const auto xi = static_cast<Eigen::Index>(x);
    double acc = 0.0;
    for (const Neighbor& nb : g.neighbors(x)) {
      acc += nb.weight;
    }
    report.degree[xi] = acc / g.measure()[xi];
  }
  report.sup = report.degree.maxCoeff();
  return report;
}

DistanceReport combinatorial_distance(const WeightedGraph& g, Index x) {
  if (x >= g.size()) {
    throw DomainError("combinatorial_distance: vertex out of range");
  }
  DistanceReport report;
  report.distance.assign(g.size(), kUnreachable);
  report.distance[x] = 0;
  std::deque<Index> queue{x};
  while (!queue.empty()) {
    const Index v = queue.front();
    queue.pop_front();
    for (const Neighbor& nb : g.neighbors(v)) {
      if (report.distance[nb.vertex] == kUnreachable) {
        report.distance[nb.vertex] = report.distance[v] + 1;
        queue.push_back(nb.vertex);
      }
    }
  }
  report.connected = std::none_of(report.distance.begin(), report.distance.end(),
                                  [](std::uint64_t d) { return d == kUnreachable; });
  return report;
}

std::vector<Index> connected_components(const WeightedGraph& g) {
  constexpr Index kUnset = std::numeric_limits<Index>::max();
  std::vector<Index> label(g.size(), kUnset);
  Index next = 0;
  for (Index start = 0; start < g.size(); ++start) {
    if (label[start] != kUnset) {
      continue;
    }
    std::deque<Index> queue{start};
    label[start] = next;
    while (!queue.empty()) {
      const Index v = queue.front();
      queue.pop_front();
      for (const Neighbor& nb : g.neighbors(v)) {
        if (label[nb.vertex] == kUnset) {
          label[nb.vertex] = next;
          queue.push_back(nb.vertex);
        }
      }
    }
    ++next;
  }
  return label;
}

VolumeGrowthFit fit_volume_growth(const WeightedGraph& g, Index x, Index r_max) {
  if (r_max < 2) {
    throw DomainError("fit_volume_growth: r_max must be at least 2");
  }
  const DistanceReport dist = combinatorial_distance(g, x);

  VolumeGrowthFit fit;
  fit.basepoint = x;
  fit.volumes.assign(r_max, 0.0);
  for (Index y = 0; y < g.size(); ++y) {
    const std::uint64_t d = dist.distance[y];
    if (d == kUnreachable) {
      continue;
    }
    // Ball of radius r contains y for every r >= max(d, 1).
    const std::uint64_t first = std::max<std::uint64_t>(d, 1);
    if (first <= r_max) {
      fit.volumes[first - 1] += g.measure()[static_cast<Eigen::Index>(y)];
    }
  }
  std::partial_sum(fit.volumes.begin(), fit.volumes.end(), fit.volumes.begin());

  const Index lo = std::max<Index>(1, r_max / 2);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double count = static_cast<double>(r_max - lo + 1);
  for (Index r = lo; r <= r_max; ++r) {
    const double lx = std::log(static_cast<double>(r));
    const double ly = std::log(fit.volumes[r - 1]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = count * sxx - sx * sx;
  fit.degree = denom > 0.0 ? std::max(0.0, (count * sxy - sx * sy) / denom) : 0.0;

  fit.constant = 0.0;
  for (Index r = lo; r <= r_max; ++r) {
    fit.constant = std::max(fit.constant,
                            fit.volumes[r - 1] / std::pow(static_cast<double>(r), fit.degree));
  }
  fit.threshold = static_cast<double>(lo - 1);
  for (Index r = lo; r <= r_max; ++r) {
    fit.residuals.push_back(fit.constant * std::pow(static_cast<double>(r), fit.degree) -
                            fit.volumes[r - 1]);
  }
  return fit;
}

namespace generators {
namespace {

Vector counting(Index n) { return Vector::Ones(static_cast<Eigen::Index>(n)); }

// Row-major strides for a box with the given sides.
std::vector<Index> strides(std::span<const Index> sides) {
  std::vector<Index> s(sides.size(), 1);
  for (std::size_t k = sides.size(); k-- > 1;) {
    s[k - 1] = s[k] * sides[k];
  }
  return s;
}

WeightedGraph lattice(std::span<const Index> sides, bool periodic) {
  if (sides.empty()) {
    throw DomainError("lattice generator needs at least one side");
  }
  Index n = 1;
  for (Index side : sides) {
    if (side == 0) {
      throw DomainError("lattice side must be positive");
    }
    n *= side;
  }
  const auto stride = strides(sides);
  std::vector<Edge> edges;
  for (Index v = 0; v < n; ++v) {
    for (std::size_t k = 0; k < sides.size(); ++k) {
      const Index coord = (v / stride[k]) % sides[k];
      if (coord + 1 < sides[k]) {
        edges.push_back({v, v + stride[k], 1.0});
      } else if (periodic && sides[k] > 2) {
        edges.push_back({v, v - coord * stride[k], 1.0});
      }
    }
  }
  return WeightedGraph(n, edges, counting(n));
}

}  // namespace

WeightedGraph path(Index n) {
  const Index sides[] = {n};
  return lattice(sides, false);
}

WeightedGraph cycle(Index n) {
  if (n < 3) {
    throw DomainError("cycle needs at least 3 vertices");
  }
  const Index sides[] = {n};
  return lattice(sides, true);
}

WeightedGraph grid(std::span<const Index> sides) { return lattice(sides, false); }

WeightedGraph torus(std::span<const Index> sides) {
  for (Index side : sides) {
    if (side < 3) {
      throw DomainError("torus sides must be at least 3");
    }
  }
  return lattice(sides, true);
}

WeightedGraph star(Index k, double center_mass) {
  std::vector<Edge> edges;
  for (Index leaf = 1; leaf <= k; ++leaf) {
    edges.push_back({0, leaf, 1.0});
  }
  Vector m = counting(k + 1);
  m[0] = center_mass;
  return WeightedGraph(k + 1, edges, std::move(m));
}

WeightedGraph edgeless(Index n, double mass) {
  return WeightedGraph(n, std::span<const Edge>{}, Vector::Constant(static_cast<Eigen::Index>(n), mass));
}

WeightedGraph random_connected(Index n, double extra_edge_prob, std::mt19937_64& rng, double w_lo,
                               double w_hi, double m_lo, double m_hi) {
  if (n == 0) {
    throw DomainError("random graph needs at least one vertex");
  }
  std::uniform_real_distribution<double> weight(w_lo, w_hi);
  std::uniform_real_distribution<double> mass(m_lo, m_hi);
  std::bernoulli_distribution extra(extra_edge_prob);

  std::set<std::pair<Index, Index>> present;
  std::vector<Edge> edges;
  for (Index v = 1; v < n; ++v) {
    std::uniform_int_distribution<Index> parent(0, v - 1);
    const Index u = parent(rng);
    present.emplace(u, v);
    edges.push_back({u, v, weight(rng)});
  }
  for (Index u = 0; u < n; ++u) {
    for (Index v = u + 1; v < n; ++v) {
      if (!present.count({u, v}) && extra(rng)) {
        edges.push_back({u, v, weight(rng)});
      }
    }
  }
  Vector m(static_cast<Eigen::Index>(n));
  for (auto& value : m) {
    value = mass(rng);
  }
  return WeightedGraph(n, edges, std::move(m));
}

}  // namespace generators
}  // namespace osgood
