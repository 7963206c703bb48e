#include "osgood/blowup.hpp"

#include "osgood/errors.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <thread>

namespace osgood {
namespace {

void check_initial(const SemigroupAction& S, const Vector& a) {
  if (a.size() != static_cast<Eigen::Index>(S.size())) {
    throw DomainError("initial value size does not match the state space");
  }
  if (!a.allFinite() || (a.array() < 0.0).any()) {
    throw DomainError("initial value must be finite and nonnegative");
  }
}

struct GridPoint {
  double T = 0.0;
  std::optional<BlowupCertificate> best;
};

// Best certifying superlevel set of S(T)a, if any.
GridPoint scan(const SemigroupAction& S, const OsgoodFunctional& F, const Vector& a, double T) {
  GridPoint out;
  out.T = T;
  const Vector v = S.apply(T, a);
  const Vector& m = S.measure();
  const double threshold = F.inverse(T);
  std::vector<Index> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
    return v[static_cast<Eigen::Index>(i)] > v[static_cast<Eigen::Index>(j)];
  });
  long double mass = 0.0L;
  long double weighted = 0.0L;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(order[k]);
    mass += m[i];
    weighted += v[i] * m[i];
    // Only complete level sets are superlevel sets.
    if (k + 1 < order.size() && v[static_cast<Eigen::Index>(order[k + 1])] == v[i]) {
      continue;
    }
    const double mean = static_cast<double>(weighted / mass);
    const double margin = mean - threshold;
    if (margin > kStrictnessMargin && (!out.best || margin > out.best->margin)) {
      BlowupCertificate c;
      c.T = T;
      c.G.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k + 1));
      std::sort(c.G.begin(), c.G.end());
      c.mean_value = mean;
      c.threshold = threshold;
      c.margin = margin;
      c.form = c.G.size() == 1 ? CertificateForm::Pointwise : CertificateForm::Mean;
      out.best = std::move(c);
    }
  }
  return out;
}

}  // namespace

std::string to_string(CertificateForm form) {
  return form == CertificateForm::Mean ? "mean" : "pointwise";
}

Verification verify_certificate(const SemigroupAction& S, const OsgoodFunctional& F, const Vector& a,
                                double T, const Subset& G, bool reference) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw DomainError("certificate time must be positive and finite");
  }
  if (G.empty()) {
    throw DomainError("certificate set G is empty");
  }
  check_initial(S, a);
  const Vector& m = S.measure();
  for (const Index x : G) {
    if (x >= S.size()) {
      throw DomainError("certificate set G contains an out-of-range point");
    }
  }

  Verification out;
  out.threshold = F.inverse(T);
  if ((a.array() == 0.0).all()) {
    out.reason = "trivial initial value";
    out.margin = -out.threshold;
    return out;
  }
  const Vector v = reference ? S.apply_reference(T, a) : S.apply(T, a);
  long double mass = 0.0L;
  long double weighted = 0.0L;
  for (const Index x : G) {
    const auto i = static_cast<Eigen::Index>(x);
    mass += m[i];
    weighted += v[i] * m[i];
  }
  if (!(mass > 0.0L) || !std::isfinite(static_cast<double>(mass))) {
    throw DomainError("certificate set G must have positive finite measure");
  }
  out.mean_value = static_cast<double>(weighted / mass);
  out.margin = out.mean_value - out.threshold;
  if (!(out.margin > kStrictnessMargin)) {
    out.reason = "mean " + std::to_string(out.mean_value) + " does not exceed F^-1(T) = " +
                 std::to_string(out.threshold);
    return out;
  }
  BlowupCertificate c;
  c.T = T;
  c.G = G;
  std::sort(c.G.begin(), c.G.end());
  c.G.erase(std::unique(c.G.begin(), c.G.end()), c.G.end());
  c.mean_value = out.mean_value;
  c.threshold = out.threshold;
  c.margin = out.margin;
  c.form = c.G.size() == 1 ? CertificateForm::Pointwise : CertificateForm::Mean;
  out.certificate = std::move(c);
  return out;
}

Verification verify_certificate(const SemigroupAction& S, const SourceTerm& f, const Vector& a,
                                double T, const Subset& G, bool reference) {
  return verify_certificate(S, OsgoodFunctional(f), a, T, G, reference);
}

std::vector<double> geometric_grid(double t_min, double t_max, std::size_t n) {
  if (!(t_min > 0.0) || !(t_max > t_min) || !std::isfinite(t_max)) {
    throw DomainError("geometric grid: need 0 < t_min < t_max");
  }
  if (n < 2) {
    throw DomainError("geometric grid: need at least 2 points");
  }
  std::vector<double> grid(n);
  const double ratio = std::log(t_max / t_min);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = t_min * std::exp(ratio * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  grid.front() = t_min;
  grid.back() = t_max;
  return grid;
}

SearchResult search_certificate(const SemigroupAction& S, const OsgoodFunctional& F, const Vector& a,
                                double t_min, double t_max, std::size_t grid_size,
                                const SearchOptions& options) {
  check_initial(S, a);
  SearchResult result;
  result.grid = geometric_grid(t_min, t_max, grid_size);
  if ((a.array() == 0.0).all()) {
    return result;
  }
  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = std::max(1u, threads);

  const auto& grid = result.grid;
  for (std::size_t start = 0; start < grid.size(); start += threads) {
    const std::size_t stop = std::min(grid.size(), start + threads);
    std::vector<GridPoint> block(stop - start);
    if (threads == 1) {
      block[0] = scan(S, F, a, grid[start]);
    } else {
      std::vector<std::future<GridPoint>> jobs;
      for (std::size_t i = start; i < stop; ++i) {
        jobs.push_back(std::async(std::launch::async, [&, i] { return scan(S, F, a, grid[i]); }));
      }
      for (std::size_t i = 0; i < jobs.size(); ++i) {
        block[i] = jobs[i].get();
      }
    }
    result.evaluated += block.size();
    for (auto& point : block) {
      if (!point.best) {
        continue;
      }
      const auto check = verify_certificate(S, F, a, point.T, point.best->G, /*reference=*/true);
      const double scale = std::max(std::abs(point.best->mean_value), 1e-300);
      if (!check.certificate || std::abs(check.mean_value - point.best->mean_value) > kReverifyTolerance * scale) {
        ++result.reverify_failures;
        continue;
      }
      result.certificate = std::move(point.best);
      return result;
    }
  }
  return result;
}

std::string verdict_string(const CriterionVerdict& v) {
  return v.blowup_predicted ? "blow-up-predicted" : "theorem-silent";
}

CriterionVerdict criterion_graph(double theta, double gamma) {
  if (!(theta > 0.0) || !(gamma > 0.0) || !std::isfinite(theta) || !std::isfinite(gamma)) {
    throw DomainError("criterion_graph: theta and gamma must be positive");
  }
  CriterionVerdict v;
  v.criterion = Criterion::Graph;
  v.theta_or_alpha = theta;
  v.beta = 2.0;
  v.gamma = gamma;
  v.product = theta * gamma;
  v.bound = 2.0;
  v.blowup_predicted = v.product < v.bound;
  return v;
}

CriterionVerdict criterion_mms(double alpha, double beta, double gamma) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(gamma > 0.0) || !std::isfinite(alpha) ||
      !std::isfinite(beta) || !std::isfinite(gamma)) {
    throw DomainError("criterion_mms: alpha, beta and gamma must be positive");
  }
  CriterionVerdict v;
  v.criterion = Criterion::MetricMeasure;
  v.theta_or_alpha = alpha;
  v.beta = beta;
  v.gamma = gamma;
  v.product = alpha * gamma;
  v.bound = beta;
  v.blowup_predicted = v.product < v.bound;
  return v;
}

OnDiagonalFit on_diagonal_fit(const SemigroupOperator& S, Index x, double theta,
                              const std::vector<double>& t_grid) {
  if (x >= S.size()) {
    throw DomainError("on_diagonal_fit: vertex out of range");
  }
  if (!(theta >= 0.0)) {
    throw DomainError("on_diagonal_fit: theta must be nonnegative");
  }
  if (t_grid.empty()) {
    throw DomainError("on_diagonal_fit: empty time grid");
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 1.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
      throw DomainError("on_diagonal_fit: times must increase and exceed 1");
    }
  }
  OnDiagonalFit fit;
  fit.c = std::numeric_limits<double>::infinity();
  for (const double t : t_grid) {
    const double p = S.heat_kernel(t, x, x).value;
    const double scaled = p * std::pow(std::sqrt(t) * std::log(t), theta);
    fit.t.push_back(t);
    fit.scaled.push_back(scaled);
    if (scaled < fit.c) {
      fit.c = scaled;
      fit.worst_t = t;
    }
  }
  return fit;
}

}  // namespace osgood
