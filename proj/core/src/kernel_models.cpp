#include "osgood/kernel_models.hpp"

#include "osgood/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace osgood {
namespace {

constexpr double kPi = std::numbers::pi;

Index ipow(Index base, int exp) {
  Index r = 1;
  for (int i = 0; i < exp; ++i) {
    r *= base;
  }
  return r;
}

void check_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw DomainError("kernel: time must be positive and finite");
  }
}

// Stable-family image range per axis on the torus.
constexpr int kStableImages = 2;

}  // namespace

// ---------------------------------------------------------------------------
// PointCloud

PointCloud::PointCloud(Topology topology, int dim, Index mesh, double extent)
    : topology_(topology), dim_(dim), mesh_(mesh), extent_(extent) {
  if (dim < 1 || dim > 3) {
    throw DomainError("point cloud: dimension must be 1, 2 or 3");
  }
  if (mesh < 2) {
    throw DomainError("point cloud: mesh must have at least 2 points per axis");
  }
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    throw DomainError("point cloud: extent must be positive");
  }
  size_ = ipow(mesh, dim);
  if (size_ > 1'000'000) {
    throw DomainError("point cloud: more than 1e6 points");
  }
  measure_ = Vector::Constant(static_cast<Eigen::Index>(size_), std::pow(extent / mesh, dim));
}

PointCloud PointCloud::torus(int dim, Index mesh, double period) {
  return PointCloud(Topology::Torus, dim, mesh, period);
}

PointCloud PointCloud::interval(Index mesh, double length) {
  return PointCloud(Topology::Interval, 1, mesh, length);
}

std::vector<Index> PointCloud::cell(Index x) const {
  std::vector<Index> c(static_cast<std::size_t>(dim_));
  for (int k = dim_ - 1; k >= 0; --k) {
    c[static_cast<std::size_t>(k)] = x % mesh_;
    x /= mesh_;
  }
  return c;
}

std::vector<double> PointCloud::coordinates(Index x) const {
  const auto c = cell(x);
  std::vector<double> out(c.size());
  const double h = spacing();
  for (std::size_t k = 0; k < c.size(); ++k) {
    out[k] = topology_ == Topology::Torus ? h * static_cast<double>(c[k])
                                          : h * (static_cast<double>(c[k]) + 0.5);
  }
  return out;
}

std::vector<Index> PointCloud::offsets(Index x, Index y) const {
  const auto cx = cell(x);
  const auto cy = cell(y);
  std::vector<Index> out(cx.size());
  for (std::size_t k = 0; k < cx.size(); ++k) {
    const Index d = cx[k] > cy[k] ? cx[k] - cy[k] : cy[k] - cx[k];
    out[k] = topology_ == Topology::Torus ? std::min(d, mesh_ - d) : d;
  }
  return out;
}

double PointCloud::distance(Index x, Index y) const {
  const double h = spacing();
  double s = 0.0;
  for (const Index o : offsets(x, y)) {
    const double r = h * static_cast<double>(o);
    s += r * r;
  }
  return std::sqrt(s);
}

Index PointCloud::max_offset() const noexcept {
  return topology_ == Topology::Torus ? mesh_ / 2 : mesh_ - 1;
}

// ---------------------------------------------------------------------------
// KernelModel

KernelModel KernelModel::gaussian(PointCloud space) {
  KernelModel k;
  k.family_ = KernelFamily::Gaussian;
  const int n = space.dim();
  k.space_ = std::make_shared<const PointCloud>(std::move(space));
  k.beta_ = 2.0;
  k.bound_.alpha = n;
  k.bound_.beta = 2.0;
  const double c = std::pow(4.0 * kPi, -n / 2.0);
  k.bound_.phi = [c](double s) { return c * std::exp(-s * s / 4.0); };
  k.bound_.formula = "(4 pi)^(-N/2) exp(-s^2/4)";
  return k;
}

KernelModel KernelModel::fractional_stable(PointCloud space, double beta) {
  if (!(beta >= 0.5 && beta < 2.0)) {
    throw DomainError("fractional stable kernel: beta must lie in [0.5, 2)");
  }
  KernelModel k;
  k.family_ = KernelFamily::FractionalStable;
  const int n = space.dim();
  k.space_ = std::make_shared<const PointCloud>(std::move(space));
  k.beta_ = beta;
  k.profile_ = std::make_shared<const StableProfile>(n, beta);
  k.images_ = k.space_->topology() == PointCloud::Topology::Torus ? kStableImages : 0;
  const double c = 0.99 * k.profile_->lower_bound_constant();
  const double power = -(n + beta) / 2.0;
  k.bound_.alpha = n;
  k.bound_.beta = beta;
  k.bound_.phi = [c, power](double s) { return c * std::pow(1.0 + s * s, power); };
  k.bound_.formula = "c (1 + s^2)^(-(N+beta)/2), c = " + std::to_string(c);
  return k;
}

KernelModel KernelModel::with_mass_scale(double scale) const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("kernel: mass scale must be positive");
  }
  KernelModel k = *this;
  k.mass_scale_ = scale;
  return k;
}

KernelModel KernelModel::with_lower_bound(LowerBound bound) const {
  if (!(bound.alpha > 0.0) || !(bound.beta > 0.0)) {
    throw DomainError("kernel lower bound: alpha and beta must be positive");
  }
  KernelModel k = *this;
  k.bound_ = std::move(bound);
  return k;
}

std::string KernelModel::name() const {
  std::string s = family_ == KernelFamily::Gaussian ? "gaussian" : "stable(beta=" + std::to_string(beta_) + ")";
  s += "/dim=" + std::to_string(space_->dim());
  if (mass_scale_ != 1.0) {
    s += "/mass_scale=" + std::to_string(mass_scale_);
  }
  return s;
}

double KernelModel::free_space(double t, double r) const {
  const double n = space_->dim();
  if (family_ == KernelFamily::Gaussian) {
    return std::pow(4.0 * kPi * t, -n / 2.0) * std::exp(-r * r / (4.0 * t));
  }
  const double scale = std::pow(t, -1.0 / beta_);
  return std::pow(scale, n) * (*profile_)(r * scale);
}

double KernelModel::kernel(double t, const std::vector<Index>& offsets) const {
  check_time(t);
  const double h = space_->spacing();
  const double period = space_->extent();
  const bool torus = space_->topology() == PointCloud::Topology::Torus;

  if (family_ == KernelFamily::Gaussian) {
    // Factorizes over axes; periodize each factor until the images vanish.
    const double c = 1.0 / std::sqrt(4.0 * kPi * t);
    const int images = torus ? 1 + static_cast<int>(std::ceil(std::sqrt(3000.0 * t) / period)) : 0;
    double p = 1.0;
    for (const Index o : offsets) {
      const double r = h * static_cast<double>(o);
      double s = 0.0;
      for (int k = -images; k <= images; ++k) {
        const double d = r + k * period;
        s += std::exp(-d * d / (4.0 * t));
      }
      p *= c * s;
    }
    return mass_scale_ * p;
  }

  const int n = space_->dim();
  if (images_ == 0) {
    double s = 0.0;
    for (const Index o : offsets) {
      const double r = h * static_cast<double>(o);
      s += r * r;
    }
    return mass_scale_ * free_space(t, std::sqrt(s));
  }
  const int width = 2 * images_ + 1;
  const int total = static_cast<int>(ipow(static_cast<Index>(width), n));
  double p = 0.0;
  for (int code = 0; code < total; ++code) {
    int rest = code;
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      const int shift = rest % width - images_;
      rest /= width;
      const double d = h * static_cast<double>(offsets[static_cast<std::size_t>(k)]) + shift * period;
      s += d * d;
    }
    p += free_space(t, std::sqrt(s));
  }
  return mass_scale_ * p;
}

Index KernelModel::table_index(const std::vector<Index>& offsets) const {
  const Index base = space_->max_offset() + 1;
  Index idx = 0;
  for (const Index o : offsets) {
    idx = idx * base + o;
  }
  return idx;
}

std::vector<double> KernelModel::table(double t) const {
  check_time(t);
  const int n = space_->dim();
  const Index base = space_->max_offset() + 1;
  const Index total = ipow(base, n);
  std::vector<double> out(total);
  std::vector<Index> off(static_cast<std::size_t>(n));
  for (Index idx = 0; idx < total; ++idx) {
    Index rest = idx;
    for (int k = n - 1; k >= 0; --k) {
      off[static_cast<std::size_t>(k)] = rest % base;
      rest /= base;
    }
    out[idx] = kernel(t, off);
  }
  return out;
}

// ---------------------------------------------------------------------------
// KernelSemigroup

KernelSemigroup::KernelSemigroup(KernelModel model) : model_(std::move(model)) {
  const auto& space = model_.space();
  cells_.reserve(space.size());
  for (Index x = 0; x < space.size(); ++x) {
    cells_.push_back(space.cell(x));
  }
}

Vector KernelSemigroup::apply(double t, const Vector& phi) const {
  if (!(t >= 0.0)) {
    throw DomainError("kernel semigroup: negative time");
  }
  const auto n = static_cast<Eigen::Index>(size());
  if (phi.size() != n) {
    throw DomainError("kernel semigroup: vector size does not match the point cloud");
  }
  if (t == 0.0) {
    return phi;
  }
  const auto& space = model_.space();
  const auto tab = model_.table(t);
  const Vector weighted = phi.cwiseProduct(space.measure());
  const Index mesh = space.mesh();
  const Index base = space.max_offset() + 1;
  const bool torus = space.topology() == PointCloud::Topology::Torus;
  const auto dim = static_cast<std::size_t>(space.dim());

  Vector out(n);
  for (Eigen::Index x = 0; x < n; ++x) {
    const auto& cx = cells_[static_cast<std::size_t>(x)];
    double s = 0.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      const auto& cy = cells_[static_cast<std::size_t>(y)];
      Index idx = 0;
      for (std::size_t k = 0; k < dim; ++k) {
        Index d = cx[k] > cy[k] ? cx[k] - cy[k] : cy[k] - cx[k];
        if (torus) {
          d = std::min(d, mesh - d);
        }
        idx = idx * base + d;
      }
      s += tab[idx] * weighted[y];
    }
    out[x] = s;
  }
  return out;
}

Vector KernelSemigroup::apply_reference(double t, const Vector& phi) const {
  if (!(t >= 0.0)) {
    throw DomainError("kernel semigroup: negative time");
  }
  const auto n = static_cast<Eigen::Index>(size());
  if (phi.size() != n) {
    throw DomainError("kernel semigroup: vector size does not match the point cloud");
  }
  if (t == 0.0) {
    return phi;
  }
  const Vector& m = measure();
  Vector out = Vector::Zero(n);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      out[x] += model_.density(t, static_cast<Index>(x), static_cast<Index>(y)) * phi[y] * m[y];
    }
  }
  return out;
}

std::shared_ptr<KernelSemigroup> semigroup_from_kernel(const KernelModel& k) {
  return std::make_shared<KernelSemigroup>(k);
}

std::vector<Index> spread_samples(Index n, Index count) {
  std::vector<Index> out;
  if (n == 0 || count == 0) {
    return out;
  }
  if (count >= n) {
    for (Index i = 0; i < n; ++i) {
      out.push_back(i);
    }
    return out;
  }
  for (Index i = 0; i < count; ++i) {
    out.push_back(i * n / count);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validators

AxiomReport validate_axioms(const KernelModel& k, const std::vector<double>& t_grid,
                            const std::vector<Index>& sample_points, const AxiomOptions& options) {
  if (t_grid.empty() || sample_points.empty()) {
    throw DomainError("validate_axioms: time grid and sample points must be nonempty");
  }
  const auto& space = k.space();
  const Index n = space.size();
  for (const Index x : sample_points) {
    if (x >= n) {
      throw DomainError("validate_axioms: sample point out of range");
    }
  }
  const Vector& m = space.measure();

  AxiomReport report;
  report.tolerance = options.tolerance;
  report.p1.axiom = "p1 mass";
  report.p2.axiom = "p2 symmetry";
  report.p3.axiom = "p3 chapman-kolmogorov";
  report.p4.axiom = "p4 strong continuity";

  const auto index = [&](Index x, Index y) { return k.table_index(space.offsets(x, y)); };
  const auto record = [](AxiomResult& r, double value, double t, Index x, Index y) {
    if (value > r.residual) {
      r.residual = value;
      r.t = t;
      r.x = x;
      r.y = y;
    }
  };

  // (p1) and (p2).
  for (const double t : t_grid) {
    const auto tab = k.table(t);
    for (const Index x : sample_points) {
      long double mass = 0.0L;
      for (Index y = 0; y < n; ++y) {
        mass += tab[index(x, y)] * m[static_cast<Eigen::Index>(y)];
        const double asym = std::abs(k.kernel(t, space.offsets(x, y)) - k.kernel(t, space.offsets(y, x)));
        record(report.p2, asym, t, x, y);
      }
      record(report.p1, std::max(static_cast<double>(mass) - 1.0, 0.0), t, x, x);
    }
  }

  // (p3) on pairs from a thinned grid; each pair costs O(n^2) per sample.
  std::vector<double> times = t_grid;
  std::sort(times.begin(), times.end());
  if (times.size() > 6) {
    std::vector<double> thin;
    for (std::size_t i = 0; i < 6; ++i) {
      thin.push_back(times[i * (times.size() - 1) / 5]);
    }
    times = thin;
  }
  const std::vector<Index> p3_points(sample_points.begin(),
                                     sample_points.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(4, sample_points.size())));
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t j = i; j < times.size(); ++j) {
      const double t = times[i];
      const double s = times[j];
      const auto tab_t = k.table(t);
      const auto tab_s = k.table(s);
      const auto tab_ts = k.table(t + s);
      for (const Index x : p3_points) {
        std::vector<double> row(n);
        for (Index z = 0; z < n; ++z) {
          row[z] = tab_t[index(x, z)] * m[static_cast<Eigen::Index>(z)];
        }
        for (Index y = 0; y < n; ++y) {
          long double conv = 0.0L;
          for (Index z = 0; z < n; ++z) {
            conv += row[z] * tab_s[index(z, y)];
          }
          record(report.p3, std::abs(static_cast<double>(conv) - tab_ts[index(x, y)]), t, x, y);
        }
      }
    }
  }

  // (p4) relative L^p distance at the smallest t for Gaussian bumps.
  const double t_min = times.front();
  const double width = options.bump_width > 0.0 ? options.bump_width : space.extent() / 8.0;
  const KernelSemigroup S(k);
  const auto norm = [&](const Vector& v) {
    long double acc = 0.0L;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      acc += std::pow(std::abs(v[i]), options.p) * m[i];
    }
    return std::pow(static_cast<double>(acc), 1.0 / options.p);
  };
  for (std::size_t b = 0; b < std::min<std::size_t>(3, sample_points.size()); ++b) {
    const Index c = sample_points[b];
    Vector phi(static_cast<Eigen::Index>(n));
    for (Index y = 0; y < n; ++y) {
      const double d = space.distance(c, y);
      phi[static_cast<Eigen::Index>(y)] = std::exp(-d * d / (2.0 * width * width));
    }
    const Vector moved = S.apply(t_min, phi);
    record(report.p4, norm(moved - phi) / norm(phi), t_min, c, c);
  }

  for (AxiomResult* r : {&report.p1, &report.p2, &report.p3, &report.p4}) {
    r->passed = r->residual <= options.tolerance;
  }
  return report;
}

LowerBoundReport lower_bound_check(const KernelModel& k, const std::vector<double>& t_grid,
                                   const std::vector<std::pair<Index, Index>>& pairs) {
  LowerBoundReport report;
  report.slack = std::numeric_limits<double>::infinity();
  const auto& bound = k.lower_bound();
  const Index n = k.space().size();
  for (const double t : t_grid) {
    check_time(t);
    const double prefactor = std::pow(t, -bound.alpha / bound.beta);
    const double scale = std::pow(t, -1.0 / bound.beta);
    for (const auto& [x, y] : pairs) {
      if (x >= n || y >= n) {
        throw DomainError("lower_bound_check: point out of range");
      }
      const double phi = bound.phi ? bound.phi(k.space().distance(x, y) * scale) : 0.0;
      const double slack = k.density(t, x, y) - prefactor * phi;
      if (slack < report.slack) {
        report.slack = slack;
        report.t = t;
        report.x = x;
        report.y = y;
      }
    }
  }
  report.passed = report.slack >= -LowerBoundReport::kTolerance;
  return report;
}

}  // namespace osgood
