#include "osgood/stable_density.hpp"

#include "osgood/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace osgood {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Cancellation allowed in series: max |term| / |sum|.
constexpr long double kMaxCancellation = 1e5L;

double hermite(double x0, double x1, double y0, double y1, double d0, double d1, double x) {
  const double h = x1 - x0;
  const double s = (x - x0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * h * d1;
}

}  // namespace

StableDensity::StableDensity(int dim, double beta) : dim_(dim), beta_(beta) {
  if (dim < 1) {
    throw DomainError("stable density: dimension must be at least 1");
  }
  if (!(beta >= 0.5 && beta <= 2.0)) {
    throw DomainError("stable density: beta must lie in [0.5, 2] (got " + std::to_string(beta) + ")");
  }
  const double N = dim;
  const double c = 2.0 / (std::pow(2.0, N) * std::pow(kPi, N / 2) * beta);
  origin_ = c * std::exp(std::lgamma(N / beta) - std::lgamma(N / 2));
  tail_constant_ = beta == 2.0 ? 0.0
                               : std::pow(2.0, beta) * std::tgamma((beta + N) / 2) *
                                     std::tgamma(beta / 2 + 1) * std::sin(kPi * beta / 2) /
                                     std::pow(kPi, N / 2 + 1);
}

double StableDensity::small_series(double rho) const {
  if (rho == 0.0) {
    return origin_;
  }
  const double N = dim_;
  const long double c = 2.0L / (std::pow(2.0L, N) * std::pow(static_cast<long double>(kPi), N / 2) * beta_);
  const long double log_rho = std::log(static_cast<long double>(rho));
  long double sum = 0.0L;
  long double max_abs = 0.0L;
  long double prev = std::numeric_limits<long double>::infinity();
  for (int n = 0; n < 2000; ++n) {
    const long double log_term = std::lgamma(static_cast<long double>((2.0 * n + N) / beta_)) -
                                 n * std::log(4.0L) - std::lgamma(static_cast<long double>(n + 1)) -
                                 std::lgamma(static_cast<long double>(n + N / 2)) + 2 * n * log_rho;
    if (log_term > 700.0L) {
      return kNaN;
    }
    const long double mag = std::exp(log_term);
    sum += (n % 2 == 0 ? mag : -mag);
    max_abs = std::max(max_abs, mag);
    if (n > 0 && mag < prev && mag <= 1e-19L * std::abs(sum)) {
      if (sum <= 0.0L || max_abs > kMaxCancellation * std::abs(sum)) {
        return kNaN;
      }
      return static_cast<double>(c * sum);
    }
    prev = mag;
  }
  return kNaN;
}

double StableDensity::large_series(double rho) const {
  if (!(rho > 0.0) || beta_ == 2.0) {
    return kNaN;
  }
  const double N = dim_;
  const long double log_rho = std::log(static_cast<long double>(rho));
  long double sum = 0.0L;
  long double max_abs = 0.0L;
  long double prev = std::numeric_limits<long double>::infinity();
  const bool asymptotic = beta_ >= 1.0;
  for (int n = 1; n < 2000; ++n) {
    const long double nb = static_cast<long double>(n) * beta_;
    const long double log_mag = nb * std::log(2.0L) - std::lgamma(static_cast<long double>(n + 1)) +
                                std::lgamma((nb + N) / 2) + std::lgamma(nb / 2 + 1) -
                                (nb + N) * log_rho;
    if (log_mag > 700.0L) {
      return kNaN;
    }
    const long double mag = std::exp(log_mag);
    if (asymptotic && mag > prev) {
      // Optimal truncation: the smallest term bounds the remainder.
      if (prev > 1e-13L * std::abs(sum) || sum <= 0.0L ||
          max_abs > kMaxCancellation * std::abs(sum)) {
        return kNaN;
      }
      return static_cast<double>(sum / std::pow(static_cast<long double>(kPi), N / 2 + 1));
    }
    const long double term = (n % 2 == 1 ? 1.0L : -1.0L) * std::sin(static_cast<long double>(kPi) * nb / 2) * mag;
    sum += term;
    max_abs = std::max(max_abs, mag);
    if (mag < prev && mag <= 1e-19L * std::abs(sum)) {
      if (sum <= 0.0L || max_abs > kMaxCancellation * std::abs(sum)) {
        return kNaN;
      }
      return static_cast<double>(sum / std::pow(static_cast<long double>(kPi), N / 2 + 1));
    }
    prev = mag;
  }
  return kNaN;
}

double StableDensity::quadrature(double rho) const {
  if (rho == 0.0) {
    return origin_;
  }
  using boost::math::quadrature::gauss_kronrod;
  const double k_max = std::pow(46.0, 1.0 / beta_);
  const double width = std::min(kPi / rho, k_max / 16.0);
  const auto panels = static_cast<long>(std::ceil(k_max / width));
  if (panels > 2'000'000) {
    throw DomainError("stable density quadrature: rho too large for panel integration");
  }
  const double nu = dim_ / 2.0 - 1.0;
  const auto integrand = [&](double k) -> double {
    const double decay = std::exp(-std::pow(k, beta_));
    if (dim_ == 1) {
      return decay * std::cos(k * rho);
    }
    return decay * std::pow(k, dim_ / 2.0) * std::cyl_bessel_j(nu, k * rho);
  };
  // The first panel carries the k^beta cusp and the bulk of the mass; the
  // remaining panels hold at most half an oscillation each.
  long double total = gauss_kronrod<double, 61>::integrate(integrand, 0.0, std::min(k_max, width), 15, 1e-13);
  for (long i = 1; i < panels; ++i) {
    const double a = static_cast<double>(i) * width;
    const double b = std::min(k_max, a + width);
    total += gauss_kronrod<double, 61>::integrate(integrand, a, b, 0);
  }
  if (dim_ == 1) {
    return static_cast<double>(total / kPi);
  }
  return static_cast<double>(total) * std::pow(2.0 * kPi, -dim_ / 2.0) * std::pow(rho, 1.0 - dim_ / 2.0);
}

double StableDensity::evaluate(double rho, Method* used) const {
  if (!(rho >= 0.0)) {
    throw DomainError("stable density: negative radius");
  }
  const auto report = [used](Method m) {
    if (used != nullptr) {
      *used = m;
    }
  };
  if (rho == 0.0) {
    report(Method::Origin);
    return origin_;
  }
  if (beta_ == 2.0) {
    // The Gaussian: every series route cancels catastrophically in the tail.
    report(Method::Closed);
    return std::pow(4.0 * kPi, -dim_ / 2.0) * std::exp(-rho * rho / 4.0);
  }
  if (const double v = small_series(rho); std::isfinite(v)) {
    report(Method::SmallSeries);
    return v;
  }
  if (const double v = large_series(rho); std::isfinite(v)) {
    report(Method::LargeSeries);
    return v;
  }
  report(Method::Quadrature);
  return quadrature(rho);
}

// ---------------------------------------------------------------------------

StableProfile::StableProfile(int dim, double beta) : exact_(dim, beta) {
  // g_N'(rho) = -2 pi rho g_{N+2}(rho) gives exact node slopes in log-log form.
  const StableDensity raised(dim + 2, beta);
  rho_min_ = 1e-3;
  rho_max_ = 1e4;
  constexpr int kPerDecade = 120;
  const int nodes = 7 * kPerDecade + 1;
  log_rho_.resize(nodes);
  log_g_.resize(nodes);
  slope_.resize(nodes);
  const double lo = std::log(rho_min_);
  const double hi = std::log(rho_max_);
  for (int i = 0; i < nodes; ++i) {
    const double lr = lo + (hi - lo) * i / (nodes - 1);
    const double rho = std::exp(lr);
    const double g = exact_(rho);
    log_rho_[i] = lr;
    log_g_[i] = std::log(g);
    slope_[i] = -2.0 * std::numbers::pi * rho * rho * raised(rho) / g;
  }
}

double StableProfile::operator()(double rho) const {
  if (!(rho >= 0.0)) {
    throw DomainError("stable profile: negative radius");
  }
  if (exact_.beta() == 2.0) {
    return exact_(rho);
  }
  if (rho < rho_min_) {
    const double g0 = exact_.at_origin();
    const double g_min = std::exp(log_g_.front());
    const double s = rho / rho_min_;
    return g0 + (g_min - g0) * s * s;
  }
  if (rho >= rho_max_) {
    const double v = exact_.large_series(rho);
    return std::isfinite(v) ? v : exact_(rho);
  }
  const double lr = std::log(rho);
  const double step = log_rho_[1] - log_rho_[0];
  auto i = static_cast<std::size_t>((lr - log_rho_.front()) / step);
  i = std::min(i, log_rho_.size() - 2);
  return std::exp(hermite(log_rho_[i], log_rho_[i + 1], log_g_[i], log_g_[i + 1], slope_[i],
                          slope_[i + 1], lr));
}

double StableProfile::lower_bound_constant() const {
  const double N = exact_.dim();
  const double beta = exact_.beta();
  const double power = (N + beta) / 2.0;
  double best = exact_.at_origin();
  for (std::size_t i = 0; i < log_rho_.size(); ++i) {
    const double rho = std::exp(log_rho_[i]);
    best = std::min(best, std::exp(log_g_[i]) * std::pow(1.0 + rho * rho, power));
  }
  if (exact_.tail_constant() > 0.0) {
    best = std::min(best, exact_.tail_constant());
  }
  return best;
}

}  // namespace osgood
