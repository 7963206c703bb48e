#pragma once

#include <vector>

namespace osgood {

/// Radial profile g of the rotationally invariant beta-stable density on R^N,
/// i.e. the inverse Fourier transform of exp(-|xi|^beta):
///
///   p_t(x) = t^{-N/beta} g(|x| t^{-1/beta}).
///
/// beta = 1 gives the Poisson (Cauchy) kernel and beta = 2 the Gaussian
/// (4 pi)^{-N/2} exp(-rho^2 / 4); both have closed forms used in tests.
class StableDensity {
 public:
  enum class Method { Origin, Closed, SmallSeries, LargeSeries, Quadrature };

  /// beta must lie in [0.5, 2]; smaller indices concentrate mass at scales
  /// the series and quadrature routes cannot resolve in double precision.
  StableDensity(int dim, double beta);

  /// Direct evaluation, picking the first method that converges without
  /// significant cancellation. Relative accuracy is about 1e-10.
  double operator()(double rho) const { return evaluate(rho); }
  double evaluate(double rho, Method* used = nullptr) const;

  double at_origin() const noexcept { return origin_; }
  /// A in g(rho) ~ A rho^{-(N+beta)} as rho -> inf (zero for beta = 2).
  double tail_constant() const noexcept { return tail_constant_; }

  /// Individual routes, exposed for cross-validation. Series return NaN when
  /// they fail to converge cleanly at rho.
  double small_series(double rho) const;
  double large_series(double rho) const;
  double quadrature(double rho) const;

  int dim() const noexcept { return dim_; }
  double beta() const noexcept { return beta_; }

 private:
  int dim_;
  double beta_;
  double origin_;
  double tail_constant_;
};

/// Interpolated stable profile: cubic Hermite interpolation of log g against
/// log rho on a fixed grid (120 nodes per decade on [1e-3, 1e4]) with exact
/// node slopes, a quadratic model near the origin and the large-radius series
/// beyond the grid. Relative
/// accuracy against StableDensity is better than 1e-6 (checked in tests).
class StableProfile {
 public:
  StableProfile(int dim, double beta);

  double operator()(double rho) const;

  const StableDensity& exact() const noexcept { return exact_; }
  /// min over rho of g(rho) (1 + rho^2)^{(N+beta)/2}: the largest constant c
  /// for which c (1 + rho^2)^{-(N+beta)/2} is a lower bound of g.
  double lower_bound_constant() const;

 private:
  StableDensity exact_;
  double rho_min_;
  double rho_max_;
  std::vector<double> log_rho_;
  std::vector<double> log_g_;
  std::vector<double> slope_;
};

}  // namespace osgood
