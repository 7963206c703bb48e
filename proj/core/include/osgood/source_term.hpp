#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace osgood {

/// Bound F(1/t) <= kappa * t^gamma for large t.
struct OsgoodAsymptotics {
  double kappa;
  double gamma;
};

/// f(t) = t^(1 + alpha).
struct PowerSource {
  double alpha;
};

/// f(t) = e^t - 1.
struct ExpMinusOneSource {};

/// f(t) = t^2 / e^(1/t), continuously extended by f(0) = 0.
struct PowerOverExpSource {};

/// Sampled f with piecewise-linear interpolation through (0, 0) and the
/// samples, extended past the last sample by the power law matching the last
/// segment's log-log slope.
class TabulatedSource {
 public:
  TabulatedSource(std::vector<double> t, std::vector<double> f);

  double eval(double t) const;
  double right_derivative(double t) const;
  /// Integral of 1/f over [t, inf), exact for the interpolant.
  double tail_integral(double t) const;

  const std::vector<double>& knots() const noexcept { return t_; }
  const std::vector<double>& values() const noexcept { return f_; }
  double tail_exponent() const noexcept { return tail_exponent_; }

 private:
  std::size_t segment(double t) const;

  std::vector<double> t_;  // knots, t_[0] == 0
  std::vector<double> f_;
  std::vector<double> suffix_;  // integral of 1/f over [t_[i], inf), i >= 1
  double tail_exponent_ = 0.0;
};

enum class SourceKind { Power, ExpMinusOne, PowerOverExp, Tabulated };

/// Reaction term f: convex, continuous, f(0) = 0, positive on (0, inf) and
/// with integrable 1/f at infinity. Validated on construction.
class SourceTerm {
 public:
  static SourceTerm power(double alpha);
  static SourceTerm exp_minus_one();
  static SourceTerm power_over_exp();
  static SourceTerm tabulated(std::vector<double> t, std::vector<double> f);

  SourceTerm with_asymptotics(OsgoodAsymptotics a) const;

  double operator()(double t) const;
  double derivative(double t) const;

  SourceKind kind() const noexcept;
  std::string name() const;
  /// Declared or known (kappa, gamma). Power(alpha) knows (1/alpha, alpha).
  std::optional<OsgoodAsymptotics> asymptotics() const;

  const PowerSource* as_power() const noexcept { return std::get_if<PowerSource>(&family_); }
  const TabulatedSource* as_tabulated() const noexcept;

 private:
  using Family = std::variant<PowerSource, ExpMinusOneSource, PowerOverExpSource,
                              std::shared_ptr<const TabulatedSource>>;
  explicit SourceTerm(Family family) : family_(std::move(family)) {}

  Family family_;
  std::optional<OsgoodAsymptotics> asymptotics_;
};

/// F(t) = integral of 1/f over [t, inf) and its inverse. F maps (0, inf)
/// onto (0, inf) and is strictly decreasing with F' = -1/f.
class OsgoodFunctional {
 public:
  explicit OsgoodFunctional(SourceTerm f, double rel_tol = 1e-10);

  double operator()(double t) const;
  double inverse(double y) const;
  /// Bracketing bisection refined by Newton; ignores any closed form.
  double inverse_numeric(double y) const;
  double derivative(double t) const;

  const SourceTerm& source() const noexcept { return f_; }
  double tolerance() const noexcept { return rel_tol_; }

 private:
  SourceTerm f_;
  double rel_tol_;
};

struct AsymptoticsReport {
  double kappa = 0.0;
  double gamma = 0.0;
  bool holds_everywhere = true;
  /// Largest grid point with F(1/t) > kappa t^gamma.
  std::optional<double> last_violation;
  /// max over the grid of F(1/t) / (kappa t^gamma).
  double worst_ratio = 0.0;

  /// F is only known to its quadrature tolerance; equality cases like
  /// F(1/t) = t/alpha must not register as violations.
  static constexpr double kRelativeTolerance = 1e-10;
};

AsymptoticsReport check_asymptotics(const OsgoodFunctional& F, double kappa, double gamma,
                                    std::span<const double> t_grid);

}  // namespace osgood
