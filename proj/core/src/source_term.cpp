#include "osgood/source_term.hpp"

#include "osgood/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <tuple>

namespace osgood {
namespace {

void require_nonnegative(double t) {
  if (!(t >= 0.0)) {
    throw DomainError("source term evaluated at negative or NaN argument " + std::to_string(t));
  }
}

// log(1 - e^{-x}) for x > 0 without cancellation.
double log1mexp(double x) {
  return x <= std::numbers::ln2 ? std::log(-std::expm1(-x)) : std::log1p(-std::exp(-x));
}

// log1p(x) / x, continuous at 0.
double log1p_ratio(double x) {
  return std::abs(x) < 1e-12 ? 1.0 - 0.5 * x : std::log1p(x) / x;
}

}  // namespace

// ---------------------------------------------------------------------------
// TabulatedSource

TabulatedSource::TabulatedSource(std::vector<double> t, std::vector<double> f) {
  if (t.size() != f.size()) {
    throw InvalidSourceError("tabulated source: t and f have different lengths");
  }
  if (t.empty()) {
    throw InvalidSourceError("tabulated source: no samples");
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(f[i])) {
      throw InvalidSourceError("tabulated source: non-finite sample at index " + std::to_string(i));
    }
  }
  if (t.front() < 0.0) {
    throw InvalidSourceError("tabulated source: negative abscissa");
  }
  if (t.front() == 0.0) {
    if (f.front() != 0.0) {
      throw InvalidSourceError("tabulated source: f(0) must be 0");
    }
  } else {
    t.insert(t.begin(), 0.0);
    f.insert(f.begin(), 0.0);
  }
  if (t.size() < 3) {
    throw InvalidSourceError("tabulated source: need at least two samples with t > 0");
  }
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) {
      throw InvalidSourceError("tabulated source: t must be strictly increasing (index " +
                               std::to_string(i) + ")");
    }
    if (!(f[i] > f[i - 1])) {
      throw InvalidSourceError("tabulated source: f must be strictly increasing and positive (index " +
                               std::to_string(i) + ")");
    }
  }
  // Convexity: secant slopes nondecreasing, up to relative rounding slack.
  double prev_slope = (f[1] - f[0]) / (t[1] - t[0]);
  for (std::size_t i = 2; i < t.size(); ++i) {
    const double slope = (f[i] - f[i - 1]) / (t[i] - t[i - 1]);
    if (slope < prev_slope * (1.0 - 1e-9)) {
      throw InvalidSourceError("tabulated source: not convex at t = " + std::to_string(t[i - 1]));
    }
    prev_slope = slope;
  }

  const std::size_t n = t.size() - 1;
  tail_exponent_ = std::log(f[n] / f[n - 1]) / std::log(t[n] / t[n - 1]);
  if (!(tail_exponent_ > 1.0)) {
    throw NonOsgoodError("tabulated source: last segment grows like t^" +
                         std::to_string(tail_exponent_) +
                         ", so the integral of 1/f over [1, inf) diverges");
  }

  t_ = std::move(t);
  f_ = std::move(f);
  suffix_.assign(t_.size(), 0.0);
  suffix_[n] = t_[n] / ((tail_exponent_ - 1.0) * f_[n]);
  for (std::size_t i = n - 1; i >= 1; --i) {
    const double df = f_[i + 1] - f_[i];
    suffix_[i] = suffix_[i + 1] + (t_[i + 1] - t_[i]) / f_[i] * log1p_ratio(df / f_[i]);
  }
}

std::size_t TabulatedSource::segment(double t) const {
  // Index i with t_[i] <= t < t_[i+1]; last index when t >= t_.back().
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  return static_cast<std::size_t>(std::distance(t_.begin(), it)) - 1;
}

double TabulatedSource::eval(double t) const {
  require_nonnegative(t);
  const std::size_t i = segment(t);
  const std::size_t n = t_.size() - 1;
  if (i >= n) {
    return f_[n] * std::pow(t / t_[n], tail_exponent_);
  }
  const double slope = (f_[i + 1] - f_[i]) / (t_[i + 1] - t_[i]);
  return f_[i] + slope * (t - t_[i]);
}

double TabulatedSource::right_derivative(double t) const {
  require_nonnegative(t);
  const std::size_t i = segment(t);
  const std::size_t n = t_.size() - 1;
  if (i >= n) {
    return tail_exponent_ * eval(t) / t;
  }
  return (f_[i + 1] - f_[i]) / (t_[i + 1] - t_[i]);
}

double TabulatedSource::tail_integral(double t) const {
  const std::size_t i = segment(t);
  const std::size_t n = t_.size() - 1;
  if (i >= n) {
    return t / ((tail_exponent_ - 1.0) * eval(t));
  }
  if (i == 0) {
    const double slope = f_[1] / t_[1];
    return std::log(t_[1] / t) / slope + suffix_[1];
  }
  const double ft = eval(t);
  const double df = f_[i + 1] - ft;
  return suffix_[i + 1] + (t_[i + 1] - t) / ft * log1p_ratio(df / ft);
}

// ---------------------------------------------------------------------------
// SourceTerm

SourceTerm SourceTerm::power(double alpha) {
  if (!std::isfinite(alpha)) {
    throw InvalidSourceError("power source: alpha must be finite");
  }
  if (alpha <= 0.0) {
    throw NonOsgoodError("power source t^(1+alpha) needs alpha > 0 (got " + std::to_string(alpha) +
                         "); for alpha <= 0 the integral of 1/f over [1, inf) diverges");
  }
  return SourceTerm(PowerSource{alpha});
}

SourceTerm SourceTerm::exp_minus_one() { return SourceTerm(ExpMinusOneSource{}); }

SourceTerm SourceTerm::power_over_exp() { return SourceTerm(PowerOverExpSource{}); }

SourceTerm SourceTerm::tabulated(std::vector<double> t, std::vector<double> f) {
  return SourceTerm(std::make_shared<const TabulatedSource>(std::move(t), std::move(f)));
}

SourceTerm SourceTerm::with_asymptotics(OsgoodAsymptotics a) const {
  if (!(a.kappa > 0.0) || !(a.gamma > 0.0)) {
    throw DomainError("asymptotic descriptor needs kappa > 0 and gamma > 0");
  }
  SourceTerm copy = *this;
  copy.asymptotics_ = a;
  return copy;
}

const TabulatedSource* SourceTerm::as_tabulated() const noexcept {
  const auto* p = std::get_if<std::shared_ptr<const TabulatedSource>>(&family_);
  return p ? p->get() : nullptr;
}

double SourceTerm::operator()(double t) const {
  require_nonnegative(t);
  return std::visit(
      [t](const auto& fam) -> double {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, PowerSource>) {
          return std::pow(t, 1.0 + fam.alpha);
        } else if constexpr (std::is_same_v<T, ExpMinusOneSource>) {
          return std::expm1(t);
        } else if constexpr (std::is_same_v<T, PowerOverExpSource>) {
          return t == 0.0 ? 0.0 : t * t * std::exp(-1.0 / t);
        } else {
          return fam->eval(t);
        }
      },
      family_);
}

double SourceTerm::derivative(double t) const {
  require_nonnegative(t);
  return std::visit(
      [t](const auto& fam) -> double {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, PowerSource>) {
          return (1.0 + fam.alpha) * std::pow(t, fam.alpha);
        } else if constexpr (std::is_same_v<T, ExpMinusOneSource>) {
          return std::exp(t);
        } else if constexpr (std::is_same_v<T, PowerOverExpSource>) {
          return t == 0.0 ? 0.0 : (2.0 * t + 1.0) * std::exp(-1.0 / t);
        } else {
          return fam->right_derivative(t);
        }
      },
      family_);
}

SourceKind SourceTerm::kind() const noexcept {
  switch (family_.index()) {
    case 0: return SourceKind::Power;
    case 1: return SourceKind::ExpMinusOne;
    case 2: return SourceKind::PowerOverExp;
    default: return SourceKind::Tabulated;
  }
}

std::string SourceTerm::name() const {
  switch (kind()) {
    case SourceKind::Power: return "power(alpha=" + std::to_string(as_power()->alpha) + ")";
    case SourceKind::ExpMinusOne: return "exp_minus_one";
    case SourceKind::PowerOverExp: return "power_over_exp";
    case SourceKind::Tabulated: break;
  }
  return "tabulated(" + std::to_string(as_tabulated()->knots().size()) + " knots)";
}

std::optional<OsgoodAsymptotics> SourceTerm::asymptotics() const {
  if (asymptotics_) {
    return asymptotics_;
  }
  if (const auto* p = as_power()) {
    return OsgoodAsymptotics{1.0 / p->alpha, p->alpha};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// OsgoodFunctional

OsgoodFunctional::OsgoodFunctional(SourceTerm f, double rel_tol)
    : f_(std::move(f)), rel_tol_(rel_tol) {
  if (!(rel_tol > 0.0)) {
    throw DomainError("Osgood functional tolerance must be positive");
  }
}

double OsgoodFunctional::operator()(double t) const {
  if (!(t > 0.0)) {
    throw DomainError("F(t) needs t > 0 (got " + std::to_string(t) + ")");
  }
  switch (f_.kind()) {
    case SourceKind::Power: {
      const double alpha = f_.as_power()->alpha;
      return 1.0 / (alpha * std::pow(t, alpha));
    }
    case SourceKind::ExpMinusOne:
      return -log1mexp(t);
    case SourceKind::PowerOverExp:
      return std::expm1(1.0 / t);
    case SourceKind::Tabulated:
      break;
  }
  return f_.as_tabulated()->tail_integral(t);
}

double OsgoodFunctional::derivative(double t) const {
  if (!(t > 0.0)) {
    throw DomainError("F'(t) needs t > 0");
  }
  return -1.0 / f_(t);
}

double OsgoodFunctional::inverse(double y) const {
  if (!(y > 0.0)) {
    throw DomainError("F^-1(y) needs y > 0 (got " + std::to_string(y) + ")");
  }
  double x = 0.0;
  switch (f_.kind()) {
    case SourceKind::Power: {
      const double alpha = f_.as_power()->alpha;
      x = std::pow(1.0 / (alpha * y), 1.0 / alpha);
      break;
    }
    case SourceKind::ExpMinusOne:
      // F is an involution for this family.
      x = -log1mexp(y);
      break;
    case SourceKind::PowerOverExp:
      x = 1.0 / std::log1p(y);
      break;
    case SourceKind::Tabulated:
      return inverse_numeric(y);
  }
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("F^-1(" + std::to_string(y) + ") is not representable in double precision");
  }
  return x;
}

double OsgoodFunctional::inverse_numeric(double y) const {
  if (!(y > 0.0)) {
    throw DomainError("F^-1(y) needs y > 0 (got " + std::to_string(y) + ")");
  }
  const auto& F = *this;

  // F is a decreasing bijection, so a bracket exists; expand geometrically.
  double lo = 1.0;
  double hi = 1.0;
  const double f1 = F(1.0);
  if (f1 == y) {
    return 1.0;
  }
  if (f1 > y) {
    while (F(hi) > y) {
      lo = hi;
      hi *= 4.0;
      if (!std::isfinite(hi)) {
        throw DomainError("F^-1: cannot bracket y = " + std::to_string(y) + " (too small)");
      }
    }
  } else {
    while (F(lo) < y) {
      hi = lo;
      lo *= 0.25;
      if (lo < std::numeric_limits<double>::min()) {
        throw DomainError("F^-1: cannot bracket y = " + std::to_string(y) + " (too large)");
      }
    }
  }

  // Bisect in log space until the bracket is tight enough for Newton.
  for (int i = 0; i < 200 && hi / lo > 1.5; ++i) {
    const double mid = std::sqrt(lo * hi);
    (F(mid) > y ? lo : hi) = mid;
  }

  std::uintmax_t max_iter = 200;
  const auto residual = [&](double x) {
    return std::make_tuple(F(x) - y, -1.0 / f_(x));
  };
  double x = boost::math::tools::newton_raphson_iterate(
      residual, std::sqrt(lo * hi), lo, hi, std::numeric_limits<double>::digits - 4, max_iter);

  // A final bisection pass if Newton stalled short of the tolerance.
  for (int i = 0; i < 200 && std::abs(F(x) - y) > 1e-12 * y; ++i) {
    (F(x) > y ? lo : hi) = x;
    x = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      break;
    }
  }
  return x;
}

AsymptoticsReport check_asymptotics(const OsgoodFunctional& F, double kappa, double gamma,
                                    std::span<const double> t_grid) {
  if (t_grid.empty()) {
    throw DomainError("check_asymptotics: empty grid");
  }
  if (!std::is_sorted(t_grid.begin(), t_grid.end()) || !(t_grid.front() > 0.0)) {
    throw DomainError("check_asymptotics: grid must be positive and increasing");
  }
  AsymptoticsReport report;
  report.kappa = kappa;
  report.gamma = gamma;
  for (double t : t_grid) {
    const double lhs = F(1.0 / t);
    const double rhs = kappa * std::pow(t, gamma);
    report.worst_ratio = std::max(report.worst_ratio, lhs / rhs);
    if (lhs > rhs * (1.0 + AsymptoticsReport::kRelativeTolerance)) {
      report.holds_everywhere = false;
      report.last_violation = t;
    }
  }
  return report;
}

}  // namespace osgood
