#include "osgood/mild_solver.hpp"

#include "osgood/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>

namespace osgood {
namespace {

Vector apply_source(const SourceTerm& f, const Vector& u) {
  Vector out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    out[i] = f(std::max(u[i], 0.0));
  }
  return out;
}

double sup_norm(const Vector& u) { return u.size() == 0 ? 0.0 : u.cwiseAbs().maxCoeff(); }

double p_norm(const Vector& u, const Vector& m, double p) {
  long double acc = 0.0L;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    acc += std::pow(std::abs(u[i]), p) * m[i];
  }
  return std::pow(static_cast<double>(acc), 1.0 / p);
}

// Exponential midpoint step of size h from u.
Vector midpoint_step(const SemigroupAction& S, const SourceTerm& f, const Vector& u, const Vector& fu, double h) {
  const Vector u_half = S.apply(h / 2, u + (h / 2) * fu);
  const Vector f_half = apply_source(f, u_half);
  return S.apply(h / 2, S.apply(h / 2, u) + h * f_half);
}

void check_problem(const SemigroupAction& S, const Vector& a) {
  if (a.size() != static_cast<Eigen::Index>(S.size())) {
    throw DomainError("initial value size does not match the state space");
  }
  if (!a.allFinite() || (a.array() < 0.0).any()) {
    throw DomainError("initial value must be finite and nonnegative");
  }
}

std::size_t trace_index(const SolutionTrace& trace, double t) {
  const double slack = 1e-12 * std::max(1.0, std::abs(t));
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    if (std::abs(trace.times[i] - t) <= slack) {
      return i;
    }
  }
  throw DomainError("time " + std::to_string(t) + " is not a trace time");
}

// Zero of the line through (t0, g0), (t1, g1); NaN unless g decreases.
double line_zero(double t0, double g0, double t1, double g1) {
  if (!(g1 < g0) || !(t1 > t0)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return t1 + g1 * (t1 - t0) / (g0 - g1);
}

void extrapolate(SolutionTrace& trace, const OsgoodFunctional& F, double rtol) {
  const auto k = trace.times.size();
  const auto g = [&](std::size_t i) { return F(std::max(trace.sup_norms[i], 1e-300)); };
  const double t_last = trace.times[k - 1];
  const double h_last = k >= 2 ? t_last - trace.times[k - 2] : 0.0;
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double previous = std::numeric_limits<double>::quiet_NaN();
  if (k >= 2) {
    estimate = line_zero(trace.times[k - 2], g(k - 2), t_last, g(k - 1));
  }
  if (k >= 3) {
    previous = line_zero(trace.times[k - 3], g(k - 3), trace.times[k - 2], g(k - 2));
  }
  if (!std::isfinite(estimate)) {
    // Scalar comparison: the largest component needs at most F(sup) more.
    estimate = t_last + g(k - 1);
    trace.t_emp = estimate;
    trace.t_emp_error = g(k - 1) + h_last + rtol * estimate;
    return;
  }
  trace.t_emp = estimate;
  trace.t_emp_error = (std::isfinite(previous) ? std::abs(estimate - previous) : g(k - 1)) + h_last + rtol * estimate;
}

}  // namespace

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::ReachedHorizon:
      return "reached-horizon";
    case SolveStatus::BlowUp:
      return "blow-up-detected";
    case SolveStatus::StepFailure:
      return "step-failure";
  }
  return "unknown";
}

SolutionTrace solve(const SemigroupAction& S, const SourceTerm& f, const Vector& a, double horizon,
                    const StepControls& controls) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError("solve: horizon must be positive and finite");
  }
  if (!(controls.rtol > 0.0) || !(controls.divergence_threshold > 0.0) || !(controls.p >= 1.0)) {
    throw DomainError("solve: invalid step controls");
  }
  check_problem(S, a);
  const OsgoodFunctional F(f);
  const Vector& m = S.measure();

  SolutionTrace trace;
  trace.divergence_threshold = controls.divergence_threshold;
  trace.horizon = horizon;
  trace.p = controls.p;

  Vector u = a;
  double t = 0.0;
  const auto record = [&](double time, const Vector& state) {
    trace.times.push_back(time);
    trace.sup_norms.push_back(sup_norm(state));
    trace.p_norms.push_back(p_norm(state, m, controls.p));
    if (controls.store_states) {
      trace.states.push_back(state);
    }
  };
  record(t, u);

  const double h_min = controls.min_step_fraction * horizon;
  double h = controls.initial_step > 0.0 ? controls.initial_step : horizon * 1e-3;
  std::size_t steps = 0;

  while (true) {
    if (horizon - t <= h_min) {
      trace.status = SolveStatus::ReachedHorizon;
      return trace;
    }
    if (++steps > controls.max_steps) {
      trace.status = SolveStatus::StepFailure;
      trace.failure_reason = "step budget exhausted at t = " + std::to_string(t);
      return trace;
    }
    h = std::min(h, horizon - t);

    const Vector fu = apply_source(f, u);
    if (!fu.allFinite()) {
      // f(u) overflows before the threshold: the largest component has at
      // most F(sup) left, which is below double resolution here.
      trace.status = SolveStatus::BlowUp;
      extrapolate(trace, F, controls.rtol);
      return trace;
    }
    const Vector euler = S.apply(h, u + h * fu);
    const Vector mid = midpoint_step(S, f, u, fu, h);

    double err = std::numeric_limits<double>::infinity();
    if (euler.allFinite() && mid.allFinite()) {
      const double scale = controls.atol + controls.rtol * std::max(sup_norm(mid), sup_norm(u));
      err = sup_norm(mid - euler) / scale;
    }

    if (err <= 1.0) {
      t += h;
      u = mid;
      const double lowest = u.size() > 0 ? u.minCoeff() : 0.0;
      trace.min_component = std::min(trace.min_component, lowest);
      u = u.cwiseMax(0.0);
      record(t, u);
      if (!std::isfinite(trace.sup_norms.back())) {
        throw DomainError("solve: non-finite state accepted");
      }
      if (trace.sup_norms.back() > controls.divergence_threshold) {
        trace.status = SolveStatus::BlowUp;
        extrapolate(trace, F, controls.rtol);
        return trace;
      }
      h *= err == 0.0 ? 5.0 : std::clamp(0.9 / std::sqrt(err), 0.2, 5.0);
    } else {
      ++trace.rejected_steps;
      h *= std::isfinite(err) ? std::clamp(0.9 / std::sqrt(err), 0.2, 0.9) : 0.25;
      if (h < h_min && horizon - t > h_min) {
        trace.status = SolveStatus::StepFailure;
        trace.failure_reason = "step size underflow at t = " + std::to_string(t) +
                               " (sup norm " + std::to_string(sup_norm(u)) + ")";
        return trace;
      }
    }
  }
}

ResidualReport check_residual(const SolutionTrace& trace, const SemigroupAction& S, const SourceTerm& f,
                              const Vector& a, double t) {
  check_problem(S, a);
  if (trace.states.size() != trace.times.size()) {
    throw DomainError("check_residual: trace does not store states");
  }
  const std::size_t k = trace_index(trace, t);
  const double t_k = trace.times[k];

  using Rule = boost::math::quadrature::gauss<double, 5>;
  std::array<double, 5> nodes{};
  std::array<double, 5> weights{};
  {
    // Boost stores the nonnegative half of the symmetric rule.
    const auto& x = Rule::abscissa();
    const auto& w = Rule::weights();
    std::size_t j = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      nodes[j] = x[i];
      weights[j++] = w[i];
      if (x[i] != 0.0) {
        nodes[j] = -x[i];
        weights[j++] = w[i];
      }
    }
  }

  ResidualReport report;
  Vector q = Vector::Zero(a.size());
  for (std::size_t i = 0; i < k; ++i) {
    const double lo = trace.times[i];
    const double hi = trace.times[i + 1];
    const double half = (hi - lo) / 2;
    const double centre = (hi + lo) / 2;
    const Vector& ui = trace.states[i];
    const Vector fui = apply_source(f, ui);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const double s = centre + half * nodes[j];
      const Vector us = midpoint_step(S, f, ui, fui, s - lo);
      q += (half * weights[j]) * S.apply(t_k - s, apply_source(f, us));
    }
    const double before = trace.sup_norms[i];
    const double after = trace.sup_norms[i + 1];
    if (before > 0.0 && after > 1.5 * before) {
      report.under_resolved = true;
    }
  }
  const Vector& u = trace.states[k];
  const Vector diff = u - S.apply(t_k, a) - q;
  report.residual = p_norm(diff, S.measure(), trace.p);
  const double size = p_norm(u, S.measure(), trace.p);
  report.relative = size > 0.0 ? report.residual / size : 0.0;
  return report;
}

DiagnosticSeries diagnostics(const SolutionTrace& trace, const SemigroupAction& S, const SourceTerm& f,
                             double T, const Subset& G) {
  if (trace.times.empty() || trace.states.size() != trace.times.size()) {
    throw DomainError("diagnostics: trace does not store states");
  }
  if (!(T >= 0.0) || T > trace.end_time() * (1 + 1e-12)) {
    throw DomainError("diagnostics: reference time " + std::to_string(T) + " lies beyond the trace");
  }
  if (G.empty()) {
    throw DomainError("diagnostics: empty set G");
  }
  const Vector& m = S.measure();
  long double mass = 0.0L;
  for (const Index x : G) {
    if (x >= S.size()) {
      throw DomainError("diagnostics: set G contains an out-of-range point");
    }
    mass += m[static_cast<Eigen::Index>(x)];
  }

  DiagnosticSeries d;
  d.T = T;
  d.G = G;
  for (std::size_t i = 0; i < trace.times.size() && trace.times[i] <= T; ++i) {
    const Vector v = S.apply(std::max(T - trace.times[i], 0.0), trace.states[i]);
    long double acc = 0.0L;
    for (const Index x : G) {
      const auto j = static_cast<Eigen::Index>(x);
      acc += v[j] * m[j];
    }
    d.times.push_back(trace.times[i]);
    d.values.push_back(static_cast<double>(acc / mass));
  }
  d.min_derivative_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < d.values.size(); ++i) {
    const double dt = d.times[i + 1] - d.times[i];
    d.monotonicity_violation = std::max(d.monotonicity_violation, d.values[i] - d.values[i + 1]);
    if (dt > 0.0) {
      const double slope = (d.values[i + 1] - d.values[i]) / dt;
      d.min_derivative_gap = std::min(d.min_derivative_gap, slope - f(std::max(d.values[i], 0.0)));
    }
  }
  return d;
}

void write_trace_csv(const SolutionTrace& trace, std::ostream& out) {
  out << "t,sup_norm,p_norm\n" << std::setprecision(17);
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    out << trace.times[i] << ',' << trace.sup_norms[i] << ',' << trace.p_norms[i] << '\n';
  }
}

void write_trace_csv(const SolutionTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw InputError("cannot write " + path.string());
  }
  write_trace_csv(trace, out);
}

namespace {
constexpr char kDumpMagic[8] = {'O', 'S', 'G', 'T', 'R', 'A', 'C', 'E'};
}

void write_state_dump(const SolutionTrace& trace, const std::filesystem::path& path) {
  if (trace.states.size() != trace.times.size()) {
    throw DomainError("write_state_dump: trace does not store states");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError("cannot write " + path.string());
  }
  const std::uint64_t n = trace.states.empty() ? 0 : static_cast<std::uint64_t>(trace.states.front().size());
  const std::uint64_t count = trace.states.size();
  out.write(kDumpMagic, sizeof kDumpMagic);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    out.write(reinterpret_cast<const char*>(&trace.times[i]), sizeof(double));
    out.write(reinterpret_cast<const char*>(trace.states[i].data()),
              static_cast<std::streamsize>(n * sizeof(double)));
  }
}

SolutionTrace read_state_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot read " + path.string());
  }
  char magic[8];
  std::uint64_t n = 0;
  std::uint64_t count = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in || std::memcmp(magic, kDumpMagic, sizeof magic) != 0) {
    throw InputError(path.string() + ": not a state dump");
  }
  SolutionTrace trace;
  for (std::uint64_t i = 0; i < count; ++i) {
    double t = 0.0;
    Vector u(static_cast<Eigen::Index>(n));
    in.read(reinterpret_cast<char*>(&t), sizeof t);
    in.read(reinterpret_cast<char*>(u.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) {
      throw InputError(path.string() + ": truncated state dump");
    }
    trace.times.push_back(t);
    trace.sup_norms.push_back(sup_norm(u));
    trace.p_norms.push_back(p_norm(u, Vector::Ones(u.size()), 2.0));
    trace.states.push_back(std::move(u));
  }
  return trace;
}

}  // namespace osgood
