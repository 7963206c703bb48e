#pragma once

#include "osgood/semigroup.hpp"
#include "osgood/source_term.hpp"
#include "osgood/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace osgood {

struct StepControls {
  double rtol = 1e-6;
  double atol = 1e-12;
  /// Initial step; <= 0 picks horizon * 1e-3.
  double initial_step = 0.0;
  /// Blow-up is declared once ||u||_inf exceeds this.
  double divergence_threshold = 1e8;
  /// Steps below min_step_fraction * horizon count as step failure.
  double min_step_fraction = 1e-14;
  /// Exponent of the L^p(m) norm recorded alongside the sup norm.
  double p = 2.0;
  std::size_t max_steps = 2'000'000;
  bool store_states = true;
};

enum class SolveStatus { ReachedHorizon, BlowUp, StepFailure };

std::string to_string(SolveStatus status);

/// Accepted steps of a mild solution u(t) = S(t)a + int_0^t S(t-s) f(u(s)) ds.
struct SolutionTrace {
  std::vector<double> times;
  std::vector<Vector> states;  // empty unless store_states
  std::vector<double> sup_norms;
  std::vector<double> p_norms;

  SolveStatus status = SolveStatus::ReachedHorizon;
  /// Extrapolated blow-up time and its error bar (BlowUp only).
  double t_emp = 0.0;
  double t_emp_error = 0.0;
  std::string failure_reason;

  double divergence_threshold = 0.0;
  double horizon = 0.0;
  double p = 2.0;
  std::size_t rejected_steps = 0;
  /// Most negative component produced before clamping.
  double min_component = 0.0;

  double end_time() const { return times.empty() ? 0.0 : times.back(); }
};

/// Adaptive exponential integrator. Each step computes the exponential Euler
/// value S(h)(u + h f(u)) and the exponential midpoint value
/// S(h/2)[S(h/2)u + h f(u_half)], u_half = S(h/2)(u + h/2 f(u)), uses their
/// difference as the error estimate and keeps the midpoint value.
SolutionTrace solve(const SemigroupAction& S, const SourceTerm& f, const Vector& a, double horizon,
                    const StepControls& controls = {});

struct ResidualReport {
  double residual = 0.0;   // ||u(t) - S(t)a - Q(t)||_p
  double relative = 0.0;   // residual / ||u(t)||_p (0 when u(t) = 0)
  bool under_resolved = false;
};

/// Variation-of-constants residual at the stored time closest to t (which
/// must match a trace time to 1e-12 relative). Q is composite 5-point Gauss
/// over the trace intervals; u at the nodes comes from one exponential
/// midpoint substep off the left endpoint.
ResidualReport check_residual(const SolutionTrace& trace, const SemigroupAction& S, const SourceTerm& f,
                              const Vector& a, double t);

struct DiagnosticSeries {
  double T = 0.0;
  Subset G;
  std::vector<double> times;
  std::vector<double> values;  // j(t) = mean_G S(T - t) u(t)
  /// max_i (j_i - j_{i+1}, 0).
  double monotonicity_violation = 0.0;
  /// min over interior points of (j_{i+1} - j_i) / dt - f(j_i); +inf if none.
  double min_derivative_gap = 0.0;
};

/// Throws DomainError when T exceeds the trace or states were not stored.
DiagnosticSeries diagnostics(const SolutionTrace& trace, const SemigroupAction& S, const SourceTerm& f,
                             double T, const Subset& G);

/// CSV with header t,sup_norm,p_norm.
void write_trace_csv(const SolutionTrace& trace, std::ostream& out);
void write_trace_csv(const SolutionTrace& trace, const std::filesystem::path& path);

/// Little-endian binary dump: "OSGTRACE", uint64 n, uint64 count, then per
/// state the time followed by n doubles.
void write_state_dump(const SolutionTrace& trace, const std::filesystem::path& path);
SolutionTrace read_state_dump(const std::filesystem::path& path);

}  // namespace osgood
