#pragma once

#include "osgood/semigroup.hpp"
#include "osgood/source_term.hpp"
#include "osgood/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace osgood {

enum class CertificateForm { Mean, Pointwise };

std::string to_string(CertificateForm form);

/// (T, G) with mean_G S(T)a > F^{-1}(T). No global mild solution exists
/// past T.
struct BlowupCertificate {
  double T = 0.0;
  Subset G;
  double mean_value = 0.0;
  double threshold = 0.0;
  double margin = 0.0;
  CertificateForm form = CertificateForm::Mean;
};

/// Margin required beyond strict inequality; float ties count as failure.
inline constexpr double kStrictnessMargin = 1e-12;
/// Relative agreement required between the search and the re-verification.
inline constexpr double kReverifyTolerance = 1e-9;

struct Verification {
  std::optional<BlowupCertificate> certificate;
  double mean_value = 0.0;
  double threshold = 0.0;
  double margin = 0.0;
  /// Empty when certified.
  std::string reason;
};

/// Recomputes mean_G S(T)a from scratch and compares it with F^{-1}(T).
/// Throws DomainError for T <= 0, an empty or out-of-range G, or negative a.
/// `reference` selects SemigroupAction::apply_reference.
Verification verify_certificate(const SemigroupAction& S, const OsgoodFunctional& F, const Vector& a,
                                double T, const Subset& G, bool reference = false);
Verification verify_certificate(const SemigroupAction& S, const SourceTerm& f, const Vector& a,
                                double T, const Subset& G, bool reference = false);

/// t_min (t_max / t_min)^{i / (n - 1)}, i = 0..n-1.
std::vector<double> geometric_grid(double t_min, double t_max, std::size_t n);

struct SearchOptions {
  /// Grid points evaluated concurrently; 0 picks hardware concurrency.
  unsigned threads = 1;
};

struct SearchResult {
  std::optional<BlowupCertificate> certificate;
  std::vector<double> grid;
  /// Grid points whose semigroup action was evaluated.
  std::size_t evaluated = 0;
  /// Grid points that certified in the search but failed re-verification.
  std::size_t reverify_failures = 0;
};

/// Scans a geometric T grid in increasing order. At each T the candidate
/// sets are the superlevel sets of S(T)a; the first certifying T wins and
/// the certifying set with the largest margin is kept. The winner is
/// re-verified through apply_reference before it is returned.
SearchResult search_certificate(const SemigroupAction& S, const OsgoodFunctional& F, const Vector& a,
                                double t_min, double t_max, std::size_t grid_size,
                                const SearchOptions& options = {});

enum class Criterion { Graph, MetricMeasure };

struct CriterionVerdict {
  Criterion criterion = Criterion::Graph;
  double product = 0.0;  // theta gamma or alpha gamma
  double bound = 0.0;    // 2 or beta
  bool blowup_predicted = false;
  double theta_or_alpha = 0.0;
  double beta = 0.0;  // 2 for the graph criterion
  double gamma = 0.0;
};

std::string verdict_string(const CriterionVerdict& v);

/// Blow-up predicted iff theta gamma < 2.
CriterionVerdict criterion_graph(double theta, double gamma);
/// Blow-up predicted iff alpha gamma < beta.
CriterionVerdict criterion_mms(double alpha, double beta, double gamma);

struct OnDiagonalFit {
  double c = 0.0;
  double worst_t = 0.0;
  std::vector<double> t;
  /// p_t(x,x) (sqrt(t) log t)^theta per grid point.
  std::vector<double> scaled;
};

/// c = min over t of p_t(x,x) (sqrt(t) log t)^theta for t in an increasing
/// grid inside (1, inf).
OnDiagonalFit on_diagonal_fit(const SemigroupOperator& S, Index x, double theta,
                              const std::vector<double>& t_grid);

}  // namespace osgood
