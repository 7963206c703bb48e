#pragma once

#include "osgood/kernel_models.hpp"
#include "osgood/semigroup.hpp"
#include "osgood/source_term.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace osgood::cli {

inline constexpr std::uint64_t kDefaultSeed = 20240917;

struct GraphSpec {
  std::optional<std::filesystem::path> edges;
  std::optional<std::filesystem::path> measure;
  std::string generator;  // path|cycle|grid|torus|star|edgeless|random
  Index n = 0;
  std::vector<Index> sides;
  double p = 0.1;
  double mass = 1.0;
  double center_mass = 1.0;
};

struct KernelSpec {
  std::string family = "gaussian";  // gaussian|stable
  std::string topology = "torus";   // torus|interval
  int dim = 1;
  Index mesh = 128;
  double extent = 20.0;  // period or length
  double beta = 2.0;
  double mass_scale = 1.0;
  std::optional<double> lower_bound_c;
};

struct SourceSpec {
  std::string family = "power";  // power|exp_minus_one|power_over_exp|tabulated
  double alpha = 1.0;
  std::optional<std::filesystem::path> path;
  std::optional<double> kappa;
  std::optional<double> gamma;
};

struct InitialSpec {
  std::string kind = "constant";  // point_mass|constant|file|values
  std::string vertex;
  double height = 1.0;
  double value = 0.0;
  std::optional<std::filesystem::path> path;
  std::vector<double> values;
};

struct ValidateSpec {
  std::vector<double> times{0.1, 1.0, 10.0};
  std::vector<double> t_grid;  // kernel axioms; empty = 10 points on [0.01, 1]
  Index samples = 8;
  double tolerance = 5e-3;
  double p = 2.0;
  std::size_t jensen_cases = 0;
  Index jensen_max_vertices = 20;
};

struct AnalysisSpec {
  double t_min = 1e-3;
  double t_max = 1e3;
  std::size_t t_grid = 0;  // 0 = 200 points per decade
  double horizon = 10.0;
  double rtol = 1e-6;
  double threshold = 1e8;
  std::string method = "auto";  // auto|dense|krylov
  double krylov_tolerance = 1e-10;
  Index r_max = 20;
  std::optional<std::string> basepoint;
  bool dump_states = false;
  ValidateSpec validate;
};

struct RunConfig {
  std::optional<GraphSpec> graph;
  std::optional<KernelSpec> kernel;
  std::optional<SourceSpec> source;
  std::optional<InitialSpec> initial;
  AnalysisSpec analysis;
  std::filesystem::path output = "osgood-out";
  std::uint64_t seed = kDefaultSeed;
  std::filesystem::path base_dir = ".";
};

/// Parses a config document. Relative paths resolve against `base_dir`.
/// Throws InputError on unknown keys, wrong types or invalid values.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

/// The state space described by a config, ready for the commands.
struct Problem {
  std::shared_ptr<const WeightedGraph> graph;             // graph problems
  std::shared_ptr<const SemigroupOperator> graph_semigroup;
  std::optional<KernelModel> kernel;                      // kernel problems
  std::shared_ptr<const SemigroupAction> semigroup;       // either one
  std::vector<std::string> labels;

  Index size() const { return semigroup->size(); }
  std::optional<Index> find(const std::string& label) const;
};

Problem build_problem(const RunConfig& config);
SourceTerm build_source(const SourceSpec& spec);
Vector build_initial(const InitialSpec& spec, const Problem& problem);
KernelModel build_kernel(const KernelSpec& spec);

}  // namespace osgood::cli
