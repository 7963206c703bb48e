#include "osgood_cli/commands.hpp"
#include "osgood_cli/config.hpp"

#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace osgood::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = OSGOOD_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "osgood_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::string& command, const fs::path& config, CommandOptions options) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_command(command, config, options, out, err);
  return {code, out.str(), err.str()};
}

CommandOptions to(const fs::path& dir) {
  CommandOptions o;
  o.out = dir;
  return o;
}

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
  std::ofstream(dir / name) << text;
  return dir / name;
}

}  // namespace

TEST_CASE("certify on the scalar and two-vertex configs") {
  const auto dir = scratch("certify");
  const auto scalar = run("certify", kConfigs / "scalar.json", to(dir / "scalar"));
  CHECK(scalar.code == kExitOk);
  const auto c = read_json(dir / "scalar" / "certificate.json");
  CHECK(std::abs(c.at("T").get<double>() - 0.5) <= 0.5 * (std::pow(1000.0, 1.0 / 399.0) - 1.0) + 1e-12);
  CHECK(c.at("seed").get<std::uint64_t>() == kDefaultSeed);

  const auto two = run("certify", kConfigs / "two_vertex.json", to(dir / "two"));
  CHECK(two.code == kExitOk);
  const auto t = read_json(dir / "two" / "certificate.json");
  CHECK(t.at("margin").get<double>() > 1.0);
  CHECK(t.at("G") == nlohmann::json::array({"a"}));
  CHECK(std::abs(t.at("mean").get<double>() - 2.0 * (1.0 + std::exp(-2.0))) <= 1e-10);

  CommandOptions verify = to(dir / "verify");
  verify.verify_only = dir / "two" / "certificate.json";
  const auto v = run("certify", kConfigs / "two_vertex.json", verify);
  CHECK(v.code == kExitOk);
  CHECK(read_json(dir / "verify" / "verification.json").at("reproduced").get<bool>());

  // Tampered margin is not reproduced.
  auto doc = t;
  doc["margin"] = t.at("margin").get<double>() * 1.001;
  write(dir, "tampered.json", doc.dump());
  verify.verify_only = dir / "tampered.json";
  CHECK(run("certify", kConfigs / "two_vertex.json", verify).code == kExitNoCertificate);

  const auto zero = run("certify", kConfigs / "zero_initial.json", to(dir / "zero"));
  CHECK(zero.code == kExitNoCertificate);
  CHECK(read_json(dir / "zero" / "certificate.json").at("certificate").is_null());
}

TEST_CASE("simulate exit codes and reports") {
  const auto dir = scratch("simulate");
  CHECK(run("simulate", kConfigs / "scalar.json", to(dir / "s")).code == kExitBlowUp);
  const auto status = read_json(dir / "s" / "status.json");
  CHECK(status.at("status") == "blow-up-detected");
  CHECK(std::abs(status.at("T_emp").get<double>() - 0.5) <= 0.005);
  CHECK(fs::exists(dir / "s" / "trace.csv"));

  CHECK(run("simulate", kConfigs / "zero_initial.json", to(dir / "z")).code == kExitOk);
  CHECK(read_json(dir / "z" / "status.json").at("status") == "reached-horizon");

  CHECK(run("simulate", kConfigs / "two_vertex.json", to(dir / "t")).code == kExitBlowUp);
  CHECK(run("certify", kConfigs / "two_vertex.json", to(dir / "t")).code == kExitOk);
  const double t_emp = read_json(dir / "t" / "status.json").at("T_emp").get<double>();
  CHECK(t_emp <= read_json(dir / "t" / "certificate.json").at("T").get<double>());
}

TEST_CASE("criteria verdicts") {
  const auto dir = scratch("criteria");
  CHECK(run("criteria", kConfigs / "path_criteria.json", to(dir / "p")).code == kExitOk);
  const auto p = read_json(dir / "p" / "criteria.json");
  CHECK(std::abs(p.at("volume_growth").at("theta").get<double>() - 1.0) <= 0.1);
  CHECK(p.at("verdict") == "blow-up-predicted");

  CHECK(run("criteria", kConfigs / "torus3_criteria.json", to(dir / "t")).code == kExitOk);
  const auto t = read_json(dir / "t" / "criteria.json");
  CHECK(t.at("volume_growth").at("theta").get<double>() > 2.0);
  CHECK(t.at("verdict") == "theorem-silent");

  CHECK(run("criteria", kConfigs / "gaussian_torus.json", to(dir / "g")).code == kExitOk);
  const auto g = read_json(dir / "g" / "criteria.json");
  CHECK(g.at("product").get<double>() == 1.0);
  CHECK(g.at("bound").get<double>() == 2.0);
  CHECK(g.at("verdict") == "blow-up-predicted");
  CHECK(g.at("asymptotics").at("holds_everywhere").get<bool>());
}

TEST_CASE("validate exit codes") {
  const auto dir = scratch("validate");
  CHECK(run("validate", kConfigs / "gaussian_torus.json", to(dir / "g")).code == kExitOk);
  CHECK(read_json(dir / "g" / "validate.json").at("passed").get<bool>());
  CHECK(run("validate", kConfigs / "broken_kernel.json", to(dir / "b")).code == kExitValidationFailed);
  CHECK(run("validate", kConfigs / "jensen_suite.json", to(dir / "j")).code == kExitOk);
}

TEST_CASE("input errors map to exit 1") {
  const auto dir = scratch("errors");
  CHECK(run("certify", dir / "missing.json", to(dir)).code == kExitInputError);
  const auto unknown = write(dir, "unknown.json", R"({"graph": {"generator": "path", "n": 3}, "bogus": 1})");
  const auto r = run("certify", unknown, to(dir));
  CHECK(r.code == kExitInputError);
  CHECK(r.err.find("bogus") != std::string::npos);
  const auto nested = write(dir, "nested.json", R"({"graph": {"generator": "path", "n": 3, "weight": 2}})");
  CHECK(run("validate", nested, to(dir)).code == kExitInputError);
  const auto bad_file = write(dir, "badfile.json", R"({"graph": {"edges": "nope.csv"}})");
  CHECK(run("validate", bad_file, to(dir)).code == kExitInputError);
  const auto no_source = write(dir, "nosource.json", R"({"graph": {"generator": "path", "n": 3}})");
  CHECK(run("certify", no_source, to(dir)).code == kExitInputError);
  const auto non_osgood =
      write(dir, "nonosgood.json",
            R"({"graph": {"generator": "path", "n": 3}, "source": {"alpha": 0}, "initial": {"value": 1}})");
  CHECK(run("certify", non_osgood, to(dir)).code == kExitInputError);
  const auto malformed = write(dir, "malformed.json", "{ not json");
  CHECK(run("certify", malformed, to(dir)).code == kExitInputError);
  const auto csv = write(dir, "edges.csv", "src,dst,weight\na,b,1\nb,c\n");
  const auto bad_row = write(dir, "badrow.json", R"({"graph": {"edges": "edges.csv"}})");
  const auto e = run("validate", bad_row, to(dir));
  CHECK(e.code == kExitInputError);
  CHECK(e.err.find("line 3") != std::string::npos);
  (void)csv;
  CommandOptions bad_grid = to(dir);
  bad_grid.t_min = 2.0;
  bad_grid.t_max = 1.0;
  CHECK(run("certify", kConfigs / "scalar.json", bad_grid).code == kExitInputError);
}

TEST_CASE("sweeps run into separate directories") {
  const auto dir = scratch("sweep");
  CommandOptions o = to(dir);
  o.sweep = {"alpha=0.5,1,2"};
  CHECK(run("certify", kConfigs / "scalar.json", o).code == kExitOk);
  for (const char* name : {"alpha=0.5", "alpha=1", "alpha=2"}) {
    CHECK(fs::exists(dir / name / "certificate.json"));
  }
  const auto summary = read_json(dir / "sweep.json");
  CHECK(summary.at("runs").size() == 3);
  // alpha = 2 with a = 2: F(2) = 1/(2 * 4) = 0.125.
  CHECK(read_json(dir / "alpha=2" / "certificate.json").at("T").get<double>() ==
        doctest::Approx(0.125).epsilon(0.02));

  CommandOptions bad = to(dir);
  bad.sweep = {"alpha"};
  CHECK(run("certify", kConfigs / "scalar.json", bad).code == kExitInputError);
}

TEST_CASE("reports are deterministic given config and seed") {
  const auto dir = scratch("determinism");
  CommandOptions a = to(dir / "a");
  CommandOptions b = to(dir / "b");
  a.seed = 99;
  b.seed = 99;
  run("validate", kConfigs / "jensen_suite.json", a);
  run("validate", kConfigs / "jensen_suite.json", b);
  CHECK(read_json(dir / "a" / "validate.json") == read_json(dir / "b" / "validate.json"));
  CHECK(read_json(dir / "a" / "validate.json").at("seed").get<std::uint64_t>() == 99);
}
