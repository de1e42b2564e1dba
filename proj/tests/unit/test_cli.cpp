#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <regex>

#include "desing/cli.hpp"
#include "desing/glue_assembler.hpp"
#include "test_support.hpp"

using namespace desing;
using namespace desing::cli;

namespace {

const std::filesystem::path kFlagship = std::filesystem::path(DESING_TEST_DATA) / "flagship.json";

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

// Error text produced by parse_config_text, or "" when it parses.
std::string parse_error(const std::string& text) {
  try {
    parse_config_text(text, "cfg.json");
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "desing");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return main_entry(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("flagship fixture parses") {
  const Configuration c = parse_config(kFlagship);
  CHECK(c.k() == 2);
  CHECK(c.n == 3);
  const Configuration ref = test_support::flagship(1e-4, 0.5);
  for (int j = 0; j < 2; ++j) {
    CHECK((c.points[j] - ref.points[j]).norm() == 0.0);
    CHECK((c.rotations[j] - ref.rotations[j]).cwiseAbs().maxCoeff() < 1e-15);
  }
  CHECK(c.a0 == ref.a0);
  CHECK(c.epsilon == 1e-4);
  CHECK(c.settings.seed == 7);
  CHECK(config_fingerprint(c) == config_fingerprint(parse_config(kFlagship)));
}

TEST_CASE("nested rotation rows parse like the flat form") {
  const std::string text = replace(read_text(kFlagship), "[1, 0, 0,\n     0, 0, -1,\n     0, 1, 0]",
                                   "[[1, 0, 0], [0, 0, -1], [0, 1, 0]]");
  const Configuration c = parse_config_text(text, "nested");
  CHECK(c.rotations[1] == parse_config(kFlagship).rotations[1]);
}

TEST_CASE("rotation defect is rejected with value and line") {
  const std::string text = replace(read_text(kFlagship), "0, 0, -1,", "0, 0, -1.0005,");
  const std::string err = parse_error(text);
  CHECK(err.find("cfg.json:11:") == 0);
  CHECK(err.find("rotations[1] is not orthogonal") != std::string::npos);
  // |(-1.0005)^2 - 1| = 1.00025e-3
  CHECK(err.find("defect 0.00100025") != std::string::npos);
}

TEST_CASE("duplicate points are rejected naming both indices") {
  const std::string text = replace(read_text(kFlagship), "[-1.0, 0.0, 0.0]", "[1.0, 0.0, 0.0]");
  const std::string err = parse_error(text);
  CHECK(err.find("cfg.json:5:") == 0);
  CHECK(err.find("points[0] and points[1] coincide") != std::string::npos);
}

TEST_CASE("malformed input is line anchored") {
  const std::string base = read_text(kFlagship);
  SUBCASE("bad number") {
    const std::string err = parse_error(replace(base, "1e-4", "1e-4x"));
    CHECK(err.find("cfg.json:16: malformed JSON") == 0);
  }
  SUBCASE("string where a number belongs") {
    const std::string err = parse_error(replace(base, "\"rho_star\": 0.5", "\"rho_star\": \"half\""));
    CHECK(err.find("cfg.json:17: rho_star: expected a number") == 0);
  }
  SUBCASE("wrong matrix shape") {
    const std::string err = parse_error(replace(base, "0, 1, 0]\n  ]", "0, 1]\n  ]"));
    CHECK(err.find("cfg.json:11: rotations/1: expected a 3x3 matrix") == 0);
  }
  SUBCASE("short point") {
    const std::string err = parse_error(replace(base, "[-1.0, 0.0, 0.0]", "[-1.0, 0.0]"));
    CHECK(err.find("cfg.json:5: points/1: expected a list of 3 numbers") == 0);
  }
  SUBCASE("missing key") {
    const std::string err = parse_error(replace(base, "\"epsilon\": 1e-4,", ""));
    CHECK(err.find("missing required key 'epsilon'") != std::string::npos);
  }
  SUBCASE("unknown key") {
    const std::string err = parse_error(replace(base, "\"seed\": 7", "\"seed\": 7, \"sead\": 3"));
    CHECK(err.find("cfg.json:18: unknown key 'sead'") == 0);
  }
  SUBCASE("non-positive epsilon") {
    const std::string err = parse_error(replace(base, "1e-4", "-1e-4"));
    CHECK(err.find("cfg.json:16: epsilon must be positive") == 0);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(parse_config("/nonexistent/cfg.json"), InputError);
  }
}

TEST_CASE("validate reports the flagship hypotheses") {
  RunOptions o;
  o.config = kFlagship;
  const RunReport r = run("validate", o);
  CHECK(r.passed());
  REQUIRE(!r.summary.empty());
  CHECK(r.summary[0] == "h1 ✓ h2 ✓ h3 ✓, α = (4, 12)");
  const auto alpha = r.sections["validation"]["alpha"];
  CHECK(std::abs(alpha[0].get<double>() - 4.0) < 1e-12);
  CHECK(std::abs(alpha[1].get<double>() - 12.0) < 1e-12);
  for (const Check& c : r.checks) {
    CHECK(!c.relation.empty());
    CHECK(std::isfinite(c.threshold));
  }
}

TEST_CASE("exit codes") {
  CHECK(invoke({"validate", kFlagship.string()}) == 0);
  const auto flipped = temp_file("desing_flipped.json",
                                 replace(read_text(kFlagship), "\"A0\": [1, 0, 0, 0, 1, 0, 0, 0, 1]",
                                         "\"A0\": [-1, 0, 0, 0, -1, 0, 0, 0, -1]"));
  CHECK(invoke({"validate", flipped.string()}) == 1);
  CHECK(invoke({"validate", "/nonexistent/cfg.json"}) == 2);
  CHECK(invoke({"validate"}) == 2);
  CHECK(invoke({"frobnicate"}) == 2);
  CHECK(invoke({"spectrum", "--n", "3", "--k", "0"}) == 0);
  CHECK(invoke({"spectrum", "--n", "1", "--k", "1"}) == 2);
  CHECK(invoke({"dtn", "--degree", "0"}) == 2);
  CHECK(invoke({"glue", kFlagship.string(), "--export", "out.obj"}) == 2);
  std::filesystem::remove(flipped);
}

TEST_CASE("reports are deterministic apart from timings") {
  RunOptions o;
  o.config = kFlagship;
  o.seed = 11;
  const std::string a = run("interaction", o).to_json(false).dump();
  const std::string b = run("interaction", o).to_json(false).dump();
  CHECK(a == b);
  CHECK(a.find("timings") == std::string::npos);
  CHECK(run("interaction", o).to_json().contains("timings"));
  o.seed = 12;
  CHECK(run("interaction", o).to_json(false).dump() != a);
}

TEST_CASE("report file written by --report matches the run") {
  const auto path = std::filesystem::temp_directory_path() / "desing_report.json";
  CHECK(invoke({"--seed", "5", "--report", path.string(), "validate", kFlagship.string()}) == 0);
  const auto j = nlohmann::json::parse(read_text(path));
  CHECK(j["command"] == "validate");
  CHECK(j["seed"] == 5);
  CHECK(j["passed"] == true);
  CHECK(j["config_digest"].get<std::string>().size() == 16);
  std::filesystem::remove(path);
}

TEST_CASE("interaction cross-checks pass on the flagship") {
  RunOptions o;
  o.config = kFlagship;
  const RunReport r = run("interaction", o);
  CHECK(r.passed());
  const auto g = r.sections["interaction"]["gamma"];
  CHECK(std::abs(g[0][1].get<double>() + std::numbers::pi / 3) < 1e-12);
}

TEST_CASE("spectrum n=3 k=1") {
  RunOptions o;
  o.n = 3;
  o.k = 1;
  const RunReport r = run("spectrum", o);
  CHECK(r.passed());
  const auto s = r.sections["spectrum"];
  CHECK(s["coexact_gamma"][0].get<double>() == 1.5);
  CHECK(s["exact_mu"][0].get<double>() == 2.5);
  CHECK(s["exact_nu"][0].get<double>() == 0.5);
  CHECK(s["exact_nu"][1].get<double>() == -0.5);
  CHECK(r.summary[0] == "n=3 k=1: γ = ±1.5, μ = ±2.5, ν = ±0.5");
}

TEST_CASE("dtn witness passes") {
  RunOptions o;
  o.degree = 8;
  const RunReport r = run("dtn", o);
  CHECK(r.passed());
  CHECK(r.sections["dtn"]["eigenvalues"].size() == 9);
}

TEST_CASE("neck study passes and exports") {
  const auto path = std::filesystem::temp_directory_path() / "desing_neck.csv";
  RunOptions o;
  o.n = 3;
  o.beta = 1.0;
  o.epsilon = 1.0;
  o.grid = 0.05;
  o.export_path = path;
  const RunReport r = run("neck", o);
  CHECK(r.passed());
  const auto rows = read_points(path, ExportFormat::Csv);
  CHECK(rows.size() == r.sections["neck"]["export"]["points"].get<std::size_t>());
  const NeckParams p(3, 1.0, 1.0);
  for (std::size_t i = 0; i < rows.size(); i += 97) {
    const Vec theta = sphere_point(std::vector<double>{rows[i].params(1), rows[i].params(2)}, 3);
    CHECK((neck_point_at(p, rows[i].params(0), theta).to_real() - rows[i].coords).norm() < 1e-14);
  }
  std::filesystem::remove(path);
}
