#include <doctest.h>

#include "fixtures.hpp"

#include <lqnet/cli.hpp>
#include <lqnet/oracle.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace lqnet;
using namespace lqnet::testing;
namespace fs = std::filesystem;

namespace {

const char* kScalarConfig = R"({
  "N": 1,
  "horizon": 3,
  "subsystems": [
    {"A": 1.0, "B_local": 1.0, "sigma_x0": 1.0, "sigma_w": 0.5, "drop_prob": 0.0}
  ],
  "cost": {"Q": 1.0, "R": 1.0, "Q_terminal": 1.0}
})";

json reference_config() {
  json doc = spec_to_json(reference_instance());
  doc["experiment"] = {{"seed", 11}, {"reps", 4000}};
  return doc;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args, const std::string& stdin_text) {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  args.insert(args.begin(), "lqnet");
  const int code = cli::run(args, {in, out, err});
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lqnet_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("parse_config accepts a minimal scalar config") {
  const auto cfg = cli::parse_config_text(kScalarConfig);
  CHECK(cfg.spec.N == 1);
  CHECK(cfg.spec.remote_action_dim == 0);
  CHECK(cfg.spec.M[2].rows() == 1);
  CHECK(cfg.spec.M[2].cols() == 1);
  CHECK(cfg.spec.sigma_w[0].size() == 3);
  CHECK(validate_spec(cfg.spec).ok());
  CHECK(cfg.strategy == "optimal");
}

TEST_CASE("parse_config reports the drop probability path") {
  json doc = json::parse(kScalarConfig);
  doc["subsystems"][0]["drop_prob"] = 1.3;
  try {
    cli::parse_config_text(doc.dump());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(e.issues().size() == 1);
    CHECK(e.issues()[0].pointer == "/subsystems/0/drop_prob");
  }
}

TEST_CASE("parse_config names a missing key") {
  json doc = json::parse(kScalarConfig);
  doc["cost"].erase("Q_terminal");
  try {
    cli::parse_config_text(doc.dump());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE_FALSE(e.issues().empty());
    CHECK(e.issues()[0].pointer == "/cost/Q_terminal");
    CHECK(e.issues()[0].message.find("Q_terminal") != std::string::npos);
  }
}

TEST_CASE("parse_config collects several problems and rejects malformed text") {
  json doc = json::parse(kScalarConfig);
  doc["subsystems"][0]["drop_prob"] = -0.1;
  doc["subsystems"][0]["A"] = "two";
  doc["experiment"] = {{"reps", 0}};
  try {
    cli::parse_config_text(doc.dump());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    std::set<std::string> pointers;
    for (const auto& issue : e.issues()) pointers.insert(issue.pointer);
    CHECK(pointers.count("/subsystems/0/A") == 1);
    CHECK(pointers.count("/subsystems/0/drop_prob") == 1);
    CHECK(pointers.count("/experiment/reps") == 1);
  }
  CHECK_THROWS_AS(cli::parse_config_text("{\"N\": "), ParseError);
  std::istringstream none;
  CHECK_THROWS_AS(cli::parse_config("/nonexistent/lqnet.json", none), ParseError);
}

TEST_CASE("spec JSON round trip preserves the instance") {
  const auto spec = three_subsystem_instance();
  const auto back = spec_from_json(spec_to_json(spec));
  CHECK(back.N == spec.N);
  CHECK(back.remote_action_dim == spec.remote_action_dim);
  for (int t = 0; t < spec.horizon; ++t) {
    CHECK(back.Q[t] == spec.Q[t]);
    CHECK(back.M[t] == spec.M[t]);
    CHECK(back.R[t] == spec.R[t]);
  }
  CHECK(back.drop_prob == spec.drop_prob);
  CHECK(back.sigma_w[2][1] == spec.sigma_w[2][1]);
}

TEST_CASE("validate exit codes") {
  CHECK(run_cli({"validate"}, kScalarConfig).code == cli::kSuccess);
  json doc = json::parse(kScalarConfig);
  doc["cost"]["R"] = -1.0;
  const auto r = run_cli({"validate"}, doc.dump());
  CHECK(r.code == cli::kNumericalFailure);
  CHECK(r.out.find("R not positive definite") != std::string::npos);
  doc = json::parse(kScalarConfig);
  doc["cost"]["Q"] = json::array({json::array({1.0, 0.0}), json::array({0.0, 1.0})});
  CHECK(run_cli({"validate"}, doc.dump()).code == cli::kUsageError);
}

TEST_CASE("synthesize with reliable channels prints the centralized gains") {
  const auto r = run_cli({"synthesize"}, kScalarConfig);
  REQUIRE(r.code == cli::kSuccess);
  const json doc = json::parse(r.out);
  const auto spec = cli::parse_config_text(kScalarConfig).spec;
  const auto lqr = centralized_lqr(spec);
  for (int t = 0; t < spec.horizon; ++t) {
    CHECK(doc["K"][t]["t"] == t);
    CHECK(doc["K"][t]["value"][0][0].get<double>() == doctest::Approx(lqr.K[t](0, 0)).epsilon(1e-9));
  }
  // The schedule document doubles as a strategy file.
  const auto strategy = strategy_from_json(doc, spec);
  CHECK(strategy.common_gain[0](0, 0) == doctest::Approx(lqr.K[0](0, 0)).epsilon(1e-15));
}

TEST_CASE("simulate rejects zero replications and a missing seed") {
  CHECK(run_cli({"simulate", "--reps", "0", "--seed", "1"}, kScalarConfig).code ==
        cli::kUsageError);
  CHECK(run_cli({"simulate", "--reps", "10"}, kScalarConfig).code == cli::kUsageError);
  CHECK(run_cli({"simulate", "--bogus"}, kScalarConfig).code == cli::kUsageError);
  CHECK(run_cli({}, kScalarConfig).code == cli::kUsageError);
}

TEST_CASE("simulate output is byte-identical across runs and thread counts") {
  const std::string cfg = reference_config().dump();
  const fs::path a = scratch("a"), b = scratch("b");
  REQUIRE(run_cli({"simulate", "--out", a.string(), "--trajectories", "3", "--decompose"}, cfg)
              .code == cli::kSuccess);
  REQUIRE(run_cli({"simulate", "--out", b.string(), "--trajectories", "3", "--decompose",
                   "--threads", "4"},
                  cfg)
              .code == cli::kSuccess);
  for (const char* name : {"cost_report.json", "trajectories.csv"}) {
    CHECK(fs::exists(a / name));
    CHECK(slurp(a / name) == slurp(b / name));
  }
  const json report = json::parse(slurp(a / "cost_report.json"));
  CHECK(report["reps"] == 4000);
  CHECK(report["seed"] == 11);
  CHECK(report.contains("decomposition"));
  CHECK(std::abs(report["mean"].get<double>() - kReferenceOptimalCost) <=
        3.0 * report["se"].get<double>());
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("simulate reads a strategy file relative to the config") {
  const fs::path dir = scratch("strategy");
  fs::create_directories(dir);
  const auto sched = run_cli({"synthesize"}, reference_config().dump());
  std::ofstream(dir / "gains.json") << sched.out;
  json cfg = reference_config();
  cfg["experiment"]["strategy"] = "gains.json";
  std::ofstream(dir / "config.json") << cfg.dump();
  const auto with_file = run_cli({"simulate", "--config", (dir / "config.json").string()}, "");
  const auto optimal = run_cli({"simulate"}, reference_config().dump());
  CHECK(with_file.code == cli::kSuccess);
  CHECK(with_file.out == optimal.out);
  cfg["experiment"]["strategy"] = "missing.json";
  std::ofstream(dir / "bad.json") << cfg.dump();
  CHECK(run_cli({"simulate", "--config", (dir / "bad.json").string()}, "").code ==
        cli::kUsageError);
  fs::remove_all(dir);
}

TEST_CASE("verify passes on a random valid instance") {
  std::mt19937_64 rng(314);
  json doc = spec_to_json(random_instance(rng, {2, 1}, {1, 1}, 1, 3, {0.35, 0.65}));
  doc["experiment"] = {{"seed", 5}, {"reps", 20000}};
  const auto r = run_cli({"verify"}, doc.dump());
  INFO(r.err);
  CHECK(r.code == cli::kSuccess);
  CHECK(r.err.find("[FAIL]") == std::string::npos);
  const auto again = run_cli({"verify"}, doc.dump());
  CHECK(again.code == r.code);
  CHECK(again.out == r.out);
}

TEST_CASE("compare produces a sweep table") {
  json doc = reference_config();
  doc["experiment"]["reps"] = 500;
  doc["experiment"]["sweep"] = {{"drop_prob", {0.0, 0.5, 1.0}}};
  doc["experiment"]["strategies"] = {"optimal", "zero"};
  const auto r = run_cli({"compare", "--format", "csv"}, doc.dump());
  REQUIRE(r.code == cli::kSuccess);
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "subsystem,drop_prob,strategy,j_star,exact_cost,mc_mean,mc_se");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) rows += !line.empty();
  CHECK(rows == 2 * 3 * 2);
}

TEST_CASE("compare snapshot: optimal cost is nondecreasing over the drop grid") {
  json doc = reference_config();
  doc["experiment"].erase("reps");
  doc["experiment"]["sweep"] = {{"drop_prob", {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}}};
  const auto r = run_cli({"compare"}, doc.dump());
  REQUIRE(r.code == cli::kSuccess);
  CHECK(r.err.find("subsystem 0: optimal cost nondecreasing") != std::string::npos);
  CHECK(r.err.find("subsystem 1: optimal cost nondecreasing") != std::string::npos);
  const json rows = json::parse(r.out)["rows"];
  CHECK(rows.size() == 22);
  // First grid point, p = (0, 0.7), from tests/oracles/frozen_values.py.
  CHECK(rows[0]["j_star"].get<double>() == doctest::Approx(8.659562375579059).epsilon(1e-12));
  CHECK_FALSE(rows[0].contains("mc_mean"));
}
