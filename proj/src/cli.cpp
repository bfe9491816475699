#include <lqnet/cli.hpp>

#include <lqnet/oracle.hpp>
#include <lqnet/simulator.hpp>
#include <lqnet/synthesis.hpp>
#include <lqnet/theory.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace lqnet::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v, int precision = 10) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::string read_stream(std::istream& in) {
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::vector<ParseIssue>{{"", std::string("malformed JSON: ") + e.what()}});
  }
  if (!doc.is_object()) throw ParseError(std::vector<ParseIssue>{{"", "expected a JSON object"}});

  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  std::vector<ParseIssue> issues;
  const bool nested = doc.contains("system");
  try {
    cfg.spec = spec_from_json(nested ? doc["system"] : doc, nested ? "/system" : "");
  } catch (const ParseError& e) {
    issues = e.issues();
  }

  if (doc.contains("experiment")) {
    const json& ex = doc["experiment"];
    auto bad = [&](const std::string& key, const std::string& msg) {
      issues.push_back({"/experiment/" + key, msg});
    };
    if (!ex.is_object()) {
      issues.push_back({"/experiment", "expected an object"});
    } else {
      if (ex.contains("seed")) {
        if (ex["seed"].is_number_unsigned()) cfg.seed = ex["seed"].get<std::uint64_t>();
        else bad("seed", "expected a nonnegative integer");
      }
      if (ex.contains("reps")) {
        if (!ex["reps"].is_number_integer()) bad("reps", "expected an integer");
        else if (ex["reps"].get<long long>() < 1) bad("reps", "reps must be >= 1");
        else cfg.reps = ex["reps"].get<long long>();
      }
      if (ex.contains("strategy")) {
        if (ex["strategy"].is_string()) cfg.strategy = ex["strategy"].get<std::string>();
        else bad("strategy", "expected a string");
      }
      if (ex.contains("threads")) {
        if (ex["threads"].is_number_unsigned() && ex["threads"].get<unsigned>() >= 1)
          cfg.threads = ex["threads"].get<unsigned>();
        else bad("threads", "expected a positive integer");
      }
      if (ex.contains("enumeration_cap_bits")) {
        if (ex["enumeration_cap_bits"].is_number_integer())
          cfg.cap_bits = ex["enumeration_cap_bits"].get<int>();
        else bad("enumeration_cap_bits", "expected an integer");
      }
      if (ex.contains("out")) {
        if (ex["out"].is_string()) cfg.out_dir = ex["out"].get<std::string>();
        else bad("out", "expected a string");
      }
      if (ex.contains("format")) {
        if (ex["format"] == "json" || ex["format"] == "csv") cfg.format = ex["format"].get<std::string>();
        else bad("format", "expected \"json\" or \"csv\"");
      }
      if (ex.contains("trajectories")) {
        if (ex["trajectories"].is_number_unsigned()) cfg.trajectories = ex["trajectories"].get<std::size_t>();
        else bad("trajectories", "expected a nonnegative integer");
      }
      if (ex.contains("decompose")) {
        if (ex["decompose"].is_boolean()) cfg.decompose = ex["decompose"].get<bool>();
        else bad("decompose", "expected a boolean");
      }
      if (ex.contains("strategies")) {
        const json& s = ex["strategies"];
        if (!s.is_array()) bad("strategies", "expected an array of strategy names");
        else
          for (std::size_t k = 0; k < s.size(); ++k) {
            if (s[k].is_string()) cfg.strategies.push_back(s[k].get<std::string>());
            else bad("strategies/" + std::to_string(k), "expected a string");
          }
      }
      if (ex.contains("sweep")) {
        const json& grid = ex["sweep"].is_object() && ex["sweep"].contains("drop_prob")
                               ? ex["sweep"]["drop_prob"]
                               : json();
        if (!grid.is_array()) {
          bad("sweep", "expected {\"drop_prob\": [p, ...]}");
        } else {
          for (std::size_t k = 0; k < grid.size(); ++k) {
            const std::string where = "sweep/drop_prob/" + std::to_string(k);
            if (!grid[k].is_number()) bad(where, "expected a number");
            else if (grid[k].get<double>() < 0.0 || grid[k].get<double>() > 1.0)
              bad(where, "drop probability must lie in [0, 1]");
            else cfg.sweep.push_back(grid[k].get<double>());
          }
        }
      }
    }
  }

  auto is_named = [](const std::string& s) {
    return s == "optimal" || s == "zero" || s == "common-only";
  };
  auto check_strategy_file = [&](const std::string& s, const std::string& pointer) {
    if (is_named(s)) return;
    fs::path p(s);
    if (p.is_relative()) p = fs::path(base_dir) / p;
    if (!fs::exists(p)) issues.push_back({pointer, "strategy file not found: " + p.string()});
  };
  check_strategy_file(cfg.strategy, "/experiment/strategy");
  for (std::size_t k = 0; k < cfg.strategies.size(); ++k)
    check_strategy_file(cfg.strategies[k], "/experiment/strategies/" + std::to_string(k));

  if (!issues.empty()) throw ParseError(std::move(issues));
  return cfg;
}

ExperimentConfig parse_config(const std::string& path, std::istream& in) {
  if (path == "-") return parse_config_text(read_stream(in), ".");
  std::ifstream file(path);
  if (!file) throw ParseError(std::vector<ParseIssue>{{"", "cannot open config file: " + path}});
  const std::string base = fs::path(path).parent_path().string();
  return parse_config_text(read_stream(file), base.empty() ? "." : base);
}

namespace {

struct Flags {
  std::string config = "-";
  std::optional<std::uint64_t> seed;
  std::optional<long long> reps;
  std::optional<std::string> out;
  std::optional<std::string> strategy;
  std::optional<std::string> format;
  std::optional<unsigned> threads;
  std::optional<std::size_t> trajectories;
  std::optional<int> cap_bits;
  bool decompose = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Session {
 public:
  Session(ExperimentConfig cfg, Streams io) : cfg_(std::move(cfg)), io_(io) {}

  int validate() {
    const ValidationReport report = validate_spec(cfg_.spec);
    emit("validation.json", validation_to_json(report).dump(2) + "\n", csv_violations(report));
    summary() << (report.ok() ? "spec ok" : "spec has " + std::to_string(report.violations.size()) + " violation(s)") << "\n";
    for (const auto& v : report.violations)
      summary() << "  [" << v.rule << "] " << v.location << ": " << v.message << "\n";
    if (report.ok()) return kSuccess;
    return report.has_rule("dimension") ? kUsageError : kNumericalFailure;
  }

  int synthesize() {
    require_valid();
    const RiccatiSchedule schedule = lqnet::synthesize(cfg_.spec);
    emit("schedule.json", schedule_to_json(schedule).dump(2) + "\n", std::nullopt);
    summary() << "optimal cost " << fmt(optimal_cost_closed_form(cfg_.spec, schedule), 15) << "\n";
    return kSuccess;
  }

  int simulate() {
    require_valid();
    const auto [reps, seed] = require_mc();
    const RiccatiSchedule schedule = lqnet::synthesize(cfg_.spec);
    const LinearStrategy strategy = resolve(cfg_.strategy, schedule);
    const SimulationOptions options{cfg_.threads, {}};
    const CostReport report = monte_carlo(cfg_.spec, strategy, reps, seed, options);
    std::optional<CostDecomposition> decomposition;
    if (cfg_.decompose)
      decomposition = decomposition_check(cfg_.spec, schedule, strategy, reps, seed, options);
    const std::string csv = "reps,mean,se,seed\n" + std::to_string(report.reps) + "," +
                            format_number(report.mean) + "," + format_number(report.se) + "," +
                            std::to_string(report.seed) + "\n";
    emit("cost_report.json",
         cost_report_to_json(report, decomposition ? &*decomposition : nullptr).dump(2) + "\n",
         csv);
    if (cfg_.trajectories > 0) {
      const Simulator sim(cfg_.spec, strategy, options);
      std::string dump;
      for (std::size_t k = 0; k < std::min<std::size_t>(cfg_.trajectories, reps); ++k)
        dump += trajectory_csv(cfg_.spec, sim.run(seed, k), k == 0, k);
      write_file("trajectories.csv", dump);
    }
    summary() << "mean cost " << fmt(report.mean) << " (se " << fmt(report.se, 4) << ", "
              << report.reps << " reps)\n";
    return kSuccess;
  }

  int verify();
  int compare();

 private:
  void require_valid() const {
    const ValidationReport report = validate_spec(cfg_.spec);
    if (report.ok()) return;
    std::ostringstream os;
    for (const auto& v : report.violations)
      os << "[" << v.rule << "] " << v.location << ": " << v.message << "\n";
    if (report.has_rule("dimension")) throw UsageError(os.str());
    throw NumericalError(os.str());
  }

  std::pair<std::size_t, std::uint64_t> require_mc() const {
    if (!cfg_.reps) throw UsageError("reps must be given (--reps or experiment.reps)");
    if (*cfg_.reps < 1) throw UsageError("reps must be >= 1");
    if (!cfg_.seed) throw UsageError("seed must be given (--seed or experiment.seed)");
    return {static_cast<std::size_t>(*cfg_.reps), *cfg_.seed};
  }

  LinearStrategy resolve(const std::string& name, const RiccatiSchedule& schedule) const {
    if (name == "optimal") return LinearStrategy::optimal(schedule);
    if (name == "zero") return LinearStrategy::zero(cfg_.spec);
    if (name == "common-only") {
      LinearStrategy s = LinearStrategy::optimal(schedule);
      for (auto& seq : s.local_gain)
        for (auto& L : seq) L.setZero();
      return s;
    }
    fs::path p(name);
    if (p.is_relative() && !fs::exists(p)) p = fs::path(cfg_.base_dir) / p;
    std::ifstream file(p);
    if (!file) throw UsageError("cannot open strategy file: " + p.string());
    json doc;
    try {
      doc = json::parse(read_stream(file));
    } catch (const json::parse_error& e) {
      throw ParseError(std::vector<ParseIssue>{{"", "strategy file " + p.string() + ": " + e.what()}});
    }
    return strategy_from_json(doc, cfg_.spec);
  }

  std::ostream& summary() { return cfg_.out_dir ? io_.out : io_.err; }

  void write_file(const std::string& name, const std::string& content) {
    if (!cfg_.out_dir) return;
    fs::create_directories(*cfg_.out_dir);
    std::ofstream file(fs::path(*cfg_.out_dir) / name, std::ios::binary);
    file << content;
  }

  // Machine output goes to --out when given, otherwise to stdout.
  void emit(const std::string& name, const std::string& json_text,
            const std::optional<std::string>& csv_text) {
    const bool csv = cfg_.format == "csv" && csv_text;
    if (cfg_.out_dir) {
      write_file(name, json_text);
      if (csv) write_file(fs::path(name).replace_extension(".csv").string(), *csv_text);
    } else {
      io_.out << (csv ? *csv_text : json_text);
    }
  }

  static std::string csv_violations(const ValidationReport& report) {
    std::string out = "rule,location,message\n";
    for (const auto& v : report.violations)
      out += v.rule + "," + v.location + ",\"" + v.message + "\"\n";
    return out;
  }

  ExperimentConfig cfg_;
  Streams io_;
};

struct Check {
  std::string name;
  bool passed;
  std::string detail;
};

int Session::verify() {
  require_valid();
  const auto [reps, seed] = require_mc();
  const SystemSpec& spec = cfg_.spec;
  const SimulationOptions options{cfg_.threads, {}};
  std::vector<Check> checks;
  auto check = [&](std::string name, bool ok, std::string detail) {
    checks.push_back({std::move(name), ok, std::move(detail)});
  };

  const RiccatiSchedule schedule = lqnet::synthesize(spec);
  const double j_star = optimal_cost_closed_form(spec, schedule);
  const GlobalMatrices g = assemble_global(spec);

  {
    bool ok = true;
    double worst = 0.0;
    for (int t = 0; t < spec.horizon; ++t) {
      const Matrix identity = spec.Q[t] + g.A.transpose() * schedule.P[t + 1] * g.A -
                              schedule.K[t].transpose() * schedule.Delta[t] * schedule.K[t];
      const double rel = (schedule.P[t] - identity).norm() / std::max(1.0, schedule.P[t].norm());
      worst = std::max(worst, rel);
      ok &= rel <= 1e-10 && is_psd(schedule.P[t]) && is_pd(schedule.Delta[t]);
      for (int i = 0; i < spec.N; ++i) {
        ok &= is_psd(schedule.P_tilde[i][t]) && is_psd(schedule.pi(i, t + 1)) &&
              is_pd(schedule.Delta_tilde[i][t]);
        const int r = spec.state_offset(i);
        const Matrix Pii = schedule.P[t + 1].block(r, r, spec.state_dims[i], spec.state_dims[i]);
        ok &= average_riccati(spec.drop_prob[i], Pii, schedule.P_tilde[i][t + 1]) ==
              schedule.pi(i, t + 1);
      }
    }
    check("schedule invariants", ok, "operator identity rel err " + fmt(worst, 3));
  }

  const bool centralized = std::all_of(spec.drop_prob.begin(), spec.drop_prob.end(),
                                       [](double p) { return p == 0.0; });
  if (centralized) {
    const CentralizedLqr lqr = centralized_lqr(spec);
    double worst = 0.0;
    for (int t = 0; t < spec.horizon; ++t)
      worst = std::max(worst, (lqr.K[t] - schedule.K[t]).cwiseAbs().maxCoeff());
    check("centralized reduction", worst <= 1e-9, "max gain difference " + fmt(worst, 3));
  }

  const LinearStrategy optimal = LinearStrategy::optimal(schedule);
  if (static_cast<long>(spec.N) * (spec.horizon + 1) <= cfg_.cap_bits) {
    const EnumeratedCost exact = exact_cost_enumerated(spec, optimal, {cfg_.cap_bits, false});
    const double rel = std::abs(exact.expected_cost - j_star) / std::max(1.0, std::abs(j_star));
    check("enumerated = closed form", rel <= 1e-9 && std::abs(exact.total_probability - 1) <= 1e-12,
          "exact " + fmt(exact.expected_cost, 15) + " vs " + fmt(j_star, 15));
  } else {
    check("enumerated = closed form", true, "skipped: instance exceeds enumeration cap");
  }

  const CostReport mc = monte_carlo(spec, optimal, reps, seed, options);
  check("monte carlo ~ closed form", std::abs(mc.mean - j_star) <= 3 * mc.se + 1e-12 * std::abs(j_star),
        "mean " + fmt(mc.mean) + " se " + fmt(mc.se, 4) + " vs " + fmt(j_star));

  const OrthogonalityReport ortho = orthogonality_check(Simulator(spec, optimal, options), reps, seed);
  check("delivered packets reset error", ortho.delivered_nonzero_error == 0,
        std::to_string(ortho.delivered_nonzero_error) + " violations");
  check("orthogonality (4 se)", ortho.failures(4.0).empty(),
        "max |z| " + fmt(ortho.max_abs_z(), 4) + " over " + std::to_string(ortho.entries.size()) +
            " moments");

  for (const std::string name : {"optimal", "zero"}) {
    const LinearStrategy s = resolve(name, schedule);
    const CostDecomposition d = decomposition_check(spec, schedule, s, reps, seed, options);
    check("decomposition residual (" + name + ")", d.residual.within(3.0) || std::abs(d.residual.estimate) <= 1e-9 * (1 + std::abs(d.total_cost.estimate)),
          "residual " + fmt(d.residual.estimate, 4) + " se " + fmt(d.residual.se, 4));
    if (name == std::string("optimal")) {
      bool ok = d.control_penalty_common.within(3.0) ||
                std::abs(d.control_penalty_common.estimate) <= 1e-9;
      for (const auto& e : d.control_penalty_local) ok &= e.within(3.0) || std::abs(e.estimate) <= 1e-9;
      check("optimal penalties vanish", ok, "common " + fmt(d.control_penalty_common.estimate, 4));
    } else {
      check("lower bound (zero strategy)", d.total_cost.estimate >= j_star - 3 * d.total_cost.se,
            "cost " + fmt(d.total_cost.estimate) + " vs " + fmt(j_star));
    }
  }

  bool all = true;
  json results = json::array();
  for (const auto& c : checks) {
    all &= c.passed;
    summary() << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
    results.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  const json doc = {{"passed", all}, {"seed", seed}, {"reps", reps}, {"optimal_cost", j_star},
                    {"checks", results}};
  emit("verify.json", doc.dump(2) + "\n", std::nullopt);
  return all ? kSuccess : kVerificationFailure;
}

int Session::compare() {
  require_valid();
  if (cfg_.sweep.empty())
    throw UsageError("compare needs experiment.sweep.drop_prob in the config");
  std::vector<std::string> strategies = cfg_.strategies;
  if (strategies.empty()) strategies = {cfg_.strategy};
  const bool with_mc = cfg_.reps.has_value();
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  if (with_mc) std::tie(reps, seed) = require_mc();
  const SimulationOptions options{cfg_.threads, {}};

  std::ostringstream csv;
  csv << "subsystem,drop_prob,strategy,j_star,exact_cost,mc_mean,mc_se\n";
  json rows = json::array();
  for (int i = 0; i < cfg_.spec.N; ++i) {
    double previous = -std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (double p : cfg_.sweep) {
      SystemSpec spec = cfg_.spec;
      spec.drop_prob[i] = p;
      const RiccatiSchedule schedule = lqnet::synthesize(spec);
      const double j_star = optimal_cost_closed_form(spec, schedule);
      monotone &= j_star >= previous - 1e-12 * std::abs(j_star);
      previous = j_star;
      for (const auto& name : strategies) {
        const LinearStrategy s = resolve(name, schedule);
        std::optional<double> exact;
        if (static_cast<long>(spec.N) * (spec.horizon + 1) <= cfg_.cap_bits)
          exact = exact_cost_enumerated(spec, s, {cfg_.cap_bits, false}).expected_cost;
        std::optional<CostReport> mc;
        if (with_mc) mc = monte_carlo(spec, s, reps, seed, options);
        csv << i << "," << format_number(p) << "," << name << "," << format_number(j_star) << ",";
        if (exact) csv << format_number(*exact);
        csv << ",";
        if (mc) csv << format_number(mc->mean) << "," << format_number(mc->se);
        else csv << ",";
        csv << "\n";
        json row = {{"subsystem", i}, {"drop_prob", p}, {"strategy", name}, {"j_star", j_star}};
        if (exact) row["exact_cost"] = *exact;
        if (mc) row["mc_mean"] = mc->mean, row["mc_se"] = mc->se;
        rows.push_back(row);
      }
    }
    summary() << "subsystem " << i << ": optimal cost "
              << (monotone ? "nondecreasing" : "NOT monotone") << " over the drop grid\n";
  }
  if (cfg_.out_dir) {
    write_file("compare.csv", csv.str());
    write_file("compare.json", json{{"rows", rows}}.dump(2) + "\n");
  } else {
    io_.out << (cfg_.format == "json" ? json{{"rows", rows}}.dump(2) + "\n" : csv.str());
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, Streams io) {
  CLI::App app{"Optimal local/remote controller synthesis over packet-drop uplinks"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  app.add_option("--config", flags.config, "Experiment config (JSON); '-' reads stdin");
  app.add_option("--seed", flags.seed, "Root RNG seed");
  app.add_option("--reps", flags.reps, "Monte Carlo replications");
  app.add_option("--out", flags.out, "Output directory");
  app.add_option("--strategy", flags.strategy, "optimal | zero | common-only | <path>");
  app.add_option("--format", flags.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--threads", flags.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--trajectories", flags.trajectories, "Trajectories to dump (simulate)");
  app.add_option("--cap-bits", flags.cap_bits, "Enumeration cap in channel bits");
  app.add_flag("--decompose", flags.decompose, "Add the cost decomposition (simulate)");

  const char* names[] = {"validate", "synthesize", "simulate", "verify", "compare"};
  const char* help[] = {"Check the problem instance against the model assumptions",
                        "Compute the Riccati schedule and optimal gains",
                        "Monte Carlo cost of a strategy",
                        "Run the verification battery (oracles, orthogonality, decomposition)",
                        "Cost table over drop-probability sweeps"};
  for (int k = 0; k < 5; ++k) app.add_subcommand(names[k], help[k]);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, io.out, io.err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, io.out, io.err);
    return kUsageError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    ExperimentConfig cfg = parse_config(flags.config, io.in);
    if (flags.seed) cfg.seed = flags.seed;
    if (flags.reps) cfg.reps = flags.reps;
    if (flags.out) cfg.out_dir = flags.out;
    if (flags.strategy) cfg.strategy = *flags.strategy;
    if (flags.format) cfg.format = *flags.format;
    if (flags.threads) cfg.threads = *flags.threads;
    if (flags.trajectories) cfg.trajectories = *flags.trajectories;
    if (flags.cap_bits) cfg.cap_bits = *flags.cap_bits;
    cfg.decompose |= flags.decompose;

    Session session(std::move(cfg), io);
    if (command == "validate") return session.validate();
    if (command == "synthesize") return session.synthesize();
    if (command == "simulate") return session.simulate();
    if (command == "verify") return session.verify();
    return session.compare();
  } catch (const ParseError& e) {
    io.err << "config error:\n" << e.what() << "\n";
    return kUsageError;
  } catch (const UsageError& e) {
    io.err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const StructuralError& e) {
    io.err << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const NumericalError& e) {
    io.err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

}  // namespace lqnet::cli
