#include <lqnet/io.hpp>

#include <iomanip>
#include <sstream>

namespace lqnet {

namespace {

std::string join_issues(const std::vector<ParseIssue>& issues) {
  std::string out;
  for (const auto& issue : issues) {
    if (!out.empty()) out += "\n";
    out += (issue.pointer.empty() ? std::string("/") : issue.pointer) + ": " + issue.message;
  }
  return out;
}

class Reader {
 public:
  std::vector<ParseIssue> issues;

  void error(const std::string& pointer, const std::string& message) {
    issues.push_back({pointer, message});
  }

  const json* child(const json& obj, const std::string& key, const std::string& pointer,
                    bool required = true) {
    if (!obj.is_object()) {
      error(pointer, "expected an object");
      return nullptr;
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) error(pointer + "/" + key, "missing required key \"" + key + "\"");
      return nullptr;
    }
    return &*it;
  }

  std::optional<long> integer(const json& v, const std::string& pointer) {
    if (!v.is_number_integer()) {
      error(pointer, "expected an integer");
      return std::nullopt;
    }
    return v.get<long>();
  }

  std::optional<double> number(const json& v, const std::string& pointer) {
    if (!v.is_number()) {
      error(pointer, "expected a number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  static bool is_matrix(const json& v) {
    if (v.is_number()) return true;
    if (!v.is_array()) return false;
    return std::all_of(v.begin(), v.end(), [](const json& row) {
      return row.is_array() &&
             std::all_of(row.begin(), row.end(), [](const json& e) { return e.is_number(); });
    });
  }

  std::optional<Matrix> matrix(const json& v, const std::string& pointer) {
    if (v.is_number()) return Matrix::Constant(1, 1, v.get<double>());
    if (!is_matrix(v)) {
      error(pointer, "expected a matrix (array of arrays of numbers)");
      return std::nullopt;
    }
    const auto rows = static_cast<Eigen::Index>(v.size());
    const auto cols = rows ? static_cast<Eigen::Index>(v[0].size()) : 0;
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (static_cast<Eigen::Index>(v[r].size()) != cols) {
        error(pointer + "/" + std::to_string(r), "ragged matrix row");
        return std::nullopt;
      }
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = v[r][c].get<double>();
    }
    return m;
  }

  // A single matrix broadcast over the horizon, or one matrix per step.
  std::vector<Matrix> per_step(const json& v, const std::string& pointer, int horizon) {
    std::vector<Matrix> out;
    if (is_matrix(v)) {
      if (auto m = matrix(v, pointer)) out.assign(std::max(horizon, 0), *m);
      return out;
    }
    if (!v.is_array()) {
      error(pointer, "expected a matrix or an array of per-step matrices");
      return out;
    }
    if (static_cast<int>(v.size()) != horizon) {
      error(pointer, "expected " + std::to_string(horizon) + " per-step matrices, got " +
                         std::to_string(v.size()));
      return out;
    }
    for (std::size_t t = 0; t < v.size(); ++t)
      if (auto m = matrix(v[t], pointer + "/" + std::to_string(t))) out.push_back(*m);
    return out;
  }
};

}  // namespace

ParseError::ParseError(std::vector<ParseIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

SystemSpec spec_from_json(const json& doc, const std::string& base) {
  Reader rd;
  SystemSpec spec;
  if (!doc.is_object()) throw ParseError(std::vector<ParseIssue>{{base, "expected an object"}});

  if (const json* v = rd.child(doc, "N", base)) {
    if (auto n = rd.integer(*v, base + "/N")) {
      if (*n < 1) rd.error(base + "/N", "must be >= 1");
      spec.N = static_cast<int>(*n);
    }
  }
  if (const json* v = rd.child(doc, "horizon", base)) {
    if (auto T = rd.integer(*v, base + "/horizon")) {
      if (*T < 1) rd.error(base + "/horizon", "must be >= 1");
      spec.horizon = static_cast<int>(*T);
    }
  }
  if (const json* v = rd.child(doc, "noise_family", base, false)) {
    if (!v->is_string()) {
      rd.error(base + "/noise_family", "expected a string");
    } else {
      try {
        spec.noise_family = noise_family_from_string(v->get<std::string>());
      } catch (const StructuralError& e) {
        rd.error(base + "/noise_family", e.what());
      }
    }
  }
  std::optional<long> declared_remote;
  if (const json* v = rd.child(doc, "remote_action_dim", base, false))
    declared_remote = rd.integer(*v, base + "/remote_action_dim");

  const int T = spec.horizon;
  if (const json* subs = rd.child(doc, "subsystems", base)) {
    const std::string sp = base + "/subsystems";
    if (!subs->is_array()) {
      rd.error(sp, "expected an array");
    } else {
      if (spec.N >= 1 && static_cast<int>(subs->size()) != spec.N)
        rd.error(sp, "expected " + std::to_string(spec.N) + " subsystems, got " +
                         std::to_string(subs->size()));
      for (std::size_t i = 0; i < subs->size(); ++i) {
        const json& s = (*subs)[i];
        const std::string p = sp + "/" + std::to_string(i);
        Matrix A, Br, Bl, Sx;
        if (const json* v = rd.child(s, "A", p))
          if (auto m = rd.matrix(*v, p + "/A")) A = *m;
        const int ni = static_cast<int>(A.rows());
        if (A.rows() != A.cols()) rd.error(p + "/A", "must be square");
        if (const json* v = rd.child(s, "B_local", p))
          if (auto m = rd.matrix(*v, p + "/B_local")) Bl = *m;
        if (const json* v = rd.child(s, "B_remote", p, false)) {
          if (auto m = rd.matrix(*v, p + "/B_remote")) Br = *m;
        } else if (declared_remote && *declared_remote > 0) {
          rd.error(p + "/B_remote", "missing required key \"B_remote\"");
        }
        if (Br.rows() == 0) Br.resize(ni, declared_remote.value_or(0));
        if (Bl.rows() == 0 && ni > 0 && Bl.cols() == 0) Bl.resize(ni, 0);
        if (Br.rows() != ni) rd.error(p + "/B_remote", "row count must match A");
        if (Bl.rows() != ni) rd.error(p + "/B_local", "row count must match A");
        if (const json* v = rd.child(s, "sigma_x0", p))
          if (auto m = rd.matrix(*v, p + "/sigma_x0")) Sx = *m;
        std::vector<Matrix> Sw;
        if (const json* v = rd.child(s, "sigma_w", p)) Sw = rd.per_step(*v, p + "/sigma_w", T);
        double drop = 0.0;
        if (const json* v = rd.child(s, "drop_prob", p)) {
          if (auto d = rd.number(*v, p + "/drop_prob")) {
            if (!(*d >= 0.0 && *d <= 1.0))
              rd.error(p + "/drop_prob", "drop probability must lie in [0, 1]");
            drop = *d;
          }
        }
        spec.state_dims.push_back(ni);
        spec.local_action_dims.push_back(static_cast<int>(Bl.cols()));
        spec.A_blocks.push_back(std::move(A));
        spec.B_remote.push_back(std::move(Br));
        spec.B_local.push_back(std::move(Bl));
        spec.sigma_x0.push_back(std::move(Sx));
        spec.sigma_w.push_back(std::move(Sw));
        spec.drop_prob.push_back(drop);
      }
      if (!spec.B_remote.empty()) {
        spec.remote_action_dim = static_cast<int>(spec.B_remote[0].cols());
        for (std::size_t i = 1; i < spec.B_remote.size(); ++i)
          if (spec.B_remote[i].cols() != spec.remote_action_dim)
            rd.error(sp + "/" + std::to_string(i) + "/B_remote",
                     "column count differs from subsystem 0");
      }
      if (declared_remote && *declared_remote != spec.remote_action_dim)
        rd.error(base + "/remote_action_dim", "does not match B_remote column count");
    }
  }

  if (const json* cost = rd.child(doc, "cost", base)) {
    const std::string cp = base + "/cost";
    if (const json* v = rd.child(*cost, "Q", cp)) spec.Q = rd.per_step(*v, cp + "/Q", T);
    if (const json* v = rd.child(*cost, "M", cp, false)) {
      spec.M = rd.per_step(*v, cp + "/M", T);
    } else if (rd.issues.empty()) {
      spec.M.assign(T, Matrix::Zero(spec.state_dim(), spec.action_dim()));
    }
    if (const json* v = rd.child(*cost, "R", cp)) spec.R = rd.per_step(*v, cp + "/R", T);
    if (const json* v = rd.child(*cost, "Q_terminal", cp))
      if (auto m = rd.matrix(*v, cp + "/Q_terminal")) spec.Q_terminal = *m;
  }
  if (!rd.issues.empty()) throw ParseError(std::move(rd.issues));
  return spec;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

json per_step_json(const std::vector<Matrix>& ms) {
  json out = json::array();
  for (const auto& m : ms) out.push_back(matrix_to_json(m));
  return out;
}

json timed(const std::vector<Matrix>& ms, int first = 0) {
  json out = json::array();
  for (std::size_t t = first; t < ms.size(); ++t)
    out.push_back({{"t", t}, {"value", matrix_to_json(ms[t])}});
  return out;
}

json timed_nested(const std::vector<std::vector<Matrix>>& ms, int first = 0) {
  json out = json::array();
  for (const auto& seq : ms) out.push_back(timed(seq, first));
  return out;
}

json estimate_json(const Estimate& e) { return {{"estimate", e.estimate}, {"se", e.se}}; }

}  // namespace

json spec_to_json(const SystemSpec& spec) {
  json subs = json::array();
  for (int i = 0; i < spec.N; ++i)
    subs.push_back({{"A", matrix_to_json(spec.A_blocks[i])},
                    {"B_remote", matrix_to_json(spec.B_remote[i])},
                    {"B_local", matrix_to_json(spec.B_local[i])},
                    {"sigma_x0", matrix_to_json(spec.sigma_x0[i])},
                    {"sigma_w", per_step_json(spec.sigma_w[i])},
                    {"drop_prob", spec.drop_prob[i]}});
  return {{"N", spec.N},
          {"horizon", spec.horizon},
          {"remote_action_dim", spec.remote_action_dim},
          {"noise_family", to_string(spec.noise_family)},
          {"subsystems", subs},
          {"cost",
           {{"Q", per_step_json(spec.Q)},
            {"M", per_step_json(spec.M)},
            {"R", per_step_json(spec.R)},
            {"Q_terminal", matrix_to_json(spec.Q_terminal)}}}};
}

json schedule_to_json(const RiccatiSchedule& s) {
  return {{"horizon", s.horizon},
          {"N", s.subsystems()},
          {"P", timed(s.P)},
          {"P_tilde", timed_nested(s.P_tilde)},
          {"Pi", timed_nested(s.Pi, 1)},
          {"K", timed(s.K)},
          {"K_tilde", timed_nested(s.K_tilde)},
          {"Delta", timed(s.Delta)},
          {"Delta_tilde", timed_nested(s.Delta_tilde)}};
}

json validation_to_json(const ValidationReport& report) {
  json v = json::array();
  for (const auto& x : report.violations)
    v.push_back({{"rule", x.rule}, {"location", x.location}, {"message", x.message}});
  return {{"ok", report.ok()}, {"violations", v}};
}

json decomposition_to_json(const CostDecomposition& d) {
  json local = json::array();
  for (const auto& e : d.control_penalty_local) local.push_back(estimate_json(e));
  return {{"reps", d.reps},
          {"seed", d.seed},
          {"init_term", estimate_json(d.init_term)},
          {"control_penalty_common", estimate_json(d.control_penalty_common)},
          {"control_penalty_local", local},
          {"noise_term", estimate_json(d.noise_term)},
          {"total_cost", estimate_json(d.total_cost)},
          {"residual", estimate_json(d.residual)}};
}

json cost_report_to_json(const CostReport& r, const CostDecomposition* decomposition) {
  json out = {{"reps", r.reps}, {"mean", r.mean}, {"se", r.se}, {"seed", r.seed}};
  if (!r.se_defined) out["se_defined"] = false;
  if (decomposition) out["decomposition"] = decomposition_to_json(*decomposition);
  return out;
}

json orthogonality_to_json(const OrthogonalityReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"property", e.property},
                       {"t", e.t},
                       {"detail", e.detail},
                       {"estimate", e.value.estimate},
                       {"se", e.value.se}});
  return {{"samples", r.samples},
          {"delivered_nonzero_error", r.delivered_nonzero_error},
          {"max_abs_z", r.max_abs_z()},
          {"entries", entries}};
}

json enumerated_to_json(const EnumeratedCost& c) {
  return {{"expected_cost", c.expected_cost},
          {"total_probability", c.total_probability},
          {"sequences", c.sequences}};
}

std::string enumeration_csv(const SystemSpec& spec, const EnumeratedCost& cost) {
  std::ostringstream os;
  os << "gamma,probability,conditional_cost\n";
  for (const auto& s : cost.detail) {
    for (int t = 0; t <= spec.horizon; ++t) {
      if (t) os << '|';
      for (int i = 0; i < spec.N; ++i) os << (s.gamma[static_cast<std::size_t>(t) * spec.N + i] ? '1' : '0');
    }
    os << ',' << format_number(s.probability) << ',' << format_number(s.conditional_cost) << '\n';
  }
  return os.str();
}

LinearStrategy strategy_from_json(const json& doc, const SystemSpec& spec) {
  Reader rd;
  LinearStrategy s;
  // Entries may be bare matrices or {"t": .., "value": ..} objects.
  auto read_sequence = [&](const json& arr, const std::string& pointer) {
    std::vector<Matrix> out;
    if (!arr.is_array()) {
      rd.error(pointer, "expected an array of matrices");
      return out;
    }
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const std::string p = pointer + "/" + std::to_string(k);
      const json& e = arr[k];
      const json* value = &e;
      if (e.is_object()) {
        value = rd.child(e, "value", p);
        if (const json* t = rd.child(e, "t", p))
          if (t->is_number_integer() && t->get<std::size_t>() != k)
            rd.error(p + "/t", "time indices must be consecutive from 0");
        if (!value) continue;
      }
      if (auto m = rd.matrix(*value, p + (e.is_object() ? "/value" : ""))) out.push_back(*m);
    }
    return out;
  };
  if (const json* K = rd.child(doc, "K", "")) s.common_gain = read_sequence(*K, "/K");
  if (const json* Kt = rd.child(doc, "K_tilde", "")) {
    if (!Kt->is_array()) {
      rd.error("/K_tilde", "expected one gain sequence per subsystem");
    } else {
      for (std::size_t i = 0; i < Kt->size(); ++i)
        s.local_gain.push_back(read_sequence((*Kt)[i], "/K_tilde/" + std::to_string(i)));
    }
  }
  if (!rd.issues.empty()) throw ParseError(std::move(rd.issues));
  try {
    s.check(spec);
  } catch (const StructuralError& e) {
    throw ParseError(std::vector<ParseIssue>{{"", e.what()}});
  }
  return s;
}

}  // namespace lqnet
