#include <lqnet/model.hpp>

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lqnet {

std::string to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::uniform: return "uniform";
    case NoiseFamily::rademacher: return "rademacher-scaled";
  }
  return "gaussian";
}

NoiseFamily noise_family_from_string(const std::string& name) {
  if (name == "gaussian") return NoiseFamily::gaussian;
  if (name == "uniform") return NoiseFamily::uniform;
  if (name == "rademacher-scaled" || name == "rademacher") return NoiseFamily::rademacher;
  throw StructuralError("unknown noise family '" + name + "'");
}

int SystemSpec::state_dim() const {
  return std::accumulate(state_dims.begin(), state_dims.end(), 0);
}

int SystemSpec::action_dim() const {
  return remote_action_dim +
         std::accumulate(local_action_dims.begin(), local_action_dims.end(), 0);
}

int SystemSpec::state_offset(int i) const {
  return std::accumulate(state_dims.begin(), state_dims.begin() + i, 0);
}

int SystemSpec::local_action_offset(int i) const {
  return remote_action_dim +
         std::accumulate(local_action_dims.begin(), local_action_dims.begin() + i, 0);
}

SystemSpec SystemSpec::with_constant_data(int horizon, std::vector<Matrix> A_blocks,
                                          std::vector<Matrix> B_remote,
                                          std::vector<Matrix> B_local, const Matrix& Q,
                                          const Matrix& M, const Matrix& R,
                                          const Matrix& Q_terminal,
                                          std::vector<Matrix> sigma_x0,
                                          const std::vector<Matrix>& sigma_w,
                                          std::vector<double> drop_prob) {
  SystemSpec spec;
  spec.N = static_cast<int>(A_blocks.size());
  spec.horizon = horizon;
  for (int i = 0; i < spec.N; ++i) {
    spec.state_dims.push_back(static_cast<int>(A_blocks[i].rows()));
    spec.local_action_dims.push_back(static_cast<int>(B_local[i].cols()));
  }
  spec.remote_action_dim = B_remote.empty() ? 0 : static_cast<int>(B_remote[0].cols());
  spec.A_blocks = std::move(A_blocks);
  spec.B_remote = std::move(B_remote);
  spec.B_local = std::move(B_local);
  spec.Q.assign(horizon, Q);
  spec.M.assign(horizon, M);
  spec.R.assign(horizon, R);
  spec.Q_terminal = Q_terminal;
  spec.sigma_x0 = std::move(sigma_x0);
  for (const auto& s : sigma_w) spec.sigma_w.emplace_back(horizon, s);
  spec.drop_prob = std::move(drop_prob);
  return spec;
}

bool ValidationReport::has_rule(const std::string& rule) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.rule == rule; });
}

namespace {

double spectral_scale(const Eigen::VectorXd& eigenvalues) {
  double norm = eigenvalues.size() ? eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  return std::max(1.0, norm);
}

Eigen::VectorXd symmetric_eigenvalues(const Matrix& X) {
  if (X.size() == 0) return Eigen::VectorXd();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(X), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

std::string shape(const Matrix& X) {
  std::ostringstream os;
  os << X.rows() << "x" << X.cols();
  return os.str();
}

}  // namespace

bool is_symmetric(const Matrix& X, double rel_tol) {
  if (X.rows() != X.cols()) return false;
  if (X.size() == 0) return true;
  double scale = std::max(1.0, X.cwiseAbs().maxCoeff());
  return (X - X.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool is_psd(const Matrix& X) {
  if (!is_symmetric(X)) return false;
  Eigen::VectorXd ev = symmetric_eigenvalues(X);
  if (ev.size() == 0) return true;
  return ev.minCoeff() >= -kPsdTolerance * spectral_scale(ev);
}

bool is_pd(const Matrix& X) {
  if (!is_symmetric(X)) return false;
  Eigen::VectorXd ev = symmetric_eigenvalues(X);
  if (ev.size() == 0) return true;
  return ev.minCoeff() >= kPdTolerance * spectral_scale(ev);
}

ValidationReport validate_spec(const SystemSpec& spec) {
  ValidationReport report;
  auto fail = [&](std::string rule, std::string location, std::string message) {
    report.violations.push_back({std::move(rule), std::move(location), std::move(message)});
  };
  auto expect_shape = [&](const Matrix& X, long rows, long cols, const std::string& where) {
    if (X.rows() != rows || X.cols() != cols) {
      std::ostringstream os;
      os << "expected " << rows << "x" << cols << ", got " << shape(X);
      fail("dimension", where, os.str());
      return false;
    }
    return true;
  };

  if (spec.N < 1) fail("dimension", "N", "need at least one subsystem");
  if (spec.horizon < 1) fail("dimension", "horizon", "horizon must be >= 1");
  if (spec.remote_action_dim < 0) fail("dimension", "remote_action_dim", "negative dimension");
  const auto N = static_cast<std::size_t>(std::max(spec.N, 0));
  const auto T = static_cast<std::size_t>(std::max(spec.horizon, 0));
  auto check_count = [&](std::size_t have, std::size_t want, const std::string& what) {
    if (have != want) {
      fail("dimension", what,
           "expected " + std::to_string(want) + " entries, got " + std::to_string(have));
      return false;
    }
    return true;
  };
  bool counts_ok = check_count(spec.state_dims.size(), N, "state_dims") &
                   check_count(spec.local_action_dims.size(), N, "local_action_dims") &
                   check_count(spec.A_blocks.size(), N, "A") &
                   check_count(spec.B_remote.size(), N, "B_remote") &
                   check_count(spec.B_local.size(), N, "B_local") &
                   check_count(spec.sigma_x0.size(), N, "sigma_x0") &
                   check_count(spec.sigma_w.size(), N, "sigma_w") &
                   check_count(spec.drop_prob.size(), N, "drop_prob") &
                   check_count(spec.Q.size(), T, "Q") & check_count(spec.M.size(), T, "M") &
                   check_count(spec.R.size(), T, "R");
  if (!counts_ok || spec.N < 1 || spec.horizon < 1) return report;

  bool dims_ok = true;
  for (std::size_t i = 0; i < N; ++i) {
    const std::string idx = "[" + std::to_string(i) + "]";
    const int n = spec.state_dims[i];
    const int m = spec.local_action_dims[i];
    if (n < 0 || m < 0) {
      fail("dimension", "subsystems" + idx, "negative dimension");
      dims_ok = false;
      continue;
    }
    dims_ok &= expect_shape(spec.A_blocks[i], n, n, "A" + idx);
    dims_ok &= expect_shape(spec.B_remote[i], n, spec.remote_action_dim, "B_remote" + idx);
    dims_ok &= expect_shape(spec.B_local[i], n, m, "B_local" + idx);
    if (expect_shape(spec.sigma_x0[i], n, n, "sigma_x0" + idx) && !is_psd(spec.sigma_x0[i]))
      fail("A2", "sigma_x0" + idx, "covariance not symmetric PSD");
    if (check_count(spec.sigma_w[i].size(), T, "sigma_w" + idx)) {
      for (std::size_t t = 0; t < T; ++t) {
        const std::string where = "sigma_w" + idx + "[" + std::to_string(t) + "]";
        if (expect_shape(spec.sigma_w[i][t], n, n, where) && !is_psd(spec.sigma_w[i][t]))
          fail("A2", where, "covariance not symmetric PSD");
      }
    }
    const double p = spec.drop_prob[i];
    if (!(p >= 0.0 && p <= 1.0)) fail("drop_prob", "drop_prob" + idx, "must lie in [0, 1]");
  }
  if (!dims_ok) return report;

  const int n = spec.state_dim();
  const int m = spec.action_dim();
  expect_shape(spec.Q_terminal, n, n, "Q_terminal");
  if (spec.Q_terminal.rows() == n && spec.Q_terminal.cols() == n && !is_psd(spec.Q_terminal))
    fail("A3", "Q_terminal", "terminal cost not symmetric PSD");
  for (std::size_t t = 0; t < T; ++t) {
    const std::string idx = "[" + std::to_string(t) + "]";
    bool ok = expect_shape(spec.Q[t], n, n, "Q" + idx);
    ok &= expect_shape(spec.M[t], n, m, "M" + idx);
    ok &= expect_shape(spec.R[t], m, m, "R" + idx);
    if (!ok) continue;
    Matrix joint(n + m, n + m);
    joint << spec.Q[t], spec.M[t], spec.M[t].transpose(), spec.R[t];
    if (!is_symmetric(spec.Q[t]) || !is_symmetric(spec.R[t]))
      fail("A3", "Q/R" + idx, "cost matrix not symmetric");
    else if (!is_psd(joint))
      fail("A3", "[[Q,M],[M',R]]" + idx, "joint cost matrix not PSD");
    if (!is_pd(spec.R[t])) fail("A3", "R" + idx, "R not positive definite");
  }
  return report;
}

GlobalMatrices assemble_global(const SystemSpec& spec) {
  if (spec.N < 1 || spec.A_blocks.size() != static_cast<std::size_t>(spec.N) ||
      spec.B_remote.size() != spec.A_blocks.size() ||
      spec.B_local.size() != spec.A_blocks.size())
    throw StructuralError("assemble_global: block lists do not match N");
  const int n = spec.state_dim();
  const int m = spec.action_dim();
  GlobalMatrices g{Matrix::Zero(n, n), Matrix::Zero(n, m)};
  for (int i = 0; i < spec.N; ++i) {
    const int ni = spec.state_dims[i];
    const int mi = spec.local_action_dims[i];
    const int r = spec.state_offset(i);
    if (spec.A_blocks[i].rows() != ni || spec.A_blocks[i].cols() != ni ||
        spec.B_remote[i].rows() != ni || spec.B_remote[i].cols() != spec.remote_action_dim ||
        spec.B_local[i].rows() != ni || spec.B_local[i].cols() != mi)
      throw StructuralError("assemble_global: block dimension mismatch in subsystem " +
                            std::to_string(i));
    g.A.block(r, r, ni, ni) = spec.A_blocks[i];
    g.B.block(r, 0, ni, spec.remote_action_dim) = spec.B_remote[i];
    g.B.block(r, spec.local_action_offset(i), ni, mi) = spec.B_local[i];
  }
  return g;
}

BlockSelector BlockSelector::local(BlockKind kind, int i) {
  switch (kind) {
    case BlockKind::M: return {kind, i, i + 1};
    case BlockKind::R: return {kind, i + 1, i + 1};
    default: return {kind, i, i};
  }
}

Matrix extract_block(const Matrix& matrix, const SystemSpec& spec,
                     const BlockSelector& sel) {
  auto state_range = [&](int i) {
    if (i < 0 || i >= spec.N) throw std::out_of_range("state block index out of range");
    return std::pair{spec.state_offset(i), spec.state_dims[i]};
  };
  auto action_range = [&](int j) {
    if (j < 0 || j > spec.N) throw std::out_of_range("action block index out of range");
    if (j == 0) return std::pair{0, spec.remote_action_dim};
    return std::pair{spec.local_action_offset(j - 1), spec.local_action_dims[j - 1]};
  };
  std::pair<int, int> rows, cols;
  long want_rows = spec.state_dim(), want_cols = spec.state_dim();
  switch (sel.kind) {
    case BlockKind::Q:
    case BlockKind::P:
      rows = state_range(sel.row);
      cols = state_range(sel.col);
      break;
    case BlockKind::M:
      rows = state_range(sel.row);
      cols = action_range(sel.col);
      want_cols = spec.action_dim();
      break;
    case BlockKind::R:
      rows = action_range(sel.row);
      cols = action_range(sel.col);
      want_rows = want_cols = spec.action_dim();
      break;
  }
  if (matrix.rows() != want_rows || matrix.cols() != want_cols)
    throw StructuralError("extract_block: matrix is " + shape(matrix) +
                          ", layout expects " + std::to_string(want_rows) + "x" +
                          std::to_string(want_cols));
  return matrix.block(rows.first, cols.first, rows.second, cols.second);
}

Matrix global_initial_covariance(const SystemSpec& spec) {
  const int n = spec.state_dim();
  Matrix S = Matrix::Zero(n, n);
  for (int i = 0; i < spec.N; ++i) {
    const int r = spec.state_offset(i);
    S.block(r, r, spec.state_dims[i], spec.state_dims[i]) = spec.sigma_x0[i];
  }
  return S;
}

Matrix global_noise_covariance(const SystemSpec& spec, int t) {
  const int n = spec.state_dim();
  Matrix S = Matrix::Zero(n, n);
  for (int i = 0; i < spec.N; ++i) {
    const int r = spec.state_offset(i);
    S.block(r, r, spec.state_dims[i], spec.state_dims[i]) = spec.sigma_w[i][t];
  }
  return S;
}

}  // namespace lqnet
