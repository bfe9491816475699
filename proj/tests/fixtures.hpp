#pragma once

#include <lqnet/model.hpp>

#include <random>
#include <vector>

namespace lqnet::testing {

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r ? static_cast<Eigen::Index>(rows.begin()->size()) : 0;
  Matrix m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

// Two scalar subsystems, one remote and two local scalar actions, coupled
// state and action costs. Frozen values for it come from
// tests/oracles/frozen_values.py.
inline SystemSpec reference_instance(double p1 = 0.3, double p2 = 0.7, int horizon = 3) {
  return SystemSpec::with_constant_data(
      horizon, {scalar(1.2), scalar(0.8)}, {scalar(0.5), scalar(1.0)},
      {scalar(1.0), scalar(0.7)}, mat({{2.0, 0.5}, {0.5, 1.0}}),
      mat({{0.1, 0.2, 0.0}, {0.0, 0.0, 0.1}}),
      mat({{1.0, 0.1, 0.1}, {0.1, 0.5, 0.0}, {0.1, 0.0, 0.8}}), mat({{1.0, 0.2}, {0.2, 1.5}}),
      {scalar(1.0), scalar(2.0)}, {scalar(0.5), scalar(0.3)}, {p1, p2});
}

inline constexpr double kReferenceOptimalCost = 8.673879487992588;
inline constexpr double kReferenceZeroStrategyCost = 24.309935999999997;
inline constexpr double kReferenceCentralizedCost = 8.386628190206872;

// Three scalar subsystems with a shared remote actuator.
inline SystemSpec three_subsystem_instance(std::vector<double> p = {0.2, 0.5, 0.8},
                                           int horizon = 3) {
  Matrix Q = mat({{1.5, 0.3, 0.1}, {0.3, 1.0, 0.2}, {0.1, 0.2, 2.0}});
  Matrix M = Matrix::Zero(3, 4);
  M(0, 1) = 0.1;
  M(2, 3) = -0.1;
  Matrix R = mat({{1.0, 0.1, 0.0, 0.1}, {0.1, 0.6, 0.0, 0.0}, {0.0, 0.0, 0.9, 0.05},
                  {0.1, 0.0, 0.05, 0.7}});
  return SystemSpec::with_constant_data(
      horizon, {scalar(1.1), scalar(0.9), scalar(1.3)}, {scalar(0.4), scalar(0.8), scalar(0.6)},
      {scalar(1.0), scalar(0.5), scalar(0.9)}, Q, M, R, Matrix::Identity(3, 3),
      {scalar(1.0), scalar(0.5), scalar(1.5)}, {scalar(0.4), scalar(0.2), scalar(0.3)},
      std::move(p));
}

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = normal(rng);
  return m;
}

inline Matrix random_psd(std::mt19937_64& rng, int n, double floor = 0.0) {
  Matrix F = random_matrix(rng, n, n);
  return F * F.transpose() / n + floor * Matrix::Identity(n, n);
}

// Random joint cost [[Q, M], [M', R]] = F F' + floor * I, so R is positive
// definite and the joint matrix PSD.
inline void random_cost(std::mt19937_64& rng, int n, int m, Matrix& Q, Matrix& M, Matrix& R,
                        double floor = 0.1) {
  Matrix F = random_matrix(rng, n + m, n + m);
  Matrix W = F * F.transpose() / (n + m);
  W.bottomRightCorner(m, m) += floor * Matrix::Identity(m, m);
  Q = W.topLeftCorner(n, n);
  M = W.topRightCorner(n, m);
  R = W.bottomRightCorner(m, m);
}

// Random instance with given subsystem state / action dimensions.
inline SystemSpec random_instance(std::mt19937_64& rng, const std::vector<int>& state_dims,
                                  const std::vector<int>& local_dims, int remote_dim,
                                  int horizon, const std::vector<double>& p) {
  const int N = static_cast<int>(state_dims.size());
  std::vector<Matrix> A, Br, Bl, Sx, Sw;
  int n = 0, m = remote_dim;
  for (int i = 0; i < N; ++i) {
    A.push_back(random_matrix(rng, state_dims[i], state_dims[i], 0.6));
    Br.push_back(random_matrix(rng, state_dims[i], remote_dim, 0.7));
    Bl.push_back(random_matrix(rng, state_dims[i], local_dims[i], 0.7));
    Sx.push_back(random_psd(rng, state_dims[i], 0.1));
    Sw.push_back(random_psd(rng, state_dims[i], 0.05));
    n += state_dims[i];
    m += local_dims[i];
  }
  Matrix Q, M, R;
  random_cost(rng, n, m, Q, M, R);
  return SystemSpec::with_constant_data(horizon, A, Br, Bl, Q, M, R, random_psd(rng, n), Sx, Sw,
                                        p);
}

}  // namespace lqnet::testing
