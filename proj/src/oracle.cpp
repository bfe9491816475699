#include <lqnet/oracle.hpp>

#include <lqnet/operators.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace lqnet {

namespace {

// Closed-loop maps of xi = (x, x_hat) at one time step for a fixed strategy.
struct StepMaps {
  Matrix cost;       // 2n x 2n, E[c_t] = tr(cost * S)
  Matrix next_state; // n x 2n, x_{t+1} = next_state * xi + w
  Matrix predicted;  // n x 2n, open-loop estimate prediction
};

class Enumerator {
 public:
  Enumerator(const SystemSpec& spec, const LinearStrategy& strategy,
             const EnumerationOptions& options)
      : spec_(spec), options_(options), n_(spec.state_dim()) {
    strategy.check(spec);
    const GlobalMatrices g = assemble_global(spec);
    const Matrix I = Matrix::Identity(n_, n_);
    for (int t = 0; t < spec.horizon; ++t) {
      const Matrix& K = strategy.common_gain[t];
      const Matrix L = strategy.stacked_local_gain(spec, t);
      const int m = spec.action_dim();
      // u = -L x - (K - L) x_hat
      Matrix Fu(m, 2 * n_);
      Fu << -L, L - K;
      Matrix H = Matrix::Zero(n_ + m, 2 * n_);
      H.topLeftCorner(n_, n_) = I;
      H.bottomRows(m) = Fu;
      Matrix W(n_ + m, n_ + m);
      W << spec.Q[t], spec.M[t], spec.M[t].transpose(), spec.R[t];
      StepMaps maps;
      maps.cost = H.transpose() * W * H;
      maps.next_state.resize(n_, 2 * n_);
      maps.next_state << g.A, Matrix::Zero(n_, n_);
      maps.next_state += g.B * Fu;
      maps.predicted.resize(n_, 2 * n_);
      maps.predicted << Matrix::Zero(n_, n_), g.A - g.B * K;
      steps_.push_back(std::move(maps));
      noise_.push_back(global_noise_covariance(spec, t));
    }
    gamma_.assign(static_cast<std::size_t>(spec.N) * (spec.horizon + 1), false);
  }

  EnumeratedCost run() {
    const Matrix Sx = global_initial_covariance(spec_);
    for_each_delivery(0, 1.0, [&](const Vector& d, double prob) {
      const Matrix G = lift(d);
      descend(0, G * Sx * G.transpose(), prob, 0.0);
    });
    return std::move(result_);
  }

 private:
  // Visits each delivery pattern at time t with nonzero probability; d holds
  // 1 for delivered channels.
  template <typename F>
  void for_each_delivery(int t, double prob, F&& f) {
    const int N = spec_.N;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << N); ++mask) {
      double p = prob;
      Vector d = Vector::Zero(n_);
      for (int i = 0; i < N; ++i) {
        const bool delivered = (mask >> i) & 1;
        p *= delivered ? 1.0 - spec_.drop_prob[i] : spec_.drop_prob[i];
        if (delivered) d.segment(spec_.state_offset(i), spec_.state_dims[i]).setOnes();
        gamma_[static_cast<std::size_t>(t) * N + i] = delivered;
      }
      if (p == 0.0) continue;
      f(d, p);
    }
  }

  // [I; D], mapping x to (x, D x).
  Matrix lift(const Vector& d) const {
    Matrix G(2 * n_, n_);
    G << Matrix::Identity(n_, n_), Matrix(d.asDiagonal());
    return G;
  }

  void descend(int t, const Matrix& S, double prob, double cost) {
    if (t == spec_.horizon) {
      const double c = cost + (spec_.Q_terminal * S.topLeftCorner(n_, n_)).trace();
      result_.expected_cost += prob * c;
      result_.total_probability += prob;
      ++result_.sequences;
      if (options_.keep_detail) result_.detail.push_back({gamma_, prob, c});
      return;
    }
    const StepMaps& maps = steps_[t];
    const double stage = (maps.cost * S).trace();
    for_each_delivery(t + 1, prob, [&](const Vector& d, double p) {
      const Vector keep = Vector::Ones(n_) - d;
      Matrix F(2 * n_, 2 * n_);
      F.topRows(n_) = maps.next_state;
      F.bottomRows(n_) = d.asDiagonal() * maps.next_state + keep.asDiagonal() * maps.predicted;
      const Matrix G = lift(d);
      descend(t + 1, F * S * F.transpose() + G * noise_[t] * G.transpose(), p, cost + stage);
    });
  }

  const SystemSpec& spec_;
  EnumerationOptions options_;
  int n_;
  std::vector<StepMaps> steps_;
  std::vector<Matrix> noise_;
  std::vector<bool> gamma_;
  EnumeratedCost result_;
};

}  // namespace

EnumeratedCost exact_cost_enumerated(const SystemSpec& spec, const LinearStrategy& strategy,
                                     const EnumerationOptions& options) {
  const long bits = static_cast<long>(spec.N) * (spec.horizon + 1);
  if (bits > options.cap_bits)
    throw std::length_error("enumeration needs " + std::to_string(bits) +
                            " channel bits, cap is " + std::to_string(options.cap_bits));
  return Enumerator(spec, strategy, options).run();
}

CentralizedLqr centralized_lqr(const SystemSpec& spec) {
  const GlobalMatrices g = assemble_global(spec);
  const Matrix& A = g.A;
  const Matrix& B = g.B;
  const int T = spec.horizon;
  CentralizedLqr out;
  out.P.resize(T + 1);
  out.K.resize(T);
  out.P[T] = spec.Q_terminal;
  for (int t = T - 1; t >= 0; --t) {
    const Matrix& P = out.P[t + 1];
    const Matrix cross = spec.M[t] + A.transpose() * P * B;
    const Matrix inner = spec.R[t] + B.transpose() * P * B;
    Eigen::FullPivLU<Matrix> lu(inner);
    if (B.cols() > 0 && !lu.isInvertible())
      throw NumericalError("centralized_lqr: R + B'PB singular at t = " + std::to_string(t));
    const Matrix inv = B.cols() > 0 ? Matrix(lu.inverse()) : Matrix(0, 0);
    out.K[t] = inv * cross.transpose();
    const Matrix next = spec.Q[t] + A.transpose() * P * A - cross * inv * cross.transpose();
    out.P[t] = 0.5 * (next + next.transpose());
  }
  out.optimal_cost = (out.P[0] * global_initial_covariance(spec)).trace();
  for (int t = 0; t < T; ++t)
    out.optimal_cost += (out.P[t + 1] * global_noise_covariance(spec, t)).trace();
  return out;
}

double state_feedback_cost(const SystemSpec& spec, const std::vector<Matrix>& gains) {
  const GlobalMatrices g = assemble_global(spec);
  const int n = spec.state_dim();
  const int m = spec.action_dim();
  if (static_cast<int>(gains.size()) != spec.horizon)
    throw StructuralError("state_feedback_cost: need one gain per step");
  Matrix S = global_initial_covariance(spec);
  double cost = 0.0;
  for (int t = 0; t < spec.horizon; ++t) {
    Matrix H(n + m, n);
    H << Matrix::Identity(n, n), -gains[t];
    Matrix W(n + m, n + m);
    W << spec.Q[t], spec.M[t], spec.M[t].transpose(), spec.R[t];
    cost += (H.transpose() * W * H * S).trace();
    const Matrix F = g.A - g.B * gains[t];
    S = F * S * F.transpose() + global_noise_covariance(spec, t);
  }
  return cost + (spec.Q_terminal * S).trace();
}

namespace {

class SearchObjective {
 public:
  SearchObjective(const SystemSpec& spec, const SearchOptions& options)
      : spec_(spec), options_(options) {}

  double operator()(const LinearStrategy& s) {
    ++evaluations;
    return exact_cost_enumerated(spec_, s, EnumerationOptions{options_.cap_bits, false})
        .expected_cost;
  }

  bool exhausted() const { return evaluations >= options_.budget; }

  std::size_t evaluations = 0;

 private:
  const SystemSpec& spec_;
  const SearchOptions& options_;
};

// Coordinate descent. Along one coordinate the exact cost is a quadratic
// polynomial (the gain enters the second moment of the next state
// quadratically and every later cost is linear in that moment), so a
// three-point parabola locates the coordinate minimizer.
void local_search(LinearStrategy& s, double& f, double step, const SearchOptions& options,
                  SearchObjective& objective) {
  const std::size_t dims = s.parameter_count();
  while (!objective.exhausted() && step >= options.min_step) {
    const double start = f;
    for (std::size_t k = 0; k < dims && !objective.exhausted(); ++k) {
      double& theta = s.parameter(k);
      const double origin = theta;
      theta = origin + step;
      const double f_plus = objective(s);
      theta = origin - step;
      const double f_minus = objective(s);
      double best_theta = origin, best_f = f;
      if (f_plus < best_f) best_theta = origin + step, best_f = f_plus;
      if (f_minus < best_f) best_theta = origin - step, best_f = f_minus;
      const double curvature = (f_plus + f_minus - 2.0 * f) / (step * step);
      if (curvature > 0.0 && std::isfinite(curvature)) {
        const double slope = (f_plus - f_minus) / (2.0 * step);
        theta = origin - slope / curvature;
        const double f_vertex = objective(s);
        if (f_vertex < best_f) best_theta = theta, best_f = f_vertex;
      }
      theta = best_theta;
      f = best_f;
    }
    if (start - f <= options.tolerance * (1.0 + std::abs(f))) step *= 0.25;
  }
}

}  // namespace

SearchResult strategy_search(const SystemSpec& spec, const LinearStrategy& initial,
                             const SearchOptions& options) {
  initial.check(spec);
  SearchObjective objective(spec, options);
  SearchResult best{initial, objective(initial), 0};
  local_search(best.strategy, best.cost, options.initial_step, options, objective);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int r = 0; r < options.restarts && !objective.exhausted(); ++r) {
    LinearStrategy candidate = best.strategy;
    for (std::size_t k = 0; k < candidate.parameter_count(); ++k) {
      double& theta = candidate.parameter(k);
      theta += options.restart_scale * (1.0 + std::abs(theta)) * normal(rng);
    }
    double f = objective(candidate);
    local_search(candidate, f, options.initial_step, options, objective);
    if (f < best.cost) {
      best.strategy = std::move(candidate);
      best.cost = f;
    }
  }
  best.evaluations = objective.evaluations;
  return best;
}

namespace {

double one_step_objective(const Matrix& P, const Matrix& A, const Matrix& B, const Matrix& Q,
                          const Matrix& M, const Matrix& R, const Vector& x, const Vector& u) {
  const Vector next = A * x + B * u;
  return x.dot(Q * x) + 2.0 * x.dot(M * u) + u.dot(R * u) + next.dot(P * next);
}

// Zooming grid search: evaluate a (2k+1)^m lattice around the incumbent,
// recenter on the best point and shrink (or grow, if the best point sits on
// the boundary).
std::pair<Vector, double> grid_minimize(const Matrix& P, const Matrix& A, const Matrix& B,
                                        const Matrix& Q, const Matrix& M, const Matrix& R,
                                        const Vector& x) {
  const int m = static_cast<int>(B.cols());
  constexpr int kHalf = 10;
  constexpr int kSide = 2 * kHalf + 1;
  Vector center = Vector::Zero(m);
  double best = one_step_objective(P, A, B, Q, M, R, x, center);
  double width = 10.0 * (1.0 + x.norm());
  int total = 1;
  for (int k = 0; k < m; ++k) total *= kSide;
  for (int level = 0; level < 400 && width > 1e-12; ++level) {
    Vector incumbent = center;
    bool on_boundary = false;
    for (int code = 0; code < total; ++code) {
      Vector u(m);
      bool boundary = false;
      int c = code;
      for (int k = 0; k < m; ++k) {
        const int offset = c % kSide - kHalf;
        c /= kSide;
        boundary |= std::abs(offset) == kHalf;
        u[k] = center[k] + width * offset / kHalf;
      }
      const double v = one_step_objective(P, A, B, Q, M, R, x, u);
      if (v < best) {
        best = v;
        incumbent = u;
        on_boundary = boundary;
      }
    }
    center = incumbent;
    width *= on_boundary ? 2.0 : 0.25;
  }
  return {center, best};
}

}  // namespace

QuadraticMinReport quadratic_min_check(const Matrix& P, const Matrix& A, const Matrix& B,
                                       const Matrix& Q, const Matrix& M, const Matrix& R,
                                       const std::vector<Vector>& trial_states) {
  if (B.cols() > 3) throw std::invalid_argument("quadratic_min_check: action dimension > 3");
  const RiccatiUpdate<double> update = riccati_update(P, A, B, Q, M, R);
  QuadraticMinReport report;
  for (const Vector& x : trial_states) {
    QuadraticMinSample s;
    s.x = x;
    std::tie(s.grid_argmin, s.grid_min) = grid_minimize(P, A, B, Q, M, R, x);
    s.formula_min = x.dot(update.P * x);
    s.formula_argmin = -(update.K * x);
    s.value_error = std::abs(s.grid_min - s.formula_min);
    s.argmin_error =
        s.grid_argmin.size() ? (s.grid_argmin - s.formula_argmin).cwiseAbs().maxCoeff() : 0.0;
    report.max_value_error = std::max(report.max_value_error, s.value_error);
    report.max_argmin_error = std::max(report.max_argmin_error, s.argmin_error);
    report.samples.push_back(std::move(s));
  }
  return report;
}

}  // namespace lqnet
