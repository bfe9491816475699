#pragma once

#include <lqnet/model.hpp>
#include <lqnet/strategy.hpp>

#include <cstdint>
#include <vector>

namespace lqnet {

struct SequenceCost {
  // Channel states, index t * N + i, for t = 0..T.
  std::vector<bool> gamma;
  double probability = 0.0;
  double conditional_cost = 0.0;
};

struct EnumeratedCost {
  double expected_cost = 0.0;
  double total_probability = 0.0;
  std::size_t sequences = 0;  // sequences with nonzero probability
  std::vector<SequenceCost> detail;
};

struct EnumerationOptions {
  int cap_bits = 20;  // N * (T + 1) must not exceed this
  bool keep_detail = false;
};

// Exact expected cost of a linear strategy. For every channel realization the
// joint vector (x_t, x_hat_t) evolves linearly, so its second moment is
// propagated exactly and the stage costs are traces against it; realizations
// are weighted by their probability. Zero-probability branches are pruned.
// Throws std::length_error when the cap is exceeded.
EnumeratedCost exact_cost_enumerated(const SystemSpec& spec, const LinearStrategy& strategy,
                                     const EnumerationOptions& options = {});

struct CentralizedLqr {
  std::vector<Matrix> P;  // t = 0..T
  std::vector<Matrix> K;  // t = 0..T-1, applied as u = -K x
  double optimal_cost = 0.0;
};

// Full-information LQR on the global (A, B) with cross term M, computed with
// an explicit inverse, independently of the synthesis operators.
CentralizedLqr centralized_lqr(const SystemSpec& spec);

// Expected cost of state feedback u_t = -K_t x_t on the global system.
double state_feedback_cost(const SystemSpec& spec, const std::vector<Matrix>& gains);

struct SearchOptions {
  std::size_t budget = 200000;  // objective evaluations
  double initial_step = 0.5;
  double min_step = 1e-9;
  double tolerance = 1e-15;  // relative sweep improvement that triggers shrinking
  int restarts = 0;
  double restart_scale = 0.1;
  std::uint64_t seed = 0;
  int cap_bits = 20;
};

struct SearchResult {
  LinearStrategy strategy;
  double cost = 0.0;
  std::size_t evaluations = 0;
};

// Derivative-free coordinate descent over every gain entry, with the exact
// enumerated cost as objective, followed by perturbed restarts.
SearchResult strategy_search(const SystemSpec& spec, const LinearStrategy& initial,
                             const SearchOptions& options = {});

struct QuadraticMinSample {
  Vector x;
  double grid_min = 0.0;
  Vector grid_argmin;
  double formula_min = 0.0;  // x' Riccati(...) x
  Vector formula_argmin;     // -Gain(...) x
  double value_error = 0.0;
  double argmin_error = 0.0;
};

struct QuadraticMinReport {
  std::vector<QuadraticMinSample> samples;
  double max_value_error = 0.0;
  double max_argmin_error = 0.0;
};

// Minimizes u -> [x;u]'[[Q,M],[M',R]][x;u] + (Ax+Bu)'P(Ax+Bu) on successively
// refined grids and compares with the one-step operators. Action dimension
// must be at most 3.
QuadraticMinReport quadratic_min_check(const Matrix& P, const Matrix& A, const Matrix& B,
                                       const Matrix& Q, const Matrix& M, const Matrix& R,
                                       const std::vector<Vector>& trial_states);

}  // namespace lqnet
