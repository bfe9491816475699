#pragma once

#include <lqnet/estimator.hpp>
#include <lqnet/model.hpp>
#include <lqnet/rng.hpp>
#include <lqnet/stats.hpp>
#include <lqnet/strategy.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lqnet {

// One closed-loop rollout. Time runs along columns: states and estimates have
// T+1 columns, actions and noise T columns.
struct TrajectoryRecord {
  Matrix x;         // n x (T+1)
  Matrix x_hat;     // n x (T+1)
  Matrix x_tilde;   // n x (T+1)
  Matrix u;         // m x T, (u^0, u^1, ..., u^N)
  Matrix u_common;  // m x T, (u^0, u_hat^1, ..., u_hat^N)
  Matrix w;         // n x T
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> gamma;  // N x (T+1)
  Vector stage_cost;                                         // T
  double terminal_cost = 0.0;
  double total_cost = 0.0;

  int horizon() const { return static_cast<int>(stage_cost.size()); }
  // Channel output of subsystem i at time t (blank where the packet dropped).
  ChannelOutput z(const SystemSpec& spec, int i, int t) const;
};

Vector plant_step(const Vector& x, const Vector& u, const Vector& w, const GlobalMatrices& g);

// [x;u]'[[Q,M],[M',R]][x;u]
double stage_cost(const Vector& x, const Vector& u, const Matrix& Q, const Matrix& M,
                  const Matrix& R);

// Sum of stage costs in time order plus the terminal cost.
double accumulate_total(const Vector& stage_costs, double terminal_cost);

struct SimulationOptions {
  unsigned threads = 1;
  // Replaces spec.noise_family when set.
  std::optional<NoiseFamily> noise_family;
};

// Precomputes global matrices and covariance square roots for repeated
// rollouts of one (spec, strategy) pair.
class Simulator {
 public:
  Simulator(const SystemSpec& spec, LinearStrategy strategy, SimulationOptions options = {});

  TrajectoryRecord run(std::uint64_t seed, std::uint64_t replication) const;

  const SystemSpec& spec() const { return spec_; }
  const LinearStrategy& strategy() const { return strategy_; }
  const SimulationOptions& options() const { return options_; }

 private:
  SystemSpec spec_;
  LinearStrategy strategy_;
  SimulationOptions options_;
  NoiseFamily family_;
  GlobalMatrices globals_;
  std::vector<Matrix> sqrt_sigma_x0_;
  std::vector<std::vector<Matrix>> sqrt_sigma_w_;
};

TrajectoryRecord run_trajectory(const SystemSpec& spec, const LinearStrategy& strategy,
                                std::uint64_t seed, std::uint64_t replication = 0);

// Generates replications 0..reps-1 (in parallel chunks) and hands each record
// to `visit` in replication order.
void for_each_trajectory(const Simulator& sim, std::size_t reps, std::uint64_t seed,
                         const std::function<void(std::size_t, const TrajectoryRecord&)>& visit);

struct CostReport {
  std::size_t reps = 0;
  double mean = 0.0;
  double se = 0.0;
  bool se_defined = false;  // false when reps == 1
  std::uint64_t seed = 0;
};

CostReport monte_carlo(const SystemSpec& spec, const LinearStrategy& strategy, std::size_t reps,
                       std::uint64_t seed, const SimulationOptions& options = {});

// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

// CSV with columns t, x[k], u[k], gamma[i], z[k], xhat[k], xtilde[k],
// stage_cost. Dropped packets leave their z cells empty; the final row
// (t = T) carries the terminal cost and empty action cells.
std::string trajectory_csv(const SystemSpec& spec, const TrajectoryRecord& record,
                           bool header = true, std::optional<std::size_t> replication = {});

}  // namespace lqnet
