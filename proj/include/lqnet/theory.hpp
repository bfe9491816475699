#pragma once

#include <lqnet/simulator.hpp>
#include <lqnet/stats.hpp>
#include <lqnet/synthesis.hpp>

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lqnet {

// Per-path terms of the cost-to-go identity for a structured strategy:
//   total = init + common penalty + sum_i local penalty_i + noise
// holds in expectation (not path by path).
struct PathTerms {
  double init_term = 0.0;
  double common_penalty = 0.0;
  std::vector<double> local_penalty;
  double noise_term = 0.0;
  double total_cost = 0.0;

  double sum() const;
};

PathTerms path_terms(const SystemSpec& spec, const RiccatiSchedule& schedule,
                     const TrajectoryRecord& record);

struct CostDecomposition {
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  Estimate init_term;
  Estimate control_penalty_common;
  std::vector<Estimate> control_penalty_local;
  Estimate noise_term;
  Estimate total_cost;
  // Mean of (total - sum of terms) per path, with its standard error.
  Estimate residual;
};

CostDecomposition decomposition_check(const SystemSpec& spec, const RiccatiSchedule& schedule,
                                      const LinearStrategy& strategy, std::size_t reps,
                                      std::uint64_t seed, const SimulationOptions& options = {});

// One sample moment that should vanish for a structured strategy.
struct OrthogonalityEntry {
  std::string property;  // error-mean, estimate-error, cross-error, cost-split
  int t = 0;
  std::string detail;
  Estimate value;
};

struct OrthogonalityReport {
  std::size_t samples = 0;
  std::vector<OrthogonalityEntry> entries;
  // (t, i) pairs where the channel delivered but the local error was nonzero.
  std::size_t delivered_nonzero_error = 0;

  // Largest |estimate| / se; infinite if an entry with se == 0 is nonzero.
  double max_abs_z() const;
  bool within(double k) const;
  std::vector<const OrthogonalityEntry*> failures(double k) const;
};

// Streaming version of orthogonality_check; feed records in a fixed order.
class OrthogonalityAccumulator {
 public:
  explicit OrthogonalityAccumulator(const SystemSpec& spec, std::size_t min_group_size = 500);

  void add(const TrajectoryRecord& record);
  OrthogonalityReport report() const;

 private:
  struct Slot {
    std::string property;
    int t;
    std::string detail;
  };
  std::size_t slot(const std::string& property, int t, const std::string& detail);
  void push(std::size_t& cursor, const std::string& property, int t, const std::string& detail,
            double value);

  SystemSpec spec_;
  std::size_t min_group_size_;
  std::size_t samples_ = 0;
  std::size_t delivered_nonzero_error_ = 0;
  std::vector<Slot> slots_;
  std::vector<RunningStat> stats_;
  // Conditional error means keyed by (t, channel prefix bits).
  std::map<std::pair<int, std::uint64_t>, std::vector<RunningStat>> groups_;
};

// Throws std::invalid_argument on an empty ensemble.
OrthogonalityReport orthogonality_check(const SystemSpec& spec,
                                        std::span<const TrajectoryRecord> ensemble,
                                        std::size_t min_group_size = 500);

OrthogonalityReport orthogonality_check(const Simulator& sim, std::size_t reps,
                                        std::uint64_t seed, std::size_t min_group_size = 500);

}  // namespace lqnet
