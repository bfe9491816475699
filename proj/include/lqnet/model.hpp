#pragma once

#include <lqnet/types.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace lqnet {

enum class NoiseFamily { gaussian, uniform, rademacher };

std::string to_string(NoiseFamily family);
NoiseFamily noise_family_from_string(const std::string& name);

// Problem instance. Subsystems are indexed 0..N-1. The global action vector is
// ordered (remote, local-0, ..., local-(N-1)); the cost matrices follow that
// layout (Q is N x N state blocks, M is N x (N+1), R is (N+1) x (N+1)).
struct SystemSpec {
  int N = 0;
  int horizon = 0;
  std::vector<int> state_dims;
  std::vector<int> local_action_dims;
  int remote_action_dim = 0;

  std::vector<Matrix> A_blocks;  // n_i x n_i
  std::vector<Matrix> B_remote;  // n_i x m_0
  std::vector<Matrix> B_local;   // n_i x m_i

  std::vector<Matrix> Q;  // per step, size horizon
  std::vector<Matrix> M;
  std::vector<Matrix> R;
  Matrix Q_terminal;

  std::vector<Matrix> sigma_x0;               // per subsystem
  std::vector<std::vector<Matrix>> sigma_w;   // [i][t]
  std::vector<double> drop_prob;              // Pr(Gamma^i_t = 0)
  NoiseFamily noise_family = NoiseFamily::gaussian;

  int state_dim() const;
  int action_dim() const;
  int state_offset(int i) const;
  // Offset of local action block i inside the global action vector.
  int local_action_offset(int i) const;

  // Builds a spec with time-invariant cost and noise data broadcast over the
  // horizon.
  static SystemSpec with_constant_data(int horizon, std::vector<Matrix> A_blocks,
                                       std::vector<Matrix> B_remote,
                                       std::vector<Matrix> B_local,
                                       const Matrix& Q, const Matrix& M,
                                       const Matrix& R, const Matrix& Q_terminal,
                                       std::vector<Matrix> sigma_x0,
                                       const std::vector<Matrix>& sigma_w,
                                       std::vector<double> drop_prob);
};

struct Violation {
  std::string rule;      // "dimension", "A2", "A3", "drop_prob"
  std::string location;  // offending matrix and index, e.g. "R[2]"
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has_rule(const std::string& rule) const;
};

struct GlobalMatrices {
  Matrix A;  // block diagonal
  Matrix B;  // column blocks [remote | local-0 | ... | local-(N-1)]
};

// Eigenvalue thresholds relative to max(1, spectral norm).
inline constexpr double kPsdTolerance = 1e-9;
inline constexpr double kPdTolerance = 1e-12;

bool is_symmetric(const Matrix& X, double rel_tol = 1e-12);
bool is_psd(const Matrix& X);
bool is_pd(const Matrix& X);

ValidationReport validate_spec(const SystemSpec& spec);

// Throws StructuralError on dimension mismatch.
GlobalMatrices assemble_global(const SystemSpec& spec);

enum class BlockKind { Q, M, R, P };

// Block coordinates. State blocks are subsystem indices 0..N-1. Action
// blocks use 0 for the remote action and i+1 for local action i, so the
// coupling of state i with local action i is {BlockKind::M, i, i + 1}.
struct BlockSelector {
  BlockKind kind;
  int row;
  int col;

  static BlockSelector state(BlockKind kind, int i) { return {kind, i, i}; }
  static BlockSelector local(BlockKind kind, int i);
};

// Returns a copy of the selected block; throws std::out_of_range on a bad
// index and StructuralError if the matrix does not match the layout.
Matrix extract_block(const Matrix& matrix, const SystemSpec& spec,
                     const BlockSelector& selector);

// Block-diagonal global covariances.
Matrix global_initial_covariance(const SystemSpec& spec);
Matrix global_noise_covariance(const SystemSpec& spec, int t);

}  // namespace lqnet
