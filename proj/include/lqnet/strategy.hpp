#pragma once

#include <lqnet/model.hpp>
#include <lqnet/synthesis.hpp>

#include <vector>

namespace lqnet {

// Linear structured strategy u_t = -common_gain[t] * x_hat_t - local terms,
// where the local term of controller i is local_gain[i][t] * x_tilde^i_t.
// common_gain[t] maps the stacked estimate to (u^0, u_hat^1, ..., u_hat^N);
// the remote rows of the local terms are identically zero.
struct LinearStrategy {
  std::vector<Matrix> common_gain;              // [t], m x n
  std::vector<std::vector<Matrix>> local_gain;  // [i][t], m_i x n_i

  int horizon() const { return static_cast<int>(common_gain.size()); }

  static LinearStrategy optimal(const RiccatiSchedule& schedule);
  static LinearStrategy zero(const SystemSpec& spec);

  // Throws StructuralError if the gains do not match the spec dimensions.
  void check(const SystemSpec& spec) const;

  // Number of free gain entries and flat access, used by the search oracle.
  std::size_t parameter_count() const;
  double& parameter(std::size_t k);
  double parameter(std::size_t k) const;

  // Global local-error gain: (m x n) with local_gain[i][t] in the rows of
  // local action i and the columns of state i.
  Matrix stacked_local_gain(const SystemSpec& spec, int t) const;
};

}  // namespace lqnet
