#include <lqnet/strategy.hpp>

#include <stdexcept>
#include <string>

namespace lqnet {

LinearStrategy LinearStrategy::optimal(const RiccatiSchedule& schedule) {
  return {schedule.K, schedule.K_tilde};
}

LinearStrategy LinearStrategy::zero(const SystemSpec& spec) {
  LinearStrategy s;
  s.common_gain.assign(spec.horizon, Matrix::Zero(spec.action_dim(), spec.state_dim()));
  s.local_gain.resize(spec.N);
  for (int i = 0; i < spec.N; ++i)
    s.local_gain[i].assign(spec.horizon,
                           Matrix::Zero(spec.local_action_dims[i], spec.state_dims[i]));
  return s;
}

void LinearStrategy::check(const SystemSpec& spec) const {
  if (horizon() != spec.horizon)
    throw StructuralError("strategy horizon " + std::to_string(horizon()) +
                          " does not match spec horizon " + std::to_string(spec.horizon));
  if (static_cast<int>(local_gain.size()) != spec.N)
    throw StructuralError("strategy has " + std::to_string(local_gain.size()) +
                          " local gain sequences, expected " + std::to_string(spec.N));
  for (int t = 0; t < spec.horizon; ++t) {
    if (common_gain[t].rows() != spec.action_dim() || common_gain[t].cols() != spec.state_dim())
      throw StructuralError("common gain at t = " + std::to_string(t) + " has wrong shape");
  }
  for (int i = 0; i < spec.N; ++i) {
    if (static_cast<int>(local_gain[i].size()) != spec.horizon)
      throw StructuralError("local gain sequence " + std::to_string(i) + " has wrong length");
    for (int t = 0; t < spec.horizon; ++t) {
      const Matrix& L = local_gain[i][t];
      if (L.rows() != spec.local_action_dims[i] || L.cols() != spec.state_dims[i])
        throw StructuralError("local gain " + std::to_string(i) + " at t = " +
                              std::to_string(t) + " has wrong shape");
    }
  }
}

std::size_t LinearStrategy::parameter_count() const {
  std::size_t count = 0;
  for (const auto& K : common_gain) count += static_cast<std::size_t>(K.size());
  for (const auto& seq : local_gain)
    for (const auto& L : seq) count += static_cast<std::size_t>(L.size());
  return count;
}

double& LinearStrategy::parameter(std::size_t k) {
  for (auto& K : common_gain) {
    if (k < static_cast<std::size_t>(K.size())) return K.data()[k];
    k -= static_cast<std::size_t>(K.size());
  }
  for (auto& seq : local_gain)
    for (auto& L : seq) {
      if (k < static_cast<std::size_t>(L.size())) return L.data()[k];
      k -= static_cast<std::size_t>(L.size());
    }
  throw std::out_of_range("strategy parameter index out of range");
}

double LinearStrategy::parameter(std::size_t k) const {
  return const_cast<LinearStrategy*>(this)->parameter(k);
}

Matrix LinearStrategy::stacked_local_gain(const SystemSpec& spec, int t) const {
  Matrix L = Matrix::Zero(spec.action_dim(), spec.state_dim());
  for (int i = 0; i < spec.N; ++i)
    L.block(spec.local_action_offset(i), spec.state_offset(i), spec.local_action_dims[i],
            spec.state_dims[i]) = local_gain[i][t];
  return L;
}

}  // namespace lqnet
