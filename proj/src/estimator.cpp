#include <lqnet/estimator.hpp>

#include <stdexcept>
#include <string>

namespace lqnet {

namespace {

Vector stack(const std::vector<Vector>& parts) {
  Eigen::Index n = 0;
  for (const auto& v : parts) n += v.size();
  Vector out(n);
  Eigen::Index r = 0;
  for (const auto& v : parts) {
    out.segment(r, v.size()) = v;
    r += v.size();
  }
  return out;
}

}  // namespace

ChannelOutput channel_output(const Vector& x, bool delivered) {
  if (delivered) return x;
  return std::nullopt;
}

Vector EstimatorState::stacked_hat() const { return stack(x_hat); }
Vector EstimatorState::stacked_tilde() const { return stack(x_tilde); }

Vector ControlDecision::stacked() const {
  std::vector<Vector> parts{u_remote};
  parts.insert(parts.end(), u_local.begin(), u_local.end());
  return stack(parts);
}

Vector ControlDecision::stacked_common() const {
  std::vector<Vector> parts{u_remote};
  parts.insert(parts.end(), u_hat.begin(), u_hat.end());
  return stack(parts);
}

EstimatorState estimator_init(const std::vector<Vector>& x0, const std::vector<bool>& gamma0) {
  if (x0.size() != gamma0.size())
    throw StructuralError("estimator_init: state and channel counts differ");
  EstimatorState s;
  s.t = 0;
  for (std::size_t i = 0; i < x0.size(); ++i) {
    s.x_hat.push_back(gamma0[i] ? x0[i] : Vector::Zero(x0[i].size()));
    s.x_tilde.push_back(x0[i] - s.x_hat.back());
  }
  return s;
}

std::vector<Vector> estimator_predict(const EstimatorState& state, const Vector& u_remote,
                                      const std::vector<Vector>& u_hat,
                                      const SystemSpec& spec) {
  std::vector<Vector> out;
  out.reserve(spec.N);
  for (int i = 0; i < spec.N; ++i) {
    Vector x = spec.A_blocks[i] * state.x_hat[i];
    if (spec.remote_action_dim > 0) x += spec.B_remote[i] * u_remote;
    if (spec.local_action_dims[i] > 0) x += spec.B_local[i] * u_hat[i];
    out.push_back(std::move(x));
  }
  return out;
}

EstimatorState estimator_update(const EstimatorState& previous,
                                const std::vector<Vector>& predicted,
                                const std::vector<ChannelOutput>& z,
                                const std::vector<bool>& gamma,
                                const std::vector<Vector>& local_state) {
  const std::size_t N = predicted.size();
  if (z.size() != N || gamma.size() != N || local_state.size() != N)
    throw StructuralError("estimator_update: inconsistent subsystem counts");
  EstimatorState next;
  next.t = previous.t + 1;
  for (std::size_t i = 0; i < N; ++i) {
    if (gamma[i] != z[i].has_value())
      throw ProtocolError("channel " + std::to_string(i) + " at t = " +
                          std::to_string(next.t) +
                          (gamma[i] ? ": delivered packet is blank"
                                    : ": dropped packet carries a value"));
    next.x_hat.push_back(gamma[i] ? *z[i] : predicted[i]);
    next.x_tilde.push_back(local_state[i] - next.x_hat.back());
  }
  return next;
}

ControlDecision apply_strategy(const LinearStrategy& strategy, const SystemSpec& spec, int t,
                               const EstimatorState& state) {
  if (t < 0 || t >= strategy.horizon())
    throw std::out_of_range("control requested at t = " + std::to_string(t) +
                            " outside 0..T-1");
  const Vector x_hat = state.stacked_hat();
  const Vector common = -(strategy.common_gain[t] * x_hat);
  ControlDecision d;
  d.u_remote = common.head(spec.remote_action_dim);
  for (int i = 0; i < spec.N; ++i) {
    Vector u_hat = common.segment(spec.local_action_offset(i), spec.local_action_dims[i]);
    Vector u_tilde = -(strategy.local_gain[i][t] * state.x_tilde[i]);
    d.u_local.push_back(u_hat + u_tilde);
    d.u_hat.push_back(std::move(u_hat));
    d.u_tilde.push_back(std::move(u_tilde));
  }
  return d;
}

ControlDecision optimal_controls(const RiccatiSchedule& schedule, const SystemSpec& spec, int t,
                                 const EstimatorState& state) {
  if (t < 0 || t >= schedule.horizon)
    throw std::out_of_range("control requested at t = " + std::to_string(t) +
                            " outside 0..T-1");
  return apply_strategy(LinearStrategy::optimal(schedule), spec, t, state);
}

}  // namespace lqnet
