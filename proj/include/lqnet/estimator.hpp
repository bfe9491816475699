#pragma once

#include <lqnet/model.hpp>
#include <lqnet/strategy.hpp>
#include <lqnet/synthesis.hpp>

#include <optional>
#include <vector>

namespace lqnet {

// Channel output z^i_t: the transmitted local state, or nothing when the
// packet was dropped. A delivered zero state is distinct from a blank.
using ChannelOutput = std::optional<Vector>;

ChannelOutput channel_output(const Vector& x, bool delivered);

// Common-information estimate x_hat^i_t and local errors x_tilde^i_t.
// x_tilde^i is known only to controller i; it is stored here jointly for
// simulation.
struct EstimatorState {
  int t = 0;
  std::vector<Vector> x_hat;
  std::vector<Vector> x_tilde;

  Vector stacked_hat() const;
  Vector stacked_tilde() const;
};

struct ControlDecision {
  Vector u_remote;
  std::vector<Vector> u_local;
  std::vector<Vector> u_hat;
  std::vector<Vector> u_tilde;

  // (u^0, u^1, ..., u^N)
  Vector stacked() const;
  // (u^0, u_hat^1, ..., u_hat^N)
  Vector stacked_common() const;
};

EstimatorState estimator_init(const std::vector<Vector>& x0, const std::vector<bool>& gamma0);

// Open-loop predictions A^{ii} x_hat^i + B^{i0} u^0 + B^{ii} u_hat^i.
std::vector<Vector> estimator_predict(const EstimatorState& state, const Vector& u_remote,
                                      const std::vector<Vector>& u_hat,
                                      const SystemSpec& spec);

// Incorporates the channel outputs at t+1. The error is recovered as
// local_state - x_hat; on delivery x_hat is the received state and the error
// is exactly zero.
// Throws ProtocolError if a delivered channel carries no value or a dropped
// one does.
EstimatorState estimator_update(const EstimatorState& previous,
                                const std::vector<Vector>& predicted,
                                const std::vector<ChannelOutput>& z,
                                const std::vector<bool>& gamma,
                                const std::vector<Vector>& local_state);

ControlDecision apply_strategy(const LinearStrategy& strategy, const SystemSpec& spec, int t,
                               const EstimatorState& state);

// Remote, common and local actions of the synthesized optimal strategy.
ControlDecision optimal_controls(const RiccatiSchedule& schedule, const SystemSpec& spec, int t,
                                 const EstimatorState& state);

}  // namespace lqnet
