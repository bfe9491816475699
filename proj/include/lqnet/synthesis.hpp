#pragma once

#include <lqnet/model.hpp>
#include <lqnet/operators.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace lqnet {

// Output of the coupled backward recursions. Time indices are absolute:
// P[t] and P_tilde[i][t] for t = 0..T, Pi[i][t] for t = 1..T (Pi[i][0] is an
// empty placeholder), gains and Delta for t = 0..T-1.
template <typename Scalar>
struct RiccatiScheduleT {
  int horizon = 0;
  std::vector<MatrixX<Scalar>> P;
  std::vector<std::vector<MatrixX<Scalar>>> P_tilde;
  std::vector<std::vector<MatrixX<Scalar>>> Pi;
  std::vector<MatrixX<Scalar>> K;
  std::vector<std::vector<MatrixX<Scalar>>> K_tilde;
  std::vector<MatrixX<Scalar>> Delta;
  std::vector<std::vector<MatrixX<Scalar>>> Delta_tilde;

  int subsystems() const { return static_cast<int>(P_tilde.size()); }

  const MatrixX<Scalar>& pi(int i, int t) const {
    if (t < 1 || t > horizon) throw std::out_of_range("Pi is defined for t = 1..T");
    return Pi.at(i).at(t);
  }
};

using RiccatiSchedule = RiccatiScheduleT<double>;

// (1 - p) P_ii + p P_tilde. Shared by synthesis and every consumer that needs
// to recompute the averaged matrix so that results agree bit for bit.
template <typename DA, typename DB>
MatrixX<typename DA::Scalar> average_riccati(typename DA::Scalar drop_prob,
                                             const Eigen::MatrixBase<DA>& P_ii,
                                             const Eigen::MatrixBase<DB>& P_tilde) {
  using Scalar = typename DA::Scalar;
  return (Scalar(1) - drop_prob) * P_ii + drop_prob * P_tilde;
}

namespace detail {

template <typename Scalar>
MatrixX<Scalar> state_block(const MatrixX<Scalar>& X, const SystemSpec& spec, int i) {
  const int r = spec.state_offset(i);
  return X.block(r, r, spec.state_dims[i], spec.state_dims[i]);
}

template <typename Scalar>
MatrixX<Scalar> local_block(const MatrixX<Scalar>& X, const SystemSpec& spec, int row_state,
                            bool action_rows) {
  const int c = spec.local_action_offset(row_state);
  const int m = spec.local_action_dims[row_state];
  if (action_rows) return X.block(c, c, m, m);
  return X.block(spec.state_offset(row_state), c, spec.state_dims[row_state], m);
}

}  // namespace detail

// Backward recursions for the global Riccati matrices P_t and the per
// subsystem error matrices P_tilde^i_t, with the averaged matrices
// Pi^i_{t+1} = (1 - p^i) P^{ii}_{t+1} + p^i P_tilde^i_{t+1}.
// Precondition: validate_spec(spec).ok(). NumericalError carries the time
// index at which the inner factorization failed.
template <typename Scalar = double>
RiccatiScheduleT<Scalar> synthesize(const SystemSpec& spec) {
  const GlobalMatrices g = assemble_global(spec);
  const int T = spec.horizon;
  const int N = spec.N;
  const MatrixX<Scalar> A = g.A.cast<Scalar>();
  const MatrixX<Scalar> B = g.B.cast<Scalar>();

  RiccatiScheduleT<Scalar> s;
  s.horizon = T;
  s.P.resize(T + 1);
  s.K.resize(T);
  s.Delta.resize(T);
  s.P[T] = spec.Q_terminal.cast<Scalar>();
  for (int t = T - 1; t >= 0; --t) {
    try {
      auto step = riccati_update(s.P[t + 1], A, B, spec.Q[t].cast<Scalar>(),
                                 spec.M[t].cast<Scalar>(), spec.R[t].cast<Scalar>());
      s.P[t] = std::move(step.P);
      s.K[t] = std::move(step.K);
      s.Delta[t] = std::move(step.Delta);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (global recursion, t = " +
                           std::to_string(t) + ")");
    }
  }

  s.P_tilde.assign(N, std::vector<MatrixX<Scalar>>(T + 1));
  s.Pi.assign(N, std::vector<MatrixX<Scalar>>(T + 1));
  s.K_tilde.assign(N, std::vector<MatrixX<Scalar>>(T));
  s.Delta_tilde.assign(N, std::vector<MatrixX<Scalar>>(T));
  for (int i = 0; i < N; ++i) {
    const Scalar p = static_cast<Scalar>(spec.drop_prob[i]);
    const MatrixX<Scalar> Aii = spec.A_blocks[i].cast<Scalar>();
    const MatrixX<Scalar> Bii = spec.B_local[i].cast<Scalar>();
    s.P_tilde[i][T] = detail::state_block<Scalar>(spec.Q_terminal.cast<Scalar>(), spec, i);
    for (int t = T - 1; t >= 0; --t) {
      s.Pi[i][t + 1] =
          average_riccati(p, detail::state_block(s.P[t + 1], spec, i), s.P_tilde[i][t + 1]);
      const MatrixX<Scalar> Qii = detail::state_block<Scalar>(spec.Q[t].cast<Scalar>(), spec, i);
      const MatrixX<Scalar> Mii =
          detail::local_block<Scalar>(spec.M[t].cast<Scalar>(), spec, i, false);
      const MatrixX<Scalar> Rii =
          detail::local_block<Scalar>(spec.R[t].cast<Scalar>(), spec, i, true);
      try {
        auto step = riccati_update(s.Pi[i][t + 1], Aii, Bii, Qii, Mii, Rii);
        s.P_tilde[i][t] = std::move(step.P);
        s.K_tilde[i][t] = std::move(step.K);
        s.Delta_tilde[i][t] = std::move(step.Delta);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " (subsystem " + std::to_string(i) +
                             ", t = " + std::to_string(t) + ")");
      }
    }
  }
  return s;
}

// Rows of K_t that produce the remote action (block 0) or local action i+1.
template <typename Scalar>
MatrixX<Scalar> gain_rows(const MatrixX<Scalar>& K, const SystemSpec& spec, int action_block) {
  if (action_block == 0) return K.topRows(spec.remote_action_dim);
  const int i = action_block - 1;
  return K.middleRows(spec.local_action_offset(i), spec.local_action_dims[i]);
}

// Optimal expected cost
//   sum_i [(1 - p^i) tr(P_0^{ii} Sx^i) + p^i tr(P_tilde^i_0 Sx^i)]
//     + sum_{s<T} sum_i tr(Pi^i_{s+1} Sw^i_s).
template <typename Scalar>
Scalar optimal_cost_closed_form(const SystemSpec& spec, const RiccatiScheduleT<Scalar>& s) {
  if (static_cast<int>(s.P.size()) != spec.horizon + 1 || s.subsystems() != spec.N)
    throw StructuralError("optimal_cost_closed_form: schedule does not match spec");
  Scalar init = 0, noise = 0;
  for (int i = 0; i < spec.N; ++i) {
    const Scalar p = static_cast<Scalar>(spec.drop_prob[i]);
    const MatrixX<Scalar> Sx = spec.sigma_x0[i].cast<Scalar>();
    init += (Scalar(1) - p) * (detail::state_block(s.P[0], spec, i) * Sx).trace() +
            p * (s.P_tilde[i][0] * Sx).trace();
    for (int t = 0; t < spec.horizon; ++t)
      noise += (s.pi(i, t + 1) * spec.sigma_w[i][t].cast<Scalar>()).trace();
  }
  return init + noise;
}

}  // namespace lqnet
