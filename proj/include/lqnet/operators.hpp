#pragma once

// One-step Riccati and gain operators of the finite-horizon LQ problem
//
//   Riccati(P, A, B, Q, M, R) = Q + A'PA - (M + A'PB)(R + B'PB)^{-1}(M + A'PB)'
//   Gain(P, A, B, M, R)       = (R + B'PB)^{-1}(M + A'PB)'
//
// Gains use the positive convention: the minimizer of
//   [x;u]'[[Q,M],[M',R]][x;u] + (Ax+Bu)'P(Ax+Bu)
// is u = -Gain(...) x.

#include <lqnet/types.hpp>

#include <Eigen/Cholesky>

namespace lqnet {

template <typename Scalar>
struct RiccatiUpdate {
  MatrixX<Scalar> P;      // updated cost matrix, symmetrized
  MatrixX<Scalar> K;      // positive-convention gain
  MatrixX<Scalar> Delta;  // R + B'PB
};

// Full update. Throws NumericalError if R + B'PB is not positive definite.
// An empty action space (B with no columns) yields a zero correction term.
template <typename DP, typename DA, typename DB, typename DQ, typename DM, typename DR>
RiccatiUpdate<typename DP::Scalar> riccati_update(
    const Eigen::MatrixBase<DP>& P, const Eigen::MatrixBase<DA>& A,
    const Eigen::MatrixBase<DB>& B, const Eigen::MatrixBase<DQ>& Q,
    const Eigen::MatrixBase<DM>& M, const Eigen::MatrixBase<DR>& R) {
  using Scalar = typename DP::Scalar;
  const auto n = A.cols();
  const auto m = B.cols();
  if (P.rows() != A.rows() || P.cols() != A.rows() || B.rows() != A.rows() ||
      Q.rows() != n || Q.cols() != n || M.rows() != n || M.cols() != m ||
      R.rows() != m || R.cols() != m)
    throw StructuralError("riccati_update: inconsistent dimensions");

  RiccatiUpdate<Scalar> out;
  MatrixX<Scalar> PA = P * A;
  MatrixX<Scalar> base = Q + A.transpose() * PA;
  if (m == 0) {
    out.P = symmetrized(base);
    out.K = MatrixX<Scalar>::Zero(0, n);
    out.Delta = MatrixX<Scalar>::Zero(0, 0);
    return out;
  }
  out.Delta = symmetrized(R + B.transpose() * P * B);
  // (M + A'PB)' = M' + B'PA since P is symmetric.
  MatrixX<Scalar> cross = M.transpose() + B.transpose() * PA;
  Eigen::LLT<MatrixX<Scalar>> llt(out.Delta);
  if (llt.info() != Eigen::Success)
    throw NumericalError("R + B'PB is not positive definite");
  out.K = llt.solve(cross);
  out.P = symmetrized(base - cross.transpose() * out.K);
  return out;
}

template <typename DP, typename DA, typename DB, typename DQ, typename DM, typename DR>
MatrixX<typename DP::Scalar> riccati_step(const Eigen::MatrixBase<DP>& P,
                                          const Eigen::MatrixBase<DA>& A,
                                          const Eigen::MatrixBase<DB>& B,
                                          const Eigen::MatrixBase<DQ>& Q,
                                          const Eigen::MatrixBase<DM>& M,
                                          const Eigen::MatrixBase<DR>& R) {
  return riccati_update(P, A, B, Q, M, R).P;
}

template <typename DP, typename DA, typename DB, typename DM, typename DR>
MatrixX<typename DP::Scalar> gain_step(const Eigen::MatrixBase<DP>& P,
                                       const Eigen::MatrixBase<DA>& A,
                                       const Eigen::MatrixBase<DB>& B,
                                       const Eigen::MatrixBase<DM>& M,
                                       const Eigen::MatrixBase<DR>& R) {
  using Scalar = typename DP::Scalar;
  const MatrixX<Scalar> Q = MatrixX<Scalar>::Zero(A.cols(), A.cols());
  return riccati_update(P, A, B, Q, M, R).K;
}

}  // namespace lqnet
