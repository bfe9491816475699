#include <lqnet/theory.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lqnet {

double PathTerms::sum() const {
  double s = init_term + common_penalty;
  for (double v : local_penalty) s += v;
  return s + noise_term;
}

PathTerms path_terms(const SystemSpec& spec, const RiccatiSchedule& schedule,
                     const TrajectoryRecord& rec) {
  const int T = spec.horizon;
  PathTerms terms;
  terms.local_penalty.assign(spec.N, 0.0);
  terms.total_cost = rec.total_cost;

  const Vector x_hat0 = rec.x_hat.col(0);
  terms.init_term = x_hat0.dot(schedule.P[0] * x_hat0);
  for (int i = 0; i < spec.N; ++i) {
    const Vector e = rec.x_tilde.col(0).segment(spec.state_offset(i), spec.state_dims[i]);
    terms.init_term += e.dot(schedule.P_tilde[i][0] * e);
  }

  for (int s = 0; s < T; ++s) {
    const Vector gap = rec.u_common.col(s) + schedule.K[s] * rec.x_hat.col(s);
    terms.common_penalty += gap.dot(schedule.Delta[s] * gap);
    for (int i = 0; i < spec.N; ++i) {
      const int r = spec.state_offset(i);
      const int ni = spec.state_dims[i];
      const int a = spec.local_action_offset(i);
      const int mi = spec.local_action_dims[i];
      if (mi > 0) {
        const Vector u_tilde = rec.u.col(s).segment(a, mi) - rec.u_common.col(s).segment(a, mi);
        const Vector local_gap =
            u_tilde + schedule.K_tilde[i][s] * rec.x_tilde.col(s).segment(r, ni);
        terms.local_penalty[i] += local_gap.dot(schedule.Delta_tilde[i][s] * local_gap);
      }
      const Vector w = rec.w.col(s).segment(r, ni);
      terms.noise_term += w.dot(schedule.pi(i, s + 1) * w);
    }
  }
  return terms;
}

CostDecomposition decomposition_check(const SystemSpec& spec, const RiccatiSchedule& schedule,
                                      const LinearStrategy& strategy, std::size_t reps,
                                      std::uint64_t seed, const SimulationOptions& options) {
  if (reps < 1) throw std::invalid_argument("decomposition_check: reps must be >= 1");
  const Simulator sim(spec, strategy, options);
  RunningStat init, common, noise, total, residual;
  std::vector<RunningStat> local(spec.N);
  for_each_trajectory(sim, reps, seed, [&](std::size_t, const TrajectoryRecord& rec) {
    const PathTerms terms = path_terms(spec, schedule, rec);
    init.add(terms.init_term);
    common.add(terms.common_penalty);
    for (int i = 0; i < spec.N; ++i) local[i].add(terms.local_penalty[i]);
    noise.add(terms.noise_term);
    total.add(terms.total_cost);
    residual.add(terms.total_cost - terms.sum());
  });
  CostDecomposition d;
  d.reps = reps;
  d.seed = seed;
  d.init_term = Estimate::of(init);
  d.control_penalty_common = Estimate::of(common);
  for (const auto& s : local) d.control_penalty_local.push_back(Estimate::of(s));
  d.noise_term = Estimate::of(noise);
  d.total_cost = Estimate::of(total);
  d.residual = Estimate::of(residual);
  return d;
}

double OrthogonalityReport::max_abs_z() const {
  double worst = 0.0;
  for (const auto& e : entries) {
    if (e.value.se > 0.0)
      worst = std::max(worst, std::abs(e.value.estimate) / e.value.se);
    else if (e.value.estimate != 0.0)
      return std::numeric_limits<double>::infinity();
  }
  return worst;
}

bool OrthogonalityReport::within(double k) const {
  return delivered_nonzero_error == 0 && failures(k).empty();
}

std::vector<const OrthogonalityEntry*> OrthogonalityReport::failures(double k) const {
  std::vector<const OrthogonalityEntry*> out;
  for (const auto& e : entries)
    if (!e.value.within(k)) out.push_back(&e);
  return out;
}

OrthogonalityAccumulator::OrthogonalityAccumulator(const SystemSpec& spec,
                                                   std::size_t min_group_size)
    : spec_(spec), min_group_size_(min_group_size) {}

std::size_t OrthogonalityAccumulator::slot(const std::string& property, int t,
                                           const std::string& detail) {
  slots_.push_back({property, t, detail});
  stats_.emplace_back();
  return slots_.size() - 1;
}

void OrthogonalityAccumulator::push(std::size_t& cursor, const std::string& property, int t,
                                    const std::string& detail, double value) {
  // Slots are created by the first record and reused in the same order.
  if (cursor == slots_.size()) slot(property, t, detail);
  stats_[cursor++].add(value);
}

void OrthogonalityAccumulator::add(const TrajectoryRecord& rec) {
  const int N = spec_.N;
  const int T = spec_.horizon;
  const int n = spec_.state_dim();
  const int m = spec_.action_dim();
  ++samples_;
  std::size_t cursor = 0;
  auto idx = [](int a, int b) { return "(" + std::to_string(a) + "," + std::to_string(b) + ")"; };

  std::uint64_t prefix = 0;
  const bool track_prefix = N * (T + 1) <= 63;
  for (int t = 0; t <= T; ++t) {
    const Vector x = rec.x.col(t);
    const Vector xh = rec.x_hat.col(t);
    const Vector xt = rec.x_tilde.col(t);
    const Matrix& Q = t < T ? spec_.Q[t] : spec_.Q_terminal;

    for (int i = 0; i < N; ++i) {
      if (rec.gamma(i, t) &&
          !rec.x_tilde.col(t).segment(spec_.state_offset(i), spec_.state_dims[i]).isZero(0.0))
        ++delivered_nonzero_error_;
      if (track_prefix && rec.gamma(i, t)) prefix |= std::uint64_t{1} << (t * N + i);
    }

    // Unconditional and prefix-conditional means of the local errors.
    for (int k = 0; k < n; ++k) push(cursor, "error-mean", t, "xtilde[" + std::to_string(k) + "]", xt[k]);
    if (track_prefix) {
      auto& group = groups_[{t, prefix}];
      if (group.empty()) group.resize(n);
      for (int k = 0; k < n; ++k) group[k].add(xt[k]);
    }

    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        push(cursor, "estimate-error", t, "xhat*xtilde" + idx(a, b), xh[a] * xt[b]);
    push(cursor, "estimate-error", t, "xhat'Q xtilde", xh.dot(Q * xt));

    for (int i = 0; i < N; ++i)
      for (int j = i + 1; j < N; ++j) {
        const Vector ei = xt.segment(spec_.state_offset(i), spec_.state_dims[i]);
        const Vector ej = xt.segment(spec_.state_offset(j), spec_.state_dims[j]);
        for (int a = 0; a < ei.size(); ++a)
          for (int b = 0; b < ej.size(); ++b)
            push(cursor, "cross-error", t,
                 "xtilde" + std::to_string(i) + "*xtilde" + std::to_string(j) + idx(a, b),
                 ei[a] * ej[b]);
        const Matrix Qij = Q.block(spec_.state_offset(i), spec_.state_offset(j),
                                   spec_.state_dims[i], spec_.state_dims[j]);
        push(cursor, "cross-error", t,
             "xtilde" + std::to_string(i) + "'Q" + std::to_string(i) + std::to_string(j) +
                 " xtilde" + std::to_string(j),
             ei.dot(Qij * ej));
      }

    double split = xh.dot(Q * xh);
    for (int i = 0; i < N; ++i) {
      const int r = spec_.state_offset(i);
      const int ni = spec_.state_dims[i];
      split += xt.segment(r, ni).dot(Q.block(r, r, ni, ni) * xt.segment(r, ni));
    }
    push(cursor, "cost-split", t, "x'Qx - split", x.dot(Q * x) - split);

    if (t < T) {
      // Joint (state, action) version with W = [[Q, M], [M', R]].
      const Vector uh = rec.u_common.col(t);
      const Vector ut = rec.u.col(t) - uh;
      Vector s_hat(n + m), s_tilde(n + m);
      s_hat << xh, uh;
      s_tilde << xt, ut;
      Matrix W(n + m, n + m);
      W << spec_.Q[t], spec_.M[t], spec_.M[t].transpose(), spec_.R[t];
      push(cursor, "estimate-error", t, "shat'W stilde", s_hat.dot(W * s_tilde));
      double joint_split = s_hat.dot(W * s_hat);
      for (int i = 0; i < N; ++i) {
        const int r = spec_.state_offset(i);
        const int ni = spec_.state_dims[i];
        const int a = spec_.local_action_offset(i);
        const int mi = spec_.local_action_dims[i];
        Vector si(ni + mi);
        si << xt.segment(r, ni), ut.segment(a, mi);
        Matrix Wi(ni + mi, ni + mi);
        Wi << spec_.Q[t].block(r, r, ni, ni), spec_.M[t].block(r, a, ni, mi),
            spec_.M[t].block(r, a, ni, mi).transpose(), spec_.R[t].block(a, a, mi, mi);
        joint_split += si.dot(Wi * si);
      }
      push(cursor, "cost-split", t, "stage cost - split", rec.stage_cost[t] - joint_split);
    }
  }
}

OrthogonalityReport OrthogonalityAccumulator::report() const {
  OrthogonalityReport r;
  r.samples = samples_;
  r.delivered_nonzero_error = delivered_nonzero_error_;
  for (std::size_t k = 0; k < slots_.size(); ++k)
    r.entries.push_back({slots_[k].property, slots_[k].t, slots_[k].detail,
                         Estimate::of(stats_[k])});
  for (const auto& [key, group] : groups_) {
    if (group.empty() || group.front().count() < min_group_size_) continue;
    std::string bits;
    for (int s = 0; s <= key.first; ++s) {
      if (s) bits += "|";
      for (int i = 0; i < spec_.N; ++i) bits += ((key.second >> (s * spec_.N + i)) & 1) ? '1' : '0';
    }
    for (std::size_t k = 0; k < group.size(); ++k)
      r.entries.push_back({"error-mean", key.first,
                           "xtilde[" + std::to_string(k) + "] | gamma=" + bits,
                           Estimate::of(group[k])});
  }
  return r;
}

OrthogonalityReport orthogonality_check(const SystemSpec& spec,
                                        std::span<const TrajectoryRecord> ensemble,
                                        std::size_t min_group_size) {
  if (ensemble.empty()) throw std::invalid_argument("orthogonality_check: empty ensemble");
  OrthogonalityAccumulator acc(spec, min_group_size);
  for (const auto& rec : ensemble) acc.add(rec);
  return acc.report();
}

OrthogonalityReport orthogonality_check(const Simulator& sim, std::size_t reps,
                                        std::uint64_t seed, std::size_t min_group_size) {
  if (reps < 1) throw std::invalid_argument("orthogonality_check: empty ensemble");
  OrthogonalityAccumulator acc(sim.spec(), min_group_size);
  for_each_trajectory(sim, reps, seed, [&](std::size_t, const TrajectoryRecord& rec) { acc.add(rec); });
  return acc.report();
}

}  // namespace lqnet
