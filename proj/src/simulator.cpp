#include <lqnet/simulator.hpp>

#include <lqnet/parallel.hpp>

#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace lqnet {

ChannelOutput TrajectoryRecord::z(const SystemSpec& spec, int i, int t) const {
  return channel_output(x.col(t).segment(spec.state_offset(i), spec.state_dims[i]),
                        gamma(i, t));
}

Vector plant_step(const Vector& x, const Vector& u, const Vector& w, const GlobalMatrices& g) {
  Vector next = g.A * x + w;
  if (u.size() > 0) next += g.B * u;
  return next;
}

double stage_cost(const Vector& x, const Vector& u, const Matrix& Q, const Matrix& M,
                  const Matrix& R) {
  double c = x.dot(Q * x);
  if (u.size() > 0) c += 2.0 * x.dot(M * u) + u.dot(R * u);
  return c;
}

double accumulate_total(const Vector& stage_costs, double terminal_cost) {
  double total = 0.0;
  for (Eigen::Index t = 0; t < stage_costs.size(); ++t) total += stage_costs[t];
  return total + terminal_cost;
}

Simulator::Simulator(const SystemSpec& spec, LinearStrategy strategy, SimulationOptions options)
    : spec_(spec),
      strategy_(std::move(strategy)),
      options_(options),
      family_(options.noise_family.value_or(spec.noise_family)),
      globals_(assemble_global(spec)) {
  strategy_.check(spec_);
  for (int i = 0; i < spec_.N; ++i) {
    sqrt_sigma_x0_.push_back(psd_sqrt(spec_.sigma_x0[i]));
    std::vector<Matrix> roots;
    for (int t = 0; t < spec_.horizon; ++t) roots.push_back(psd_sqrt(spec_.sigma_w[i][t]));
    sqrt_sigma_w_.push_back(std::move(roots));
  }
}

TrajectoryRecord Simulator::run(std::uint64_t seed, std::uint64_t replication) const {
  const int N = spec_.N;
  const int T = spec_.horizon;
  const int n = spec_.state_dim();
  const int m = spec_.action_dim();
  auto stream = [&](RandomSource source, int i, int t) {
    return CounterRng(StreamKey{seed, replication, source, static_cast<std::uint64_t>(i),
                                static_cast<std::uint64_t>(t)});
  };
  auto split = [&](const Vector& v) {
    std::vector<Vector> parts;
    for (int i = 0; i < N; ++i)
      parts.push_back(v.segment(spec_.state_offset(i), spec_.state_dims[i]));
    return parts;
  };

  TrajectoryRecord rec;
  rec.x.resize(n, T + 1);
  rec.x_hat.resize(n, T + 1);
  rec.x_tilde.resize(n, T + 1);
  rec.u.resize(m, T);
  rec.u_common.resize(m, T);
  rec.w.resize(n, T);
  rec.gamma.resize(N, T + 1);
  rec.stage_cost.resize(T);

  std::vector<Vector> x0;
  std::vector<bool> gamma(N);
  for (int i = 0; i < N; ++i) {
    auto rng = stream(RandomSource::initial_state, i, 0);
    x0.push_back(sqrt_sigma_x0_[i] * standard_sample(rng, family_, spec_.state_dims[i]));
    auto channel = stream(RandomSource::channel, i, 0);
    gamma[i] = draw_delivery(channel, spec_.drop_prob[i]);
  }
  EstimatorState est = estimator_init(x0, gamma);
  Vector x(n);
  for (int i = 0; i < N; ++i) x.segment(spec_.state_offset(i), spec_.state_dims[i]) = x0[i];

  auto record_state = [&](int t) {
    rec.x.col(t) = x;
    rec.x_hat.col(t) = est.stacked_hat();
    rec.x_tilde.col(t) = est.stacked_tilde();
    for (int i = 0; i < N; ++i) rec.gamma(i, t) = gamma[i];
  };
  record_state(0);

  for (int t = 0; t < T; ++t) {
    const ControlDecision d = apply_strategy(strategy_, spec_, t, est);
    const Vector u = d.stacked();
    rec.u.col(t) = u;
    rec.u_common.col(t) = d.stacked_common();
    rec.stage_cost[t] = stage_cost(x, u, spec_.Q[t], spec_.M[t], spec_.R[t]);

    const std::vector<Vector> predicted = estimator_predict(est, d.u_remote, d.u_hat, spec_);
    Vector w(n);
    for (int i = 0; i < N; ++i) {
      auto rng = stream(RandomSource::process_noise, i, t);
      w.segment(spec_.state_offset(i), spec_.state_dims[i]) =
          sqrt_sigma_w_[i][t] * standard_sample(rng, family_, spec_.state_dims[i]);
    }
    rec.w.col(t) = w;
    x = plant_step(x, u, w, globals_);

    const std::vector<Vector> local = split(x);
    std::vector<ChannelOutput> z;
    for (int i = 0; i < N; ++i) {
      auto channel = stream(RandomSource::channel, i, t + 1);
      gamma[i] = draw_delivery(channel, spec_.drop_prob[i]);
      z.push_back(channel_output(local[i], gamma[i]));
    }
    est = estimator_update(est, predicted, z, gamma, local);
    record_state(t + 1);
  }
  rec.terminal_cost = x.dot(spec_.Q_terminal * x);
  rec.total_cost = accumulate_total(rec.stage_cost, rec.terminal_cost);
  return rec;
}

TrajectoryRecord run_trajectory(const SystemSpec& spec, const LinearStrategy& strategy,
                                std::uint64_t seed, std::uint64_t replication) {
  return Simulator(spec, strategy).run(seed, replication);
}

void for_each_trajectory(const Simulator& sim, std::size_t reps, std::uint64_t seed,
                         const std::function<void(std::size_t, const TrajectoryRecord&)>& visit) {
  constexpr std::size_t kChunk = 8192;
  for (std::size_t lo = 0; lo < reps; lo += kChunk) {
    const std::size_t hi = std::min(reps, lo + kChunk);
    auto records = parallel_map(lo, hi, sim.options().threads,
                                [&](std::size_t rep) { return sim.run(seed, rep); });
    for (std::size_t k = 0; k < records.size(); ++k) visit(lo + k, records[k]);
  }
}

CostReport monte_carlo(const SystemSpec& spec, const LinearStrategy& strategy, std::size_t reps,
                       std::uint64_t seed, const SimulationOptions& options) {
  if (reps < 1) throw std::invalid_argument("monte_carlo: reps must be >= 1");
  const Simulator sim(spec, strategy, options);
  const auto totals = parallel_map(0, reps, options.threads, [&](std::size_t rep) {
    return sim.run(seed, rep).total_cost;
  });
  RunningStat stat;
  for (double c : totals) stat.add(c);
  CostReport report;
  report.reps = reps;
  report.mean = stat.mean();
  report.se = stat.standard_error();
  report.se_defined = reps > 1;
  report.seed = seed;
  return report;
}

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trajectory_csv(const SystemSpec& spec, const TrajectoryRecord& rec, bool header,
                           std::optional<std::size_t> replication) {
  const int n = spec.state_dim();
  const int m = spec.action_dim();
  const int T = rec.horizon();
  std::ostringstream os;
  if (header) {
    if (replication) os << "rep,";
    os << "t";
    for (int k = 0; k < n; ++k) os << ",x[" << k << "]";
    for (int k = 0; k < m; ++k) os << ",u[" << k << "]";
    for (int i = 0; i < spec.N; ++i) os << ",gamma[" << i << "]";
    for (int k = 0; k < n; ++k) os << ",z[" << k << "]";
    for (int k = 0; k < n; ++k) os << ",xhat[" << k << "]";
    for (int k = 0; k < n; ++k) os << ",xtilde[" << k << "]";
    os << ",stage_cost\n";
  }
  for (int t = 0; t <= T; ++t) {
    if (replication) os << *replication << ",";
    os << t;
    for (int k = 0; k < n; ++k) os << "," << format_number(rec.x(k, t));
    for (int k = 0; k < m; ++k) {
      os << ",";
      if (t < T) os << format_number(rec.u(k, t));
    }
    for (int i = 0; i < spec.N; ++i) os << "," << (rec.gamma(i, t) ? 1 : 0);
    for (int i = 0; i < spec.N; ++i) {
      const ChannelOutput z = rec.z(spec, i, t);
      for (int k = 0; k < spec.state_dims[i]; ++k) {
        os << ",";
        if (z) os << format_number((*z)[k]);
      }
    }
    for (int k = 0; k < n; ++k) os << "," << format_number(rec.x_hat(k, t));
    for (int k = 0; k < n; ++k) os << "," << format_number(rec.x_tilde(k, t));
    os << "," << format_number(t < T ? rec.stage_cost[t] : rec.terminal_cost) << "\n";
  }
  return os.str();
}

}  // namespace lqnet
