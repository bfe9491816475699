#include <lqnet/rng.hpp>

#include <cmath>
#include <random>

namespace lqnet {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(const StreamKey& key) {
  std::uint64_t h = splitmix64(key.seed);
  h = splitmix64(h ^ key.replication);
  h = splitmix64(h ^ static_cast<std::uint64_t>(key.source));
  h = splitmix64(h ^ key.subsystem);
  h = splitmix64(h ^ key.time);
  stream_ = h;
}

CounterRng::result_type CounterRng::operator()() {
  return splitmix64(stream_ ^ splitmix64(counter_++));
}

double CounterRng::uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

Vector standard_sample(CounterRng& rng, NoiseFamily family, Eigen::Index dim) {
  Vector v(dim);
  switch (family) {
    case NoiseFamily::gaussian: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Eigen::Index k = 0; k < dim; ++k) v[k] = normal(rng);
      break;
    }
    case NoiseFamily::uniform: {
      const double half_width = std::sqrt(3.0);
      for (Eigen::Index k = 0; k < dim; ++k) v[k] = half_width * (2.0 * rng.uniform01() - 1.0);
      break;
    }
    case NoiseFamily::rademacher:
      for (Eigen::Index k = 0; k < dim; ++k) v[k] = (rng() >> 63) ? 1.0 : -1.0;
      break;
  }
  return v;
}

bool draw_delivery(CounterRng& rng, double drop_prob) {
  if (drop_prob <= 0.0) return true;
  if (drop_prob >= 1.0) return false;
  return rng.uniform01() >= drop_prob;
}

Matrix psd_sqrt(const Matrix& covariance) {
  if (covariance.size() == 0) return covariance;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(covariance));
  Vector root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * root.asDiagonal() * solver.eigenvectors().transpose();
}

}  // namespace lqnet
