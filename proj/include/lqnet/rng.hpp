#pragma once

#include <lqnet/model.hpp>

#include <cstdint>
#include <limits>

namespace lqnet {

// Sources of primitive randomness. Each (replication, source, subsystem, time)
// tuple owns an independent substream derived from the root seed, so draws do
// not depend on the order in which replications are executed.
enum class RandomSource : std::uint64_t { initial_state = 1, process_noise = 2, channel = 3 };

struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  RandomSource source = RandomSource::initial_state;
  std::uint64_t subsystem = 0;
  std::uint64_t time = 0;
};

// Counter-based generator: output k is a SplitMix64 finalizer applied to a
// hash of the stream key and k. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(const StreamKey& key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01();

 private:
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Zero-mean, unit-variance vector of independent draws from the family.
Vector standard_sample(CounterRng& rng, NoiseFamily family, Eigen::Index dim);

// Bernoulli channel state: true (delivered) with probability 1 - drop_prob.
bool draw_delivery(CounterRng& rng, double drop_prob);

// Symmetric PSD square root; negative rounding eigenvalues are clamped.
Matrix psd_sqrt(const Matrix& covariance);

}  // namespace lqnet
