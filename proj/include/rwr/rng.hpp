#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace rwr {

// Reproducible stream keyed by (seed, stream_id). Streams with different ids are
// seeded through std::seed_seq, which decorrelates the engine states.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() {
    ++draws_;
    return engine_();
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t draws() const { return draws_; }

  // Uniform integer in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n);
  // Uniform double in [0, 1) with 53 random bits.
  double uniform();
  bool bernoulli(double p) { return p >= 1.0 || (p > 0.0 && uniform() < p); }
  std::uint64_t poisson(double mean);

  // Child stream; a deterministic function of (seed, stream_id, child).
  RngStream split(std::uint64_t child) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t draws_ = 0;
  std::mt19937_64 engine_;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace rwr
