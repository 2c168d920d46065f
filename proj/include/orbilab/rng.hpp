#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace orbilab {

// Seedable random stream. A stream is identified by (master_seed, stream_index);
// identical pairs reproduce identical draws bit for bit, distinct stream indices
// give statistically independent streams. Parallel code hands worker k the
// stream with index base+k and never shares a stream between threads.
//
// All distributions are generated from the raw 64-bit output of a mt19937_64
// seeded through SplitMix64, so draws do not depend on the standard library's
// unspecified distribution algorithms.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index = 0);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  // Fresh stream derived from the same master seed.
  RngStream substream(std::uint64_t index) const {
    return RngStream(master_seed_, index);
  }

  std::uint64_t next_u64();

  // Uniform on [0,1) with 53 random bits.
  double uniform();

  // Uniform on [0, bound) without modulo bias.
  std::uint64_t uniform_below(std::uint64_t bound);

  // Standard normal via Box-Muller (cached pair).
  double normal();

  // (x + iy)/sqrt(2) with x,y standard normal; E|z|^2 = 1.
  std::complex<double> complex_normal();

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 gen_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace orbilab
