#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace wlqc {

// Philox4x32-10 counter-based generator.
//
// The 64-bit key is the user seed; the 128-bit counter is split into a
// 64-bit stream id (high half) and a 64-bit draw index (low half).  Streams
// never overlap, so "one stream per Monte-Carlo run" gives independent,
// replayable runs: Philox4x32(seed, run_index).  Output is platform
// independent, which keeps emitted CSV files byte-identical across re-runs.
class Philox4x32 {
 public:
  explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        stream_(stream) {}

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on (0, 1] with 53 random bits (never 0, safe under log()).
  double uniform01();

  // Uniform on [lo, hi).
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller; second variate is cached.
  double normal();

  Eigen::VectorXd normal_vector(int dim);

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

 private:
  void refill();

  std::uint32_t key0_, key1_;
  std::uint64_t stream_;
  std::uint64_t index_ = 0;
  std::uint32_t block_[4] = {0, 0, 0, 0};
  int pos_ = 4;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace wlqc
