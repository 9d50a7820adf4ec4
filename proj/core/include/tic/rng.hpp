#pragma once

#include <cstdint>

namespace tic {

// Counter-based random stream: output i of stream s is a pure function of
// (seed, s, i), so per-path substreams are reproducible regardless of how
// paths are partitioned across threads.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  // Uniform in (0, 1].
  double uniform01();

  // Standard normal via the Marsaglia polar method.
  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tic
