#pragma once

#include <cstdint>
#include <random>

#include "zopn/common.hpp"

namespace zopn {

/// Random stream keyed by (master seed, run index, iteration index).
///
/// The three keys are mixed with splitmix64 into the seed of a Mersenne
/// twister, so any (seed, run, iteration) cell can be regenerated on its own
/// without replaying earlier draws. Multi-run experiments are reproducible
/// bit-for-bit regardless of how runs are scheduled across workers.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  static RngStream derive(std::uint64_t master_seed, std::uint64_t run, std::uint64_t iteration);

  double normal();
  double uniform();
  Vector normal_vector(Index n);
  /// Uniform on the unit sphere (normalized Gaussian; zero draws rejected).
  Vector unit_sphere(Index n);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace zopn
