#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "ilmc/types.hpp"

namespace ilmc {

/// Philox4x32-10 block function (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                                std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/// Purpose tags keep independent draws for the same (replica, step) apart.
enum class StreamPurpose : std::uint32_t {
  kIncrement = 0,
  kInitial = 1,
  kBridge = 2,
  kAuxiliary = 3,
};

/// Counter-based random stream keyed by (seed, replica, step, purpose).
///
/// Any (replica, step) stream can be reconstructed in isolation, which is what
/// makes the parallel replica kernels bitwise reproducible.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t replica, std::uint64_t step,
             StreamPurpose purpose = StreamPurpose::kIncrement)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        step_(step),
        replica_(replica),
        purpose_(static_cast<std::uint32_t>(purpose)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (cached_ == 0) refill();
    const int idx = 2 - cached_;
    --cached_;
    return (static_cast<std::uint64_t>(block_[2 * idx]) << 32) | block_[2 * idx + 1];
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() { return normal_(*this); }

  /// Vector of i.i.d. N(0, variance) coordinates.
  Vec normal_vec(int dim, double variance) {
    const double sd = std::sqrt(variance);
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = sd * normal();
    return v;
  }

 private:
  void refill() {
    const std::uint32_t ctr_lo = counter_++;
    block_ = philox4x32({ctr_lo ^ (purpose_ << 24), static_cast<std::uint32_t>(step_),
                         static_cast<std::uint32_t>(step_ >> 32),
                         static_cast<std::uint32_t>(replica_) ^
                             (static_cast<std::uint32_t>(replica_ >> 32) * 0x85EBCA6Bu)},
                        key_);
    cached_ = 2;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t step_;
  std::uint64_t replica_;
  std::uint32_t purpose_;
  std::uint32_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int cached_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ilmc
