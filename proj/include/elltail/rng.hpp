#pragma once

#include <cstdint>
#include <limits>

namespace elltail {

// Counter-based 64-bit generator: the k-th output of stream s under seed is a
// pure function of (seed, s, k), so block-parallel sampling reproduces the
// serial output exactly. The output map is the SplitMix64 finalizer.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream);

  result_type operator()() { return at(counter_++); }
  result_type at(std::uint64_t counter) const;

  // Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  std::uint64_t counter() const { return counter_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace elltail
