#pragma once

#include <cstdint>
#include <limits>

namespace pdim {

// Counter-based 64-bit generator: the i-th output of a stream is a fixed
// bijective mix of (key + i * golden_gamma), so any position can be reached
// directly and streams are split by hashing a stream index into the key.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Independent child stream; does not advance this generator.
  CounterRng substream(std::uint64_t index) const;

  // Uniform on the open interval (0, 1).
  double uniform();
  // Standard normal by inverse-CDF transform of uniform().
  double normal();

  std::uint64_t position() const { return counter_; }
  void seek(std::uint64_t position) { counter_ = position; }

 private:
  struct KeyTag {};
  CounterRng(KeyTag, std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Named substream identifiers used by the experiment runner.
enum class Stream : std::uint64_t { simulation = 1, gld = 2, audit = 3 };

std::uint64_t mix64(std::uint64_t z);

}  // namespace pdim
