#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace tatraj {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed for stream `stream` of the generator family keyed by `seed`. Distinct
// stream ids give statistically independent sequences, so work keyed by an
// index reproduces regardless of which thread runs it.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream) : engine_(derive_seed(seed, stream)) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Index drawn with probability proportional to `weights`. Zero-weight
  // entries are never returned.
  std::size_t categorical(std::span<const double> weights) noexcept;

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tatraj
