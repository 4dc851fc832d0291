#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace nui::detail {

// std::mt19937_64's output sequence is fixed by the standard; the distributions are
// not, so sampling goes through these helpers to stay bit-reproducible across
// standard library implementations.
using Engine = std::mt19937_64;

// Unbiased draw from [0, n) by rejection. n must be > 0.
inline std::uint64_t uniform_index(Engine& engine, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t r = engine();
    if (r >= threshold) return r % n;
  }
}

// First `count` entries of a Fisher-Yates shuffle of [0, n): a uniform draw of
// `count` distinct indices, in draw order.
inline std::vector<std::size_t> sample_without_replacement(Engine& engine, std::size_t n,
                                                           std::size_t count) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(engine, n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace nui::detail
