// Deterministic seeded random streams.
//
// Every source of randomness in a run (one per node, one per adversary, one
// per referee, ...) is an independent RngStream derived from the run seed and
// a textual label. Identical (seed, label) pairs always produce identical
// draws, independent of platform or standard library, so whole executions
// replay bit-exactly.

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>
#include <cmath>
#include <utility>

namespace dynbcast {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline uint64_t fnv1a64(std::string_view text) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Sink for the per-round randomness ledger kept by the engine. Each entry is
// the raw 64-bit output of one draw, tagged with the drawing node.
struct DrawLedger {
  std::vector<std::pair<uint32_t, uint64_t>>* entries = nullptr;
  uint32_t node = 0;
};

// xoshiro256++ stream. Small state, ~1ns per draw, well-studied.
class RngStream {
 public:
  RngStream() : RngStream(0) {}

  explicit RngStream(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  static RngStream from_label(uint64_t seed, std::string_view label) {
    return RngStream(seed ^ fnv1a64(label));
  }

  void set_ledger(DrawLedger* ledger) { ledger_ = ledger; }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    if (ledger_ && ledger_->entries)
      ledger_->entries->emplace_back(ledger_->node, result);
    return result;
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) {
    if (p >= 1.0) return true;
    if (p <= 0.0) return false;
    return uniform() < p;
  }

  // Uniform in [0, bound). bound must be > 0.
  uint64_t uniform_int(uint64_t bound) {
    if (bound <= 1) {
      // Still consume a draw so call patterns stay uniform across bounds.
      next_u64();
      return 0;
    }
    // Bitmask rejection: unbiased, few retries.
    uint64_t mask = ~uint64_t{0} >> countl_zero(bound - 1);
    uint64_t v;
    do {
      v = next_u64() & mask;
    } while (v >= bound);
    return v;
  }

  // Uniform k-subset of items, via partial Fisher-Yates. Order is random.
  template <typename T>
  std::vector<T> sample(std::vector<T> items, size_t k) {
    if (k > items.size()) k = items.size();
    for (size_t i = 0; i < k; ++i) {
      size_t j = i + static_cast<size_t>(uniform_int(items.size() - i));
      std::swap(items[i], items[j]);
    }
    items.resize(k);
    return items;
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  static int countl_zero(uint64_t x) {
    int n = 0;
    for (uint64_t probe = uint64_t{1} << 63; probe && !(x & probe); probe >>= 1) ++n;
    return n;
  }

  uint64_t s_[4];
  DrawLedger* ledger_ = nullptr;
};

}  // namespace dynbcast
