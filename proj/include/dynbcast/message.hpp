// Store-and-forward wire format and knowledge-set helpers.

#pragma once

#include <cstdint>
#include <vector>

#include "dynbcast/core.hpp"

namespace dynbcast {

// Broadcast messages are symbolic indices 1..s. Index 0 is the control
// message (the bottom symbol used by concurrency-resistant wrappers); it
// never counts toward communication capacity or knowledge sets.
inline constexpr uint32_t kControlMessage = 0;

struct SfMessage {
  std::vector<uint32_t> ids;

  static SfMessage single(uint32_t id) { return SfMessage{{id}}; }
  static SfMessage control() { return SfMessage{{kControlMessage}}; }

  bool is_control() const { return ids.size() == 1 && ids[0] == kControlMessage; }
  uint32_t payload_count() const {
    uint32_t k = 0;
    for (uint32_t id : ids)
      if (id != kControlMessage) ++k;
    return k;
  }
};

// Trace hook used by the engine to fill HistoryRecord::tx_ids and to enforce
// the capacity discipline. Content-free message types return empty.
inline const std::vector<uint32_t>& trace_ids(const SfMessage& m) { return m.ids; }

// Per-node knowledge over broadcast messages 1..s, s <= 64.
using KnowledgeMask = uint64_t;

inline KnowledgeMask knowledge_bit(uint32_t id) {
  return id == kControlMessage ? 0 : (KnowledgeMask{1} << (id - 1));
}

inline void require_mask_capacity(uint32_t s) {
  if (s > 64)
    throw ConfigError("store-and-forward protocols support at most 64 broadcast messages; got " +
                      std::to_string(s));
}

inline uint32_t mask_popcount(KnowledgeMask m) {
  return static_cast<uint32_t>(__builtin_popcountll(m));
}

}  // namespace dynbcast
