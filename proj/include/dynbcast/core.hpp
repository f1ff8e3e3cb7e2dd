// Synchronous radio-network execution model: round resolution, interval
// connectivity, and the audited execution history adversaries may inspect.
//
// Reception rule: in round r a listening node u receives from v iff v is the
// only neighbor of u in G_r that transmits in round r. Transmitters hear
// nothing (half-duplex), and collisions are indistinguishable from silence.

#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dynbcast/graph.hpp"
#include "dynbcast/rng.hpp"

namespace dynbcast {

using Round = uint64_t;

inline constexpr uint64_t kInfinite = std::numeric_limits<uint64_t>::max();

struct AuditError : SimError {
  using SimError::SimError;
};
// An adversary touched history beyond what its tau allows.
struct TauAuditError : AuditError {
  using AuditError::AuditError;
};
// An emitted schedule broke the declared T-interval connectivity promise.
struct IntervalAuditError : AuditError {
  using AuditError::AuditError;
};
struct CapacityError : SimError {
  using SimError::SimError;
};
struct DispatchError : SimError {
  using SimError::SimError;
};

struct SimConfig {
  uint32_t n = 8;           // node count
  uint32_t s = 1;           // number of broadcast messages
  uint32_t c = 1;           // communication capacity (broadcast messages per packet)
  uint32_t B = 1;           // broadcast-message size, accounting metadata only
  uint64_t seed = 1;
  Round round_limit = Round{1} << 40;

  void validate() const {
    if (n < 2) throw ConfigError("SimConfig: n must be >= 2");
    if (s < 1) throw ConfigError("SimConfig: s must be >= 1");
    if (c < 1) throw ConfigError("SimConfig: c must be >= 1");
    if (round_limit < 1) throw ConfigError("SimConfig: round_limit must be >= 1");
  }
};

// ---------------------------------------------------------------------------
// Round resolution

template <typename Msg>
struct Arrival {
  const Msg* msg = nullptr;  // nullptr = silence
  NodeId from = 0;
};

struct RoundStats {
  uint32_t transmitter_count = 0;
  uint32_t receptions = 0;
  bool collision = false;  // some listener had two or more transmitting neighbors
};

// intents[v-1]: pointer to the message node v transmits, or nullptr.
// Writes one Arrival per node into `out`.
template <typename Msg>
void resolve_round(const RoundGraph& graph, const std::vector<const Msg*>& intents,
                   std::vector<Arrival<Msg>>& out, RoundStats* stats = nullptr) {
  const uint32_t n = graph.node_count();
  if (intents.size() != n)
    throw ConfigError("resolve_round: intents size " + std::to_string(intents.size()) +
                      " != node count " + std::to_string(n));
  out.assign(n, Arrival<Msg>{});
  const uint32_t words = graph.words_per_row();
  static thread_local std::vector<uint64_t> tx_mask;
  tx_mask.assign(words, 0);
  uint32_t tx_count = 0;
  for (uint32_t i = 0; i < n; ++i) {
    if (intents[i]) {
      tx_mask[i >> 6] |= uint64_t{1} << (i & 63);
      ++tx_count;
    }
  }
  if (stats) *stats = RoundStats{tx_count, 0, false};
  if (tx_count == 0) return;
  if (tx_count == 1) {
    // Sole transmitter: exactly its listening neighbors receive.
    uint32_t sender = 0;
    for (uint32_t w = 0; w < words; ++w)
      if (tx_mask[w]) sender = w * 64 + static_cast<uint32_t>(__builtin_ctzll(tx_mask[w]));
    const uint64_t* row = graph.row(sender);
    for (uint32_t w = 0; w < words; ++w) {
      uint64_t bits = row[w];
      while (bits) {
        const uint32_t i = w * 64 + static_cast<uint32_t>(__builtin_ctzll(bits));
        bits &= bits - 1;
        if (!intents[i]) {
          out[i] = Arrival<Msg>{intents[sender], sender + 1};
          if (stats) ++stats->receptions;
        }
      }
    }
    return;
  }
  for (uint32_t i = 0; i < n; ++i) {
    if (intents[i]) continue;  // transmitters receive silence
    const uint64_t* row = graph.row(i);
    uint32_t heard = 0;
    uint32_t sender = 0;
    for (uint32_t w = 0; w < words && heard < 2; ++w) {
      uint64_t bits = row[w] & tx_mask[w];
      while (bits && heard < 2) {
        sender = w * 64 + static_cast<uint32_t>(__builtin_ctzll(bits));
        bits &= bits - 1;
        ++heard;
      }
    }
    if (heard == 1) {
      out[i] = Arrival<Msg>{intents[sender], sender + 1};
      if (stats) ++stats->receptions;
    } else if (heard >= 2 && stats) {
      stats->collision = true;
    }
  }
}

// ---------------------------------------------------------------------------
// T-interval connectivity

// True iff for every window start r, the intersection of the edges present in
// rounds r..min(r+T-1, end) is connected on all nodes. Trailing partial
// windows are checked on the available suffix.
inline bool check_interval_connectivity(const std::vector<RoundGraph>& schedule, uint64_t T) {
  if (T < 1) throw DomainError("check_interval_connectivity: T must be >= 1");
  if (schedule.empty()) throw DomainError("check_interval_connectivity: empty schedule");
  const size_t len = schedule.size();
  for (size_t r = 0; r < len; ++r) {
    RoundGraph acc = schedule[r];
    const size_t last = (T == kInfinite || r + T - 1 >= len) ? len - 1 : r + T - 1;
    for (size_t j = r + 1; j <= last; ++j) acc.intersect_with(schedule[j]);
    if (!acc.connected()) return false;
    if (last == len - 1 && T != 1) break;  // remaining starts are suffixes of this window
  }
  return true;
}

// Online variant used by the engine to verify an adversary's T promise while
// a run progresses, without retaining the whole schedule.
class IntervalAuditor {
 public:
  IntervalAuditor(uint32_t n, uint64_t T_promise) : n_(n), T_(T_promise) {}

  void feed(const RoundGraph& g, Round r) {
    if (g.node_count() != n_) throw ConfigError("IntervalAuditor: node count mismatch");
    rounds_seen_ = r;
    if (T_ == kInfinite) {
      if (!running_) {
        running_ = g;
      } else {
        running_->intersect_with(g);
      }
      return;
    }
    if (T_ == 1) {
      if (!g.connected()) fail(r);
      return;
    }
    window_.push_back(g);
    if (window_.size() == T_) {
      RoundGraph acc = window_.front();
      for (size_t i = 1; i < window_.size(); ++i) acc.intersect_with(window_[i]);
      if (!acc.connected()) fail(rounds_seen_ - T_ + 1);
      window_.pop_front();
    }
  }

  // Call once after the last round: covers the T=inf case and schedules
  // shorter than one full window.
  void finish() const {
    if (rounds_seen_ == 0) return;
    if (T_ == kInfinite) {
      if (running_ && !running_->connected()) fail(1);
      return;
    }
    if (T_ > 1 && rounds_seen_ < T_ && !window_.empty()) {
      RoundGraph acc = window_.front();
      for (size_t i = 1; i < window_.size(); ++i) acc.intersect_with(window_[i]);
      if (!acc.connected()) fail(1);
    }
  }

 private:
  [[noreturn]] void fail(Round window_start) const {
    throw IntervalAuditError("T-interval promise broken: window starting at round " +
                             std::to_string(window_start) + " has a disconnected intersection");
  }

  uint32_t n_;
  uint64_t T_;
  Round rounds_seen_ = 0;
  std::optional<RoundGraph> running_;
  std::deque<RoundGraph> window_;
};

// ---------------------------------------------------------------------------
// Execution history and the tau-filtered adversary view

// Everything the engine records about one round. tx_ids holds the broadcast
// message indices carried by each transmitter (empty for content-free
// packets, id 0 is the control message).
struct HistoryRecord {
  Round round = 0;
  std::vector<std::pair<uint32_t, uint64_t>> draws;  // (node, raw draw)
  std::vector<NodeId> transmitters;
  std::vector<std::vector<uint32_t>> tx_ids;
  RoundGraph graph;
  std::vector<NodeId> recv_from;  // per node, 0 = silence
  bool complete = false;
};

// Append-only per-round records. Unless asked to retain the full trace, only
// a sliding window of recent rounds is kept, in a ring of recycled records so
// the round loop does not allocate. The records an adversary may legally read
// are always within the window for the adversaries in this repo.
class DynamicHistory {
 public:
  DynamicHistory(uint32_t n, bool retain_all, size_t window = 16)
      : n_(n), retain_all_(retain_all), window_(window < 2 ? 2 : window) {
    if (!retain_all_) ring_.resize(window_);
  }

  uint32_t node_count() const { return n_; }
  Round last_started() const { return next_round_; }
  bool tx_ids_recorded() const { return tx_ids_recorded_; }
  void set_tx_ids_recorded(bool on) { tx_ids_recorded_ = on; }

  HistoryRecord& begin_round(Round r) {
    next_round_ = r;
    HistoryRecord& rec = retain_all_ ? all_.emplace_back() : ring_[r % window_];
    rec.round = r;
    rec.draws.clear();
    rec.transmitters.clear();
    rec.tx_ids.clear();
    rec.recv_from.assign(n_, 0);
    rec.complete = false;
    if (!retain_all_ && r > window_) first_round_ = r - window_ + 1;
    return rec;
  }

  HistoryRecord& current() { return mutable_record(next_round_); }

  const HistoryRecord& record(Round r) const {
    if (r < first_round_ || r > next_round_ || r == 0)
      throw SimError("DynamicHistory: round " + std::to_string(r) +
                     " not retained (window starts at " + std::to_string(first_round_) + ")");
    return retain_all_ ? all_[static_cast<size_t>(r - 1)] : ring_[r % window_];
  }

  std::vector<HistoryRecord> take_all() { return std::move(all_); }

 private:
  HistoryRecord& mutable_record(Round r) {
    return retain_all_ ? all_[static_cast<size_t>(r - 1)] : ring_[r % window_];
  }

  uint32_t n_;
  bool retain_all_;
  size_t window_;
  bool tx_ids_recorded_ = false;
  Round first_round_ = 1;
  Round next_round_ = 0;
  std::vector<HistoryRecord> ring_;
  std::vector<HistoryRecord> all_;
};

// The only handle adversaries get. Visibility is derived from tau: complete
// records of rounds <= r - tau, plus (for tau = 0) the current round's draws
// and transmit intents. Any access outside that throws TauAuditError, so a
// policy reading forbidden history fails the run loudly.
class HistoryView {
 public:
  HistoryView(const DynamicHistory& h, Round current, uint64_t tau)
      : h_(&h),
        current_(current),
        complete_limit_(tau == kInfinite ? 0 : (tau >= current ? 0 : current - tau)),
        current_visible_(tau == 0) {}

  uint32_t node_count() const { return h_->node_count(); }
  Round current_round() const { return current_; }
  // Highest round whose full record (graph, receptions) is visible.
  Round complete_limit() const { return complete_limit_; }
  Round max_round_accessed() const { return max_accessed_; }

  const std::vector<std::pair<uint32_t, uint64_t>>& draws(Round r) const {
    return partial_record(r).draws;
  }
  const std::vector<NodeId>& transmitters(Round r) const {
    return partial_record(r).transmitters;
  }
  const std::vector<std::vector<uint32_t>>& transmitted_ids(Round r) const {
    if (!h_->tx_ids_recorded())
      throw SimError("transmitted ids were not recorded for this run; enable record_tx_ids");
    return partial_record(r).tx_ids;
  }
  const RoundGraph& graph(Round r) const { return complete_record(r).graph; }
  const std::vector<NodeId>& receptions(Round r) const { return complete_record(r).recv_from; }

 private:
  const HistoryRecord& partial_record(Round r) const {
    const Round limit = current_visible_ ? current_ : complete_limit_;
    if (r < 1 || r > limit)
      throw TauAuditError("adversary accessed round " + std::to_string(r) +
                          " randomness; visible limit is " + std::to_string(limit));
    note(r);
    return h_->record(r);
  }
  const HistoryRecord& complete_record(Round r) const {
    if (r < 1 || r > complete_limit_)
      throw TauAuditError("adversary accessed round " + std::to_string(r) +
                          " outcome; visible limit is " + std::to_string(complete_limit_));
    note(r);
    return h_->record(r);
  }
  void note(Round r) const {
    if (r > max_accessed_) max_accessed_ = r;
  }

  const DynamicHistory* h_;
  Round current_;
  Round complete_limit_;
  bool current_visible_;
  mutable Round max_accessed_ = 0;
};

}  // namespace dynbcast
