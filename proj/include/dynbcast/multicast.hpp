// Generic multi-message broadcast algorithms and the abstract distributed
// coupon collection process they are analyzed through.
//
// CouponMulticast (large capacity c): ceil(log2 n) phases; in phase i the
// minimum number of holders of each message is driven from 2^(i-1) to 2^i by
// repeated k-limited broadcasts of random c-subsets from nodes marked with
// probability 1/n.
//
// ResistantMulticast (c = 1): while undelivered messages remain, each holder
// marks each of its pending messages with probability 1/x and the marked ones
// race through one concurrency-resistant broadcast; a success delivers one
// message to everyone and everyone decrements x.

#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "dynbcast/protocols.hpp"

namespace dynbcast {

// ---------------------------------------------------------------------------
// Distributed coupon collection (abstract process)

struct CouponState {
  uint32_t n_bins = 0;
  uint32_t s_coupons = 0;
  uint32_t ell = 1;  // declared minimum copies per coupon
  uint32_t cap = 1;  // coupons collected per opened bin
  std::vector<std::vector<uint32_t>> placement;  // per bin, distinct coupon ids 1..s

  void validate() const {
    if (n_bins == 0 || s_coupons == 0 || cap == 0) throw ConfigError("coupon state: empty");
    if (placement.size() != n_bins) throw ConfigError("coupon state: bin count mismatch");
    std::vector<uint32_t> copies(s_coupons + 1, 0);
    for (const auto& bin : placement) {
      std::vector<uint8_t> seen(s_coupons + 1, 0);
      for (uint32_t id : bin) {
        if (id < 1 || id > s_coupons) throw ConfigError("coupon state: bad coupon id");
        if (seen[id]) throw ConfigError("coupon state: duplicate coupon in one bin");
        seen[id] = 1;
        ++copies[id];
      }
    }
    for (uint32_t id = 1; id <= s_coupons; ++id) {
      if (copies[id] == 0)
        throw DomainError("coupon " + std::to_string(id) +
                          " has no placement; the process would never end");
      if (copies[id] < ell)
        throw ConfigError("coupon " + std::to_string(id) + " has fewer than ell copies");
    }
  }
};

// Each coupon placed in exactly ell distinct random bins.
inline CouponState make_random_coupon_state(uint32_t n, uint32_t s, uint32_t ell, uint32_t cap,
                                            RngStream& rng) {
  if (ell > n) throw ConfigError("coupon state: ell > n");
  CouponState st;
  st.n_bins = n;
  st.s_coupons = s;
  st.ell = ell;
  st.cap = cap;
  st.placement.resize(n);
  std::vector<uint32_t> bins(n);
  for (uint32_t i = 0; i < n; ++i) bins[i] = i;
  for (uint32_t id = 1; id <= s; ++id)
    for (uint32_t b : rng.sample(bins, ell)) st.placement[b].push_back(id);
  return st;
}

// One run of the process: each step picks a uniform bin, opens it with
// probability 1/2, and collects min(cap, |bin|) coupons (a uniform subset if
// the bin is larger). Returns the number of steps until all s coupons have
// been collected at least once. Stop detection is simulator-side: the process
// is an analysis abstraction, not a distributed protocol.
inline uint64_t coupon_collection_run(const CouponState& state, RngStream& rng) {
  state.validate();
  std::vector<uint8_t> collected(state.s_coupons + 1, 0);
  uint32_t remaining = state.s_coupons;
  uint64_t steps = 0;
  while (remaining > 0) {
    ++steps;
    const auto& bin = state.placement[rng.uniform_int(state.n_bins)];
    if (!rng.bernoulli(0.5)) continue;
    if (bin.size() <= state.cap) {
      for (uint32_t id : bin)
        if (!collected[id]) {
          collected[id] = 1;
          --remaining;
        }
    } else {
      for (uint32_t id : rng.sample(bin, state.cap))
        if (!collected[id]) {
          collected[id] = 1;
          --remaining;
        }
    }
  }
  return steps;
}

// ---------------------------------------------------------------------------
// Shared multicast bookkeeping

struct MulticastPhaseRow {
  uint64_t phase = 0;        // outer phase index (Algorithm 1) / phase number (Algorithm 2)
  uint64_t ell_or_x = 0;     // ell_i, or x at the phase start
  Round rounds = 0;          // rounds consumed through the end of this row's phase
  uint32_t min_multiplicity = 0;  // min over messages of how many nodes know it
};

struct MulticastReport {
  bool completed = false;          // every node knows every message
  Round rounds_total = 0;
  uint64_t phases = 0;
  std::vector<MulticastPhaseRow> rows;
  std::string error;
  // Algorithm 2 only:
  uint64_t phases_exactly_one_marked = 0;
  uint64_t detection_unanimous_phases = 0;
  bool delivered_once_violated = false;
};

// Per-message spread counter over cumulative knowledge masks.
class KnowledgeLedger {
 public:
  KnowledgeLedger(uint32_t n, uint32_t s) : n_(n), s_(s), mask_(n + 1, 0), count_(s + 1, 0) {}

  // Returns the number of newly learned (node, message) pairs.
  uint32_t learn(NodeId v, const SfMessage& msg) {
    uint32_t events = 0;
    for (uint32_t id : msg.ids) {
      const KnowledgeMask bit = knowledge_bit(id);
      if (bit && !(mask_[v] & bit)) {
        mask_[v] |= bit;
        ++count_[id];
        ++events;
      }
    }
    return events;
  }

  void learn_initial(NodeId v, uint32_t id) {
    const KnowledgeMask bit = knowledge_bit(id);
    if (!(mask_[v] & bit)) {
      mask_[v] |= bit;
      ++count_[id];
    }
  }

  KnowledgeMask mask(NodeId v) const { return mask_[v]; }
  uint32_t holders(uint32_t id) const { return count_[id]; }

  uint32_t min_multiplicity() const {
    uint32_t m = n_;
    for (uint32_t id = 1; id <= s_; ++id) m = std::min(m, count_[id]);
    return m;
  }

  bool complete() const {
    const KnowledgeMask full = s_ == 64 ? ~KnowledgeMask{0} : (KnowledgeMask{1} << s_) - 1;
    for (NodeId v = 1; v <= n_; ++v)
      if (mask_[v] != full) return false;
    return true;
  }

 private:
  uint32_t n_, s_;
  std::vector<KnowledgeMask> mask_;
  std::vector<uint32_t> count_;
};

// ---------------------------------------------------------------------------
// Algorithm 1: coupon-collection-based generic multicast

template <typename Setting>
class CouponMulticast {
 public:
  using message_type = SfMessage;

  // source_of[i-1] = the source node of broadcast message i.
  CouponMulticast(const SimConfig& cfg, const Setting& setting,
                  const std::vector<NodeId>& source_of, double alpha = 24.0)
      : cfg_(cfg), setting_(setting), alpha_(alpha), ledger_(cfg.n, cfg.s) {
    require_mask_capacity(cfg.s);
    if (source_of.size() != cfg.s) throw ConfigError("algorithm1: need one source per message");
    for (uint32_t id = 1; id <= cfg.s; ++id) ledger_.learn_initial(source_of[id - 1], id);
    outer_phases_ = static_cast<uint32_t>(std::ceil(std::log2(static_cast<double>(cfg.n))));
    phase_ = 1;
    iter_ = 0;
    iters_in_phase_ = iterations_for_phase(1);
  }

  uint32_t outer_phases() const { return outer_phases_; }
  uint64_t iterations_for_phase(uint32_t i) const {
    const double ell = static_cast<double>(uint64_t{1} << i);
    return static_cast<uint64_t>(
        std::ceil(alpha_ * cfg_.n * cfg_.s * std::log(cfg_.n) / (cfg_.c * ell)));
  }

  // Bound on per-round learning events, enforced when set (Lemma 7 traces).
  void set_learning_cap(uint32_t cap) { learning_cap_ = cap; }

  const SfMessage* transmit(NodeId v, Round r, RngStream& rng) {
    if (done_) return nullptr;
    if (!session_) {
      session_.emplace(setting_.make_klimited(ell()));
      session_start_ = r;
    }
    const Round t = r - session_start_ + 1;
    if (t == 1 && rng.bernoulli(1.0 / cfg_.n)) {
      // Marked: pack a uniform c-subset of the known messages and initiate.
      const KnowledgeMask have = ledger_.mask(v);
      if (have) {
        session_->add_source(v, pack_subset(have, rng));
      }
    }
    return session_->transmit(v, t, rng);
  }

  void receive(NodeId v, Round r, const SfMessage& msg, NodeId from) {
    learning_this_round_ += ledger_.learn(v, msg);
    session_->receive(v, r - session_start_ + 1, msg, from);
  }

  void end_round(Round r) {
    if (learning_cap_ && learning_this_round_ > *learning_cap_)
      throw SimError("learning-event bound exceeded: " + std::to_string(learning_this_round_) +
                     " > " + std::to_string(*learning_cap_) + " in round " + std::to_string(r));
    learning_this_round_ = 0;
    if (!session_ || r - session_start_ + 1 < session_->length()) return;
    session_.reset();
    if (++iter_ >= iters_in_phase_) {
      report_.rows.push_back({phase_, ell(), r, ledger_.min_multiplicity()});
      iter_ = 0;
      if (++phase_ > outer_phases_) {
        done_ = true;
        finish(r);
      } else {
        iters_in_phase_ = iterations_for_phase(phase_);
      }
    }
  }

  bool done(Round) const { return done_; }

  const MulticastReport& report() const { return report_; }
  const KnowledgeLedger& knowledge() const { return ledger_; }

 private:
  uint64_t ell() const { return uint64_t{1} << phase_; }

  SfMessage pack_subset(KnowledgeMask have, RngStream& rng) {
    std::vector<uint32_t> ids;
    while (have) {
      ids.push_back(static_cast<uint32_t>(__builtin_ctzll(have)) + 1);
      have &= have - 1;
    }
    const size_t want = std::min<size_t>(ids.size(), cfg_.c);
    ids = rng.sample(std::move(ids), want);
    std::sort(ids.begin(), ids.end());
    return SfMessage{std::move(ids)};
  }

  void finish(Round r) {
    report_.completed = ledger_.complete();
    report_.rounds_total = r;
    report_.phases = outer_phases_;
  }

  SimConfig cfg_;
  Setting setting_;
  double alpha_;
  KnowledgeLedger ledger_;
  uint32_t outer_phases_ = 0;
  uint32_t phase_ = 1;
  uint64_t iter_ = 0;
  uint64_t iters_in_phase_ = 0;
  std::optional<typename Setting::Session> session_;
  Round session_start_ = 0;
  bool done_ = false;
  uint32_t learning_this_round_ = 0;
  std::optional<uint32_t> learning_cap_;
  MulticastReport report_;
};

// ---------------------------------------------------------------------------
// Algorithm 2: concurrency-resistant-based generic multicast (c = 1)

template <typename Setting>
class ResistantMulticast {
 public:
  using message_type = SfMessage;

  ResistantMulticast(const SimConfig& cfg, const Setting& setting,
                     const std::vector<NodeId>& source_of, double phase_cap_multiplier = 10.0)
      : cfg_(cfg),
        setting_(setting),
        ledger_(cfg.n, cfg.s),
        own_(cfg.n + 1, 0),
        delivered_(cfg.n + 1, 0) {
    require_mask_capacity(cfg.s);
    if (cfg.c != 1)
      throw ConfigError("algorithm2 uses single-message broadcasts; configure c = 1");
    if (source_of.size() != cfg.s) throw ConfigError("algorithm2: need one source per message");
    for (uint32_t id = 1; id <= cfg.s; ++id) {
      own_[source_of[id - 1]] |= knowledge_bit(id);
      ledger_.learn_initial(source_of[id - 1], id);
    }
    phase_cap_ = static_cast<uint64_t>(
        std::ceil(phase_cap_multiplier * (cfg.s + std::log2(static_cast<double>(cfg.n)))));
  }

  void set_learning_cap(uint32_t cap) { learning_cap_ = cap; }

  const SfMessage* transmit(NodeId v, Round r, RngStream& rng) {
    if (done_) return nullptr;
    if (!cr_) {
      cr_.emplace(setting_, std::vector<SourceInit>{});
      cr_start_ = r;
      phase_marks_ = 0;
      phase_x_ = node_x(1);
    }
    const Round t = r - cr_start_ + 1;
    if (t == 1) {
      const uint32_t x = node_x(v);
      KnowledgeMask pending = own_[v] & ~delivered_[v];
      if (x > 0 && pending) {
        std::vector<uint32_t> marked;
        while (pending) {
          const uint32_t id = static_cast<uint32_t>(__builtin_ctzll(pending)) + 1;
          pending &= pending - 1;
          if (rng.bernoulli(1.0 / x)) marked.push_back(id);
        }
        phase_marks_ += marked.size();
        if (!marked.empty()) {
          // The wrapped broadcast carries one message; a holder with several
          // marked messages races one of them, chosen uniformly.
          const uint32_t pick =
              marked.size() == 1
                  ? marked[0]
                  : marked[static_cast<size_t>(rng.uniform_int(marked.size()))];
          cr_->add_source(v, SfMessage::single(pick));
        }
      }
    }
    return cr_->transmit(v, t, rng);
  }

  void receive(NodeId v, Round r, const SfMessage& msg, NodeId from) {
    learning_this_round_ += ledger_.learn(v, msg);
    cr_->receive(v, r - cr_start_ + 1, msg, from);
  }

  void end_round(Round r) {
    if (learning_cap_ && learning_this_round_ > *learning_cap_)
      throw SimError("learning-event bound exceeded in round " + std::to_string(r));
    learning_this_round_ = 0;
    if (!cr_) return;
    const Round t = r - cr_start_ + 1;
    cr_->end_round(t);
    if (t < cr_->length()) return;

    const std::vector<uint8_t> det = cr_->detection();
    bool unanimous = true;
    for (NodeId v = 2; v <= cfg_.n; ++v)
      if (det[v] != det[1]) unanimous = false;
    for (NodeId v = 1; v <= cfg_.n; ++v) {
      if (!det[v]) continue;
      // SUCCESS at v: the unique message v knows from this run was delivered.
      const KnowledgeMask known = cr_->known()[v];
      if (delivered_[v] & known) report_.delivered_once_violated = true;
      delivered_[v] |= known;
    }
    ++report_.phases;
    if (phase_marks_ == 1) ++report_.phases_exactly_one_marked;
    if (unanimous) ++report_.detection_unanimous_phases;
    report_.rows.push_back({report_.phases, phase_x_, r, ledger_.min_multiplicity()});
    cr_.reset();

    bool all_done = true;
    for (NodeId v = 1; v <= cfg_.n; ++v)
      if (node_x(v) != 0) all_done = false;
    if (all_done) {
      done_ = true;
      report_.completed = ledger_.complete();
      report_.rounds_total = r;
    } else if (report_.phases >= phase_cap_) {
      done_ = true;
      report_.error = "livelock: phase cap " + std::to_string(phase_cap_) + " reached";
      report_.rounds_total = r;
    }
  }

  bool done(Round) const { return done_; }

  uint32_t node_x(NodeId v) const { return cfg_.s - mask_popcount(delivered_[v]); }

  const MulticastReport& report() const { return report_; }
  const KnowledgeLedger& knowledge() const { return ledger_; }

 private:
  SimConfig cfg_;
  Setting setting_;
  KnowledgeLedger ledger_;
  std::vector<KnowledgeMask> own_;        // messages this node sourced
  std::vector<KnowledgeMask> delivered_;  // per-node view of delivered messages
  std::optional<CrDriver<Setting>> cr_;
  Round cr_start_ = 0;
  uint64_t phase_marks_ = 0;
  uint64_t phase_x_ = 0;
  uint64_t phase_cap_ = 0;
  bool done_ = false;
  uint32_t learning_this_round_ = 0;
  std::optional<uint32_t> learning_cap_;
  MulticastReport report_;
};

}  // namespace dynbcast
