// Single-message broadcast building blocks.
//
// A session is one bounded run of a single-message protocol with a local
// round clock t = 1..length. Sessions only implement relay behavior: a node
// wakes on the first packet it hears (or when registered as a source, wake
// round 0) and from then on retransmits that packet under the session's
// schedule. Knowledge accounting, success detection and composition live in
// the drivers (protocols.hpp, multicast.hpp).
//
// Uninformed nodes never transmit and never consume randomness.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dynbcast/core.hpp"
#include "dynbcast/message.hpp"

namespace dynbcast {

// ---------------------------------------------------------------------------
// Budget formulas

// Harmonic period: ceil(12 ln(n/eps)).
inline uint32_t harmonic_period(uint32_t n, double eps) {
  if (eps <= 0.0 || eps >= 1.0) throw DomainError("harmonic period: eps must be in (0,1)");
  return static_cast<uint32_t>(std::ceil(12.0 * std::log(static_cast<double>(n) / eps)));
}

// k-limited harmonic run length: ceil(4 k T (ln n + 1)).
inline Round harmonic_budget(uint32_t k, uint32_t n, uint32_t period, double multiplier = 4.0) {
  return static_cast<Round>(
      std::ceil(multiplier * k * static_cast<double>(period) * (std::log(n) + 1.0)));
}

// k-limited homogeneous run length: ceil(kappa k n / ln n).
inline Round homogeneous_budget(uint32_t k, uint32_t n, double kappa) {
  return static_cast<Round>(std::ceil(kappa * k * static_cast<double>(n) / std::log(n)));
}

// Witness-pairing run length: ceil(kappa n ln n).
inline Round pairing_budget(uint32_t n, double kappa) {
  return static_cast<Round>(std::ceil(kappa * n * std::log(n)));
}

inline double log2d(uint32_t n) { return std::log2(static_cast<double>(n)); }

// The phase-based protocol is configured for ceil(log2(n)^2) <= psi <= n.
inline uint64_t psi_band_lo(uint32_t n) {
  return static_cast<uint64_t>(std::ceil(log2d(n) * log2d(n)));
}

// Number of psi-length phases. For k <= n/2 a successful phase informs
// Omega(psi/log^2 n) nodes; the full run (k > n/2) pays one extra log factor
// for the shrinking uninformed set.
inline uint64_t psi_phase_count(uint32_t k, uint32_t n, uint64_t psi, double kappa_prime) {
  const double l2 = log2d(n);
  const double denom = static_cast<double>(psi) * static_cast<double>(psi);
  if (k <= n / 2)
    return static_cast<uint64_t>(std::ceil(kappa_prime * k * n * l2 * l2 / denom));
  return static_cast<uint64_t>(
      std::ceil(kappa_prime * static_cast<double>(n) * n * l2 * l2 * l2 / denom));
}

// ---------------------------------------------------------------------------
// Session state shared by all schedules

struct SourceInit {
  NodeId node = 0;
  SfMessage payload;
};

class SfSessionBase {
 public:
  explicit SfSessionBase(uint32_t n) : n_(n), wake_(n + 1, -1), payload_(n + 1) {}

  // Registering a source is allowed up to and including local round 1.
  void add_source(NodeId v, SfMessage payload) {
    wake_[v] = 0;
    payload_[v] = std::move(payload);
  }

  void add_sources(const std::vector<SourceInit>& sources) {
    for (const auto& s : sources) add_source(s.node, s.payload);
  }

  // First packet heard wakes the node; later packets do not change the relay.
  void receive(NodeId v, Round t, const SfMessage& msg, NodeId) {
    if (wake_[v] < 0) {
      wake_[v] = static_cast<int64_t>(t);
      payload_[v] = msg;
    }
  }

  bool informed(NodeId v) const { return wake_[v] >= 0; }
  int64_t wake_round(NodeId v) const { return wake_[v]; }
  const SfMessage& payload(NodeId v) const { return payload_[v]; }

  uint32_t informed_count() const {
    uint32_t k = 0;
    for (NodeId v = 1; v <= n_; ++v)
      if (wake_[v] >= 0) ++k;
    return k;
  }

  std::vector<uint8_t> informed_flags() const {
    std::vector<uint8_t> out(n_ + 1, 0);
    for (NodeId v = 1; v <= n_; ++v) out[v] = wake_[v] >= 0;
    return out;
  }

 protected:
  uint32_t n_;
  std::vector<int64_t> wake_;
  std::vector<SfMessage> payload_;
};

// ---------------------------------------------------------------------------
// Setting I: harmonic schedule. A node that woke in round w transmits in any
// round t > w with probability 1/(1 + floor((t-w-1)/period)): probability 1
// for the first `period` rounds after waking, then 1/2, 1/3, ...
class HarmonicSession : public SfSessionBase {
 public:
  HarmonicSession(uint32_t n, uint32_t period, Round length)
      : SfSessionBase(n), period_(period), length_(length), age_(n + 1, 0), bump_(n + 1, 0) {}

  Round length() const { return length_; }
  uint32_t period() const { return period_; }

  double transmit_probability(NodeId v, Round t) const {
    const int64_t w = wake_[v];
    if (w < 0 || static_cast<int64_t>(t) <= w) return 0.0;
    const uint64_t age = (t - static_cast<uint64_t>(w) - 1) / period_;
    return 1.0 / static_cast<double>(1 + age);
  }

  const SfMessage* transmit(NodeId v, Round t, RngStream& rng) {
    const int64_t w = wake_[v];
    if (w < 0) return nullptr;
    // transmit() is called every round, so the harmonic age advances one step
    // at a time; track it incrementally instead of dividing. bump_ == 0 marks
    // a clock not yet started for the current wake round.
    if (bump_[v] == 0) {
      age_[v] = 0;
      bump_[v] = static_cast<Round>(w) + period_ + 1;
    }
    uint64_t age = age_[v];
    if (t >= bump_[v]) {
      age = ++age_[v];
      bump_[v] += period_;
    }
    if (age == 0) return &payload_[v];  // probability 1, no draw consumed
    return rng.bernoulli(1.0 / static_cast<double>(1 + age)) ? &payload_[v] : nullptr;
  }

 private:
  uint32_t period_;
  Round length_;
  std::vector<uint64_t> age_;
  std::vector<Round> bump_;
};

// ---------------------------------------------------------------------------
// Setting II: homogeneous schedule. Every informed node transmits its wake
// message with the same fixed probability each round (ln(n)/n for the
// broadcast runs). Sources transmit with that probability from round 1; there
// is no probability-1 first round.
class HomogeneousSession : public SfSessionBase {
 public:
  HomogeneousSession(uint32_t n, double prob, Round length)
      : SfSessionBase(n), prob_(prob), length_(length) {}

  Round length() const { return length_; }

  double transmit_probability(NodeId v, Round t) const {
    const int64_t w = wake_[v];
    return (w >= 0 && static_cast<int64_t>(t) > w) ? prob_ : 0.0;
  }

  const SfMessage* transmit(NodeId v, Round, RngStream& rng) {
    if (wake_[v] < 0) return nullptr;
    return rng.bernoulli(prob_) ? &payload_[v] : nullptr;
  }

 private:
  double prob_;
  Round length_;
};

// ---------------------------------------------------------------------------
// Witness-pairing stage used by the Setting II and III wrappers: each node
// that knows exactly one broadcast message transmits it with probability 1/n;
// everyone else is silent. Two adjacent nodes holding different messages turn
// one of them into a multi-message witness.
class PairingSession {
 public:
  PairingSession(uint32_t n, std::vector<KnowledgeMask> known, Round length)
      : n_(n), known_(std::move(known)), msg_(n + 1), length_(length) {
    for (NodeId v = 1; v <= n_; ++v) refresh(v);
  }

  Round length() const { return length_; }

  double transmit_probability(NodeId v, Round) const {
    return mask_popcount(known_[v]) == 1 ? 1.0 / n_ : 0.0;
  }

  const SfMessage* transmit(NodeId v, Round, RngStream& rng) {
    if (mask_popcount(known_[v]) != 1) return nullptr;
    return rng.bernoulli(1.0 / n_) ? &msg_[v] : nullptr;
  }

  void receive(NodeId v, Round, const SfMessage& msg, NodeId) {
    for (uint32_t id : msg.ids) known_[v] |= knowledge_bit(id);
    refresh(v);
  }

  const std::vector<KnowledgeMask>& known() const { return known_; }

 private:
  void refresh(NodeId v) {
    if (mask_popcount(known_[v]) == 1)
      msg_[v] = SfMessage::single(static_cast<uint32_t>(__builtin_ctzll(known_[v])) + 1);
  }

  uint32_t n_;
  std::vector<KnowledgeMask> known_;  // indexed by node, [0] unused
  std::vector<SfMessage> msg_;
  Round length_;
};

// ---------------------------------------------------------------------------
// Setting III: phases of length psi = min(tau, T). In the first half of each
// phase every informed node transmits its wake message with probability 1/n.
// In the second half only nodes first informed during the current phase
// participate, on a harmonic schedule whose wake round is clamped to the
// phase midpoint. This per-phase behavior is a reconstruction (see README).
class PsiPhaseSession : public SfSessionBase {
 public:
  PsiPhaseSession(uint32_t n, uint64_t psi, uint64_t phase_count, uint32_t period)
      : SfSessionBase(n),
        psi_(psi),
        half_(static_cast<uint64_t>((psi + 1) / 2)),
        phase_count_(phase_count),
        period_(period) {}

  Round length() const { return psi_ * phase_count_; }
  uint64_t psi_conn() const { return psi_; }
  uint64_t phase_count() const { return phase_count_; }

  double transmit_probability(NodeId v, Round t) const {
    const int64_t w = wake_[v];
    if (w < 0 || static_cast<int64_t>(t) <= w) return 0.0;
    const uint64_t pos = (t - 1) % psi_ + 1;
    if (pos <= half_) return 1.0 / n_;
    const uint64_t phase_start = t - pos;  // round before the phase's first round
    if (static_cast<uint64_t>(w) <= phase_start) return 0.0;  // previously informed
    const uint64_t clamped = std::max(phase_start + half_, static_cast<uint64_t>(w));
    if (t <= clamped) return 0.0;
    return 1.0 / static_cast<double>(1 + (t - clamped - 1) / period_);
  }

  const SfMessage* transmit(NodeId v, Round t, RngStream& rng) {
    const double p = transmit_probability(v, t);
    if (p <= 0.0) return nullptr;
    if (p >= 1.0) return &payload_[v];
    return rng.bernoulli(p) ? &payload_[v] : nullptr;
  }

 private:
  uint64_t psi_;
  uint64_t half_;
  uint64_t phase_count_;
  uint32_t period_;
};

}  // namespace dynbcast
