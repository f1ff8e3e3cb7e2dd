// Store-and-forward protocol drivers for the three dynamic-network settings:
//
//   Setting I   infinity-interval connected, 0-oblivious  -> harmonic schedule
//   Setting II  1-interval connected, 1-oblivious         -> homogeneous schedule
//   Setting III T-interval connected, tau-oblivious       -> psi-phase schedule
//
// Each setting provides a k-limited procedure (informs >= min(k,n) nodes with
// probability >= 1/2) and a concurrency-resistant wrapper (unanimous success
// detection with exactly one source, unanimous failure detection with zero or
// several sources).

#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <vector>

#include "dynbcast/engine.hpp"
#include "dynbcast/sessions.hpp"

namespace dynbcast {

struct SfProtocolParams {
  double eps = 0.5;               // harmonic failure parameter (Setting I)
  double budget_multiplier = 4.0; // harmonic k-limited budget constant
  double kappa = 3.0;             // Setting II budget constant
  double kappa_prime = 8.0;       // Setting III budget constant
  uint32_t period_override = 0;   // harmonic period override for tests
};

// ---------------------------------------------------------------------------
// Setting bundles: session factories + budget arithmetic

struct HarmonicSetting {
  uint32_t n;
  uint32_t period;
  double budget_multiplier;
  static constexpr bool kHasPairing = false;
  using Session = HarmonicSession;

  HarmonicSetting(uint32_t n_, const SfProtocolParams& p = {})
      : n(n_),
        period(p.period_override ? p.period_override : harmonic_period(n_, p.eps)),
        budget_multiplier(p.budget_multiplier) {}

  Round klimited_length(uint32_t k) const {
    return harmonic_budget(k, n, period, budget_multiplier);
  }
  Session make_klimited(uint32_t k) const { return Session(n, period, klimited_length(k)); }
  Session make_full() const { return make_klimited(n); }
  Round pairing_length() const { return 0; }
};

struct HomogeneousSetting {
  uint32_t n;
  double kappa;
  static constexpr bool kHasPairing = true;
  using Session = HomogeneousSession;

  HomogeneousSetting(uint32_t n_, const SfProtocolParams& p = {}) : n(n_), kappa(p.kappa) {}

  double broadcast_prob() const { return std::log(static_cast<double>(n)) / n; }
  Round klimited_length(uint32_t k) const { return homogeneous_budget(k, n, kappa); }
  Session make_klimited(uint32_t k) const {
    return Session(n, broadcast_prob(), klimited_length(k));
  }
  Session make_full() const { return make_klimited(n); }
  Round pairing_length() const { return pairing_budget(n, kappa); }
};

struct PsiSetting {
  uint32_t n;
  uint64_t psi;  // min(tau, T); named psi_conn elsewhere to keep it apart from packet spans
  double kappa_prime;
  double kappa_pair;
  uint32_t period;
  static constexpr bool kHasPairing = true;
  using Session = PsiPhaseSession;

  PsiSetting(uint32_t n_, uint64_t tau, uint64_t T, const SfProtocolParams& p = {})
      : n(n_),
        psi(std::min(tau, T)),
        kappa_prime(p.kappa_prime),
        kappa_pair(p.kappa),
        period(p.period_override ? p.period_override : harmonic_period(n_, p.eps)) {
    if (psi < psi_band_lo(n) || psi > n)
      throw DispatchError(
          "psi=min(tau,T)=" + std::to_string(psi) + " outside the phase protocol band [" +
          std::to_string(psi_band_lo(n)) + "," + std::to_string(n) +
          "] for n=" + std::to_string(n) +
          "; dispatch to the homogeneous (small psi) or harmonic (T=inf) protocol instead");
  }

  Round klimited_length(uint32_t k) const {
    return psi * psi_phase_count(k, n, psi, kappa_prime);
  }
  Session make_klimited(uint32_t k) const {
    return Session(n, psi, psi_phase_count(k, n, psi, kappa_prime), period);
  }
  Session make_full() const { return make_klimited(n); }
  Round pairing_length() const { return pairing_budget(n, kappa_pair); }
};

enum class SettingKind { kHarmonic, kHomogeneous, kPsiPhase };

// Which single-message protocol family covers a (T, tau) environment.
inline SettingKind select_setting(uint32_t n, uint64_t T, uint64_t tau) {
  if (T == kInfinite) return SettingKind::kHarmonic;
  if (tau == 0)
    throw DispatchError(
        "no store-and-forward protocol handles a 0-oblivious adversary with finite T");
  const uint64_t psi = std::min(tau, T);
  if (psi > n) return SettingKind::kHarmonic;
  if (psi >= psi_band_lo(n)) return SettingKind::kPsiPhase;
  return SettingKind::kHomogeneous;
}

// ---------------------------------------------------------------------------
// k-limited runs

template <typename Setting>
class KLimitedDriver {
 public:
  using message_type = SfMessage;

  KLimitedDriver(const Setting& setting, const std::vector<SourceInit>& sources, uint32_t k)
      : session_(setting.make_klimited(k)) {
    session_.add_sources(sources);
  }

  const SfMessage* transmit(NodeId v, Round r, RngStream& rng) {
    return session_.transmit(v, r, rng);
  }
  void receive(NodeId v, Round r, const SfMessage& msg, NodeId from) {
    session_.receive(v, r, msg, from);
  }
  void end_round(Round) {}
  bool done(Round r) const { return r >= session_.length(); }

  const typename Setting::Session& session() const { return session_; }

 private:
  typename Setting::Session session_;
};

// ---------------------------------------------------------------------------
// Concurrency-resistant wrapper
//
// Stage 1: one full single-message run, all sources initiating.
// Stage 2 (Settings II/III only): witness pairing, so that two surviving
//          distinct messages meet in some node.
// Stage 3: one full run in which every node knowing >= 2 distinct messages
//          initiates the control message (bottom).
//
// A node detects SUCCESS iff it knows exactly one broadcast message and never
// heard the control message; the run "returns 1" iff all nodes detect
// SUCCESS. A run with zero initiators still consumes the full budget: nodes
// cannot know that nobody started.
template <typename Setting>
class CrDriver {
 public:
  using message_type = SfMessage;

  CrDriver(const Setting& setting, const std::vector<SourceInit>& sources)
      : setting_(setting),
        known_(setting.n + 1, 0),
        bot_seen_(setting.n + 1, 0),
        main_(setting.make_full()) {
    main_len_ = main_->length();
    pairing_len_ = Setting::kHasPairing ? setting.pairing_length() : 0;
    total_ = 2 * main_len_ + pairing_len_;
    for (const auto& s : sources) add_source(s.node, s.payload);
  }

  // Deferred sourcing: legal up to and including local round 1.
  void add_source(NodeId v, const SfMessage& payload) {
    main_->add_source(v, payload);
    for (uint32_t id : payload.ids) known_[v] |= knowledge_bit(id);
  }

  Round length() const { return total_; }

  const SfMessage* transmit(NodeId v, Round t, RngStream& rng) {
    if (t <= main_len_) return main_->transmit(v, t, rng);
    if (t <= main_len_ + pairing_len_) return pairing_->transmit(v, t - main_len_, rng);
    return final_->transmit(v, t - main_len_ - pairing_len_, rng);
  }

  void receive(NodeId v, Round t, const SfMessage& msg, NodeId from) {
    for (uint32_t id : msg.ids) {
      if (id == kControlMessage)
        bot_seen_[v] = 1;
      else
        known_[v] |= knowledge_bit(id);
    }
    if (t <= main_len_) {
      main_->receive(v, t, msg, from);
    } else if (t <= main_len_ + pairing_len_) {
      pairing_->receive(v, t - main_len_, msg, from);
    } else {
      final_->receive(v, t - main_len_ - pairing_len_, msg, from);
    }
  }

  void end_round(Round t) {
    if (t == main_len_) {
      if constexpr (Setting::kHasPairing) {
        pairing_.emplace(setting_.n, known_, pairing_len_);
      } else {
        start_final();
      }
    } else if (Setting::kHasPairing && t == main_len_ + pairing_len_) {
      start_final();
    }
  }

  bool done(Round t) const { return t >= total_; }

  // Per-node SUCCESS flags, valid once done.
  std::vector<uint8_t> detection() const {
    std::vector<uint8_t> det(setting_.n + 1, 0);
    for (NodeId v = 1; v <= setting_.n; ++v)
      det[v] = mask_popcount(known_[v]) == 1 && !bot_seen_[v];
    return det;
  }

  bool returned_one() const {
    for (NodeId v = 1; v <= setting_.n; ++v)
      if (mask_popcount(known_[v]) != 1 || bot_seen_[v]) return false;
    return true;
  }

  const std::vector<KnowledgeMask>& known() const { return known_; }

 private:
  void start_final() {
    final_.emplace(setting_.make_full());
    for (NodeId v = 1; v <= setting_.n; ++v)
      if (mask_popcount(known_[v]) >= 2) final_->add_source(v, SfMessage::control());
  }

  Setting setting_;
  std::vector<KnowledgeMask> known_;  // distinct broadcast messages heard or initiated this run
  std::vector<uint8_t> bot_seen_;
  std::optional<typename Setting::Session> main_;
  std::optional<PairingSession> pairing_;
  std::optional<typename Setting::Session> final_;
  Round main_len_ = 0, pairing_len_ = 0, total_ = 0;
};

// ---------------------------------------------------------------------------
// Standalone runs of the per-setting procedures

struct SingleBcastOutcome {
  uint32_t informed_count = 0;
  std::vector<uint8_t> informed;   // [1..n]; for CR runs: knows >= 1 broadcast message
  Round rounds_used = 0;
  std::vector<uint8_t> detection;  // [1..n]; CR runs only
  bool detection_unanimous = false;
  bool returned_one = false;
  Metrics metrics;
  std::vector<Round> isolation_log;
};

namespace detail {

template <typename Setting>
SingleBcastOutcome run_klimited(const SimConfig& cfg, AdversaryPolicy& adv, const Setting& setting,
                                const std::vector<SourceInit>& sources, uint32_t k,
                                EngineOptions opts) {
  if (k < 1) throw DomainError("k-limited broadcast: k must be >= 1");
  require_mask_capacity(cfg.s);
  KLimitedDriver<Setting> driver(setting, sources, k);
  EngineResult er = run_simulation(cfg, driver, adv, opts);
  SingleBcastOutcome out;
  out.rounds_used = er.metrics.rounds_total;
  out.informed = driver.session().informed_flags();
  out.informed_count = driver.session().informed_count();
  out.metrics = er.metrics;
  out.metrics.success = out.informed_count >= std::min<uint32_t>(k, cfg.n);
  out.isolation_log = std::move(er.isolation_log);
  return out;
}

template <typename Setting>
SingleBcastOutcome run_cr(const SimConfig& cfg, AdversaryPolicy& adv, const Setting& setting,
                          const std::vector<SourceInit>& sources, EngineOptions opts) {
  require_mask_capacity(cfg.s);
  CrDriver<Setting> driver(setting, sources);
  EngineResult er = run_simulation(cfg, driver, adv, opts);
  SingleBcastOutcome out;
  out.rounds_used = er.metrics.rounds_total;
  out.detection = driver.detection();
  out.returned_one = driver.returned_one();
  out.detection_unanimous = true;
  for (NodeId v = 2; v <= cfg.n; ++v)
    if (out.detection[v] != out.detection[1]) out.detection_unanimous = false;
  out.informed.assign(cfg.n + 1, 0);
  for (NodeId v = 1; v <= cfg.n; ++v) {
    out.informed[v] = driver.known()[v] != 0;
    if (out.informed[v]) ++out.informed_count;
  }
  out.metrics = er.metrics;
  out.metrics.success = out.returned_one;
  out.isolation_log = std::move(er.isolation_log);
  return out;
}

}  // namespace detail

// Setting I. Requires an infinity-interval environment for its contract; the
// protocol itself runs under any adversary.
inline SingleBcastOutcome harmonic_k_limited(const SimConfig& cfg, AdversaryPolicy& adv,
                                             const std::vector<SourceInit>& sources, uint32_t k,
                                             const SfProtocolParams& params = {},
                                             const EngineOptions& opts = {}) {
  return detail::run_klimited(cfg, adv, HarmonicSetting(cfg.n, params), sources, k, opts);
}

inline SingleBcastOutcome harmonic_concurrency_resistant(const SimConfig& cfg,
                                                         AdversaryPolicy& adv,
                                                         const std::vector<SourceInit>& sources,
                                                         const SfProtocolParams& params = {},
                                                         const EngineOptions& opts = {}) {
  return detail::run_cr(cfg, adv, HarmonicSetting(cfg.n, params), sources, opts);
}

// Setting II (1-interval environments, tau >= 1).
inline SingleBcastOutcome homogeneous_k_limited(const SimConfig& cfg, AdversaryPolicy& adv,
                                                const std::vector<SourceInit>& sources, uint32_t k,
                                                const SfProtocolParams& params = {},
                                                const EngineOptions& opts = {}) {
  return detail::run_klimited(cfg, adv, HomogeneousSetting(cfg.n, params), sources, k, opts);
}

inline SingleBcastOutcome homogeneous_concurrency_resistant(
    const SimConfig& cfg, AdversaryPolicy& adv, const std::vector<SourceInit>& sources,
    const SfProtocolParams& params = {}, const EngineOptions& opts = {}) {
  return detail::run_cr(cfg, adv, HomogeneousSetting(cfg.n, params), sources, opts);
}

// Setting III. Valid only inside the psi band; outside it the dispatcher
// selects Setting I or II (see select_setting).
inline SingleBcastOutcome psi_phase_k_limited(const SimConfig& cfg, AdversaryPolicy& adv,
                                              const std::vector<SourceInit>& sources, uint32_t k,
                                              uint64_t T, uint64_t tau,
                                              const SfProtocolParams& params = {},
                                              const EngineOptions& opts = {}) {
  return detail::run_klimited(cfg, adv, PsiSetting(cfg.n, tau, T, params), sources, k, opts);
}

inline SingleBcastOutcome psi_phase_concurrency_resistant(
    const SimConfig& cfg, AdversaryPolicy& adv, const std::vector<SourceInit>& sources, uint64_t T,
    uint64_t tau, const SfProtocolParams& params = {}, const EngineOptions& opts = {}) {
  return detail::run_cr(cfg, adv, PsiSetting(cfg.n, tau, T, params), sources, opts);
}

}  // namespace dynbcast
