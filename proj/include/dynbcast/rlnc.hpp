// Random linear network coding broadcast.
//
// Messages are vectors over F_q. A packet is (mu, m) with m = sum_i mu_i * m_i.
// Source i starts with (e_i, m_i), everyone else with the zero packet. Each
// round every node draws a uniform element of its packet span and transmits
// it with probability 1/n; received packets are inserted into a row-reduced
// basis. A node decodes all s messages once its coefficient space has rank s.
//
// Note the paper's symbol collision: the packet span of a node and the phase
// length min(tau, T) both go by psi. Here the span is `SpanState`, and the
// connectivity parameter is `psi_conn` throughout.

#pragma once

#include <optional>
#include <vector>

#include "dynbcast/engine.hpp"
#include "dynbcast/field.hpp"

namespace dynbcast {

struct CodedPacket {
  std::vector<uint32_t> mu;  // coefficient vector, length s
  std::vector<uint32_t> m;   // payload vector, length l

  bool is_zero() const {
    for (uint32_t x : mu)
      if (x) return false;
    for (uint32_t x : m)
      if (x) return false;
    return true;
  }
};

inline const std::vector<uint32_t>& trace_ids(const CodedPacket&) {
  static const std::vector<uint32_t> kEmpty;
  return kEmpty;  // coded packets carry no broadcast-message indices
}

// Row-reduced span of received packets. Rows are kept in reduced row echelon
// form over the coefficient part, payload columns reduced in lockstep, so
// rank-s decoding is a read-off.
class SpanState {
 public:
  SpanState(Fq field, uint32_t s, uint32_t l) : field_(field), s_(s), l_(l) {}

  uint32_t rank() const { return static_cast<uint32_t>(rows_.size()); }
  uint32_t coeff_len() const { return s_; }
  uint32_t payload_len() const { return l_; }

  // Inserts a packet; returns true iff the rank grew.
  bool insert(CodedPacket pkt) {
    if (pkt.mu.size() != s_ || pkt.m.size() != l_)
      throw DomainError("span insert: packet dimensions mismatch");
    for (const Row& row : rows_) {
      const uint32_t k = pkt.mu[row.pivot];
      if (k) {
        subtract_scaled(pkt, row, k);
      }
    }
    uint32_t pivot = s_;
    for (uint32_t i = 0; i < s_; ++i)
      if (pkt.mu[i]) {
        pivot = i;
        break;
      }
    if (pivot == s_) return false;  // already in span
    const uint32_t scale = field_.inv(pkt.mu[pivot]);
    field_.scale(pkt.mu, scale);
    field_.scale(pkt.m, scale);
    Row fresh{pivot, std::move(pkt.mu), std::move(pkt.m)};
    // Eliminate the new pivot from existing rows to stay in RREF.
    for (Row& row : rows_) {
      const uint32_t k = row.mu[pivot];
      if (k) {
        CodedPacket tmp{std::move(row.mu), std::move(row.m)};
        subtract_scaled(tmp, fresh, k);
        row.mu = std::move(tmp.mu);
        row.m = std::move(tmp.m);
      }
    }
    auto pos = rows_.begin();
    while (pos != rows_.end() && pos->pivot < pivot) ++pos;
    rows_.insert(pos, std::move(fresh));
    return true;
  }

  // True iff mu is not orthogonal to the coefficient space chi(v); by
  // linearity it suffices to test the basis rows.
  bool knows_about(const std::vector<uint32_t>& mu) const {
    if (mu.size() != s_) throw DomainError("knows_about: vector length mismatch");
    for (const Row& row : rows_)
      if (field_.dot(row.mu, mu) != 0) return true;
    return false;
  }

  // Uniform element of the span: a uniform random combination of the basis
  // rows (the span has exactly q^rank elements, hit uniformly). Rank 0 yields
  // the zero packet.
  CodedPacket sample_uniform(RngStream& rng) const {
    CodedPacket out;
    out.mu.assign(s_, 0);
    out.m.assign(l_, 0);
    for (const Row& row : rows_) {
      const uint32_t k = static_cast<uint32_t>(rng.uniform_int(field_.modulus()));
      if (k) {
        field_.add_scaled(out.mu, row.mu, k);
        field_.add_scaled(out.m, row.m, k);
      }
    }
    return out;
  }

  // Back-substituted messages, or nothing while rank < s. With RREF rows the
  // row with pivot i is exactly (e_i, m_i).
  std::optional<std::vector<std::vector<uint32_t>>> decode() const {
    if (rank() != s_) return std::nullopt;
    std::vector<std::vector<uint32_t>> out(s_);
    for (const Row& row : rows_) out[row.pivot] = row.m;
    return out;
  }

  struct Row {
    uint32_t pivot;
    std::vector<uint32_t> mu;
    std::vector<uint32_t> m;
  };
  const std::vector<Row>& rows() const { return rows_; }

 private:
  void subtract_scaled(CodedPacket& pkt, const Row& row, uint32_t k) const {
    const uint32_t neg = field_.neg(k);
    field_.add_scaled(pkt.mu, row.mu, neg);
    field_.add_scaled(pkt.m, row.m, neg);
  }

  Fq field_;
  uint32_t s_, l_;
  std::vector<Row> rows_;
};

// ---------------------------------------------------------------------------
// The broadcast protocol

struct RlncParams {
  uint32_t q = 257;
  uint32_t payload_len = 0;     // 0 = use s
  double kappa2 = 4.0;          // budget constant in kappa2 * n * (n + s)
  bool check_invariants = false;  // verify span soundness on every transmission
  // Coefficient vectors whose knows-about spread is tracked (via indices:
  // 1..s = standard basis e_i, 0 = all-ones).
  std::vector<uint32_t> tracked;
};

struct RlncReport {
  bool completed = false;
  Round rounds_total = 0;
  std::vector<Round> decode_round;  // [1..n], 0 = never decoded
  // Rank trajectories: per node, (round, rank) at each rank increase.
  std::vector<std::vector<std::pair<Round, uint32_t>>> rank_steps;
  // knows-about spread: per tracked vector, rounds at which a new node
  // started knowing about it (n entries when it reached everyone).
  std::vector<std::vector<Round>> spread_rounds;
};

class RlncProtocol {
 public:
  using message_type = CodedPacket;

  RlncProtocol(const SimConfig& cfg, const std::vector<NodeId>& source_of,
               const std::vector<std::vector<uint32_t>>& messages, const RlncParams& params)
      : cfg_(cfg),
        field_(params.q),
        params_(params),
        l_(params.payload_len ? params.payload_len : cfg.s),
        truth_(messages) {
    if (source_of.size() != cfg.s) throw ConfigError("rlnc: need one source per message");
    if (messages.size() != cfg.s) throw ConfigError("rlnc: need one message vector per source");
    for (const auto& m : messages)
      if (m.size() != l_) throw ConfigError("rlnc: message length != payload_len");
    budget_ = static_cast<Round>(params.kappa2 * cfg.n * (static_cast<double>(cfg.n) + cfg.s));
    spans_.assign(cfg.n + 1, SpanState(field_, cfg.s, l_));
    out_.assign(cfg.n + 1, CodedPacket{});
    report_.decode_round.assign(cfg.n + 1, kInfinite);
    report_.rank_steps.assign(cfg.n + 1, {});
    report_.spread_rounds.assign(params.tracked.size(), {});
    known_tracked_.assign(params.tracked.size(), std::vector<uint8_t>(cfg.n + 1, 0));
    for (uint32_t id = 1; id <= cfg.s; ++id) {
      CodedPacket pkt;
      pkt.mu.assign(cfg.s, 0);
      pkt.mu[id - 1] = 1;
      pkt.m = messages[id - 1];
      spans_[source_of[id - 1]].insert(std::move(pkt));
      note_rank_change(source_of[id - 1], 0);
    }
  }

  Round budget() const { return budget_; }

  const CodedPacket* transmit(NodeId v, Round, RngStream& rng) {
    if (!rng.bernoulli(1.0 / cfg_.n)) return nullptr;
    out_[v] = spans_[v].sample_uniform(rng);
    if (params_.check_invariants) check_soundness(out_[v]);
    return &out_[v];
  }

  void receive(NodeId v, Round r, const CodedPacket& pkt, NodeId) {
    const uint32_t before = spans_[v].rank();
    if (spans_[v].insert(pkt)) {
      if (params_.check_invariants && spans_[v].rank() != before + 1)
        throw SimError("rlnc: rank changed by more than one insert");
      note_rank_change(v, r);
    }
  }

  void end_round(Round r) {
    if (!completed_ && all_decoded()) {
      completed_ = true;
      report_.completed = true;
      report_.rounds_total = r;
    }
  }

  bool done(Round r) const { return completed_ || r >= budget_; }

  const RlncReport& report() const { return report_; }
  const SpanState& span(NodeId v) const { return spans_[v]; }
  const std::vector<std::vector<uint32_t>>& ground_truth() const { return truth_; }

  std::optional<std::vector<std::vector<uint32_t>>> decode(NodeId v) const {
    return spans_[v].decode();
  }

 private:
  bool all_decoded() const {
    for (NodeId v = 1; v <= cfg_.n; ++v)
      if (spans_[v].rank() != cfg_.s) return false;
    return true;
  }

  void note_rank_change(NodeId v, Round r) {
    report_.rank_steps[v].emplace_back(r, spans_[v].rank());
    if (spans_[v].rank() == cfg_.s && report_.decode_round[v] == kInfinite) {
      report_.decode_round[v] = r;  // r = 0 when full rank at initialization
      if (params_.check_invariants) {
        auto decoded = spans_[v].decode();
        if (!decoded || *decoded != truth_)
          throw SimError("rlnc: decode does not match ground truth at node " + std::to_string(v));
      }
    }
    // knows-about is monotone per node; recheck tracked vectors on span growth.
    for (size_t i = 0; i < params_.tracked.size(); ++i) {
      if (known_tracked_[i][v]) continue;
      if (spans_[v].knows_about(tracked_vector(params_.tracked[i]))) {
        known_tracked_[i][v] = 1;
        report_.spread_rounds[i].push_back(r);
      }
    }
  }

  std::vector<uint32_t> tracked_vector(uint32_t idx) const {
    std::vector<uint32_t> mu(cfg_.s, 0);
    if (idx == 0) {
      mu.assign(cfg_.s, 1);
    } else {
      mu[idx - 1] = 1;
    }
    return mu;
  }

  void check_soundness(const CodedPacket& pkt) const {
    // m must equal sum_i mu_i * m_i against the ground truth, field-exact.
    std::vector<uint32_t> expect(l_, 0);
    for (uint32_t i = 0; i < cfg_.s; ++i)
      if (pkt.mu[i]) field_.add_scaled(expect, truth_[i], pkt.mu[i]);
    if (expect != pkt.m) throw SimError("rlnc: unsound packet (payload != mu . messages)");
  }

  SimConfig cfg_;
  Fq field_;
  RlncParams params_;
  uint32_t l_;
  std::vector<std::vector<uint32_t>> truth_;
  Round budget_ = 0;
  std::vector<SpanState> spans_;
  std::vector<CodedPacket> out_ = {};
  bool completed_ = false;
  RlncReport report_;
  std::vector<std::vector<uint8_t>> known_tracked_;
};

// One full run; messages default to seeded random vectors.
struct RlncOutcome {
  RlncReport report;
  Metrics metrics;
};

inline RlncOutcome rlnc_broadcast(const SimConfig& cfg, AdversaryPolicy& adv,
                                  const std::vector<NodeId>& source_of, RlncParams params = {},
                                  const EngineOptions& opts = {}) {
  RngStream msg_rng = RngStream::from_label(cfg.seed, "rlnc-messages");
  const uint32_t l = params.payload_len ? params.payload_len : cfg.s;
  std::vector<std::vector<uint32_t>> messages(cfg.s, std::vector<uint32_t>(l));
  for (auto& m : messages)
    for (auto& x : m) x = static_cast<uint32_t>(msg_rng.uniform_int(params.q));
  RlncProtocol proto(cfg, source_of, messages, params);
  SimConfig run_cfg = cfg;
  run_cfg.round_limit = std::min<Round>(cfg.round_limit, proto.budget());
  EngineResult er = run_simulation(run_cfg, proto, adv, opts);
  RlncOutcome out;
  out.report = proto.report();
  if (!out.report.completed) out.report.rounds_total = er.metrics.rounds_total;
  out.metrics = er.metrics;
  out.metrics.success = out.report.completed;
  if (!out.report.completed)
    out.metrics.error =
        er.metrics.rounds_total >= proto.budget() ? "budget-exhausted" : "round-limit";
  return out;
}

}  // namespace dynbcast
