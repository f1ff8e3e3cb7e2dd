// The round-synchronous execution engine.
//
// One run wires a protocol (per-node transmit/receive behavior), an adversary
// (per-round graph choice under its tau restriction) and a config into a
// strictly sequential round loop:
//
//   1. every node decides to transmit or listen (draws are ledgered),
//   2. the adversary picks G_r through a tau-filtered history view,
//   3. the reception rule resolves who hears what,
//   4. arrivals are delivered to the protocol and the round is recorded.
//
// A run is a pure function of (SimConfig, protocol, adversary): re-running
// with the same inputs reproduces the identical history. Runs share no
// mutable state, so independent trials can execute in parallel.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynbcast/adversary.hpp"
#include "dynbcast/core.hpp"

namespace dynbcast {

struct Metrics {
  Round rounds_total = 0;
  uint64_t transmissions = 0;
  uint64_t isolation_rounds = 0;  // rounds with exactly one transmitter
  uint64_t collision_rounds = 0;  // rounds where some listener heard a collision
  uint64_t receptions = 0;
  bool success = false;
  uint64_t phases = 0;
  std::string error;
};

// Optional per-event observer (receive-history hashing, tracing tests).
class EngineObserver {
 public:
  virtual ~EngineObserver() = default;
  virtual void on_receive(Round, NodeId /*to*/, NodeId /*from*/,
                          const std::vector<uint32_t>& /*ids*/) {}
  virtual void on_round_end(Round) {}
};

struct EngineOptions {
  bool record_trace = false;    // retain every HistoryRecord
  bool record_tx_ids = false;   // record per-transmitter broadcast ids (tau=0 content adversaries)
  bool record_isolation_log = false;
  size_t history_window = 16;
  EngineObserver* observer = nullptr;
};

struct EngineResult {
  Metrics metrics;
  std::vector<HistoryRecord> trace;     // only if record_trace
  std::vector<Round> isolation_log;     // only if record_isolation_log
};

// Protocol concept:
//   using message_type = ...;
//   const message_type* transmit(NodeId v, Round r, RngStream& rng);
//   void receive(NodeId v, Round r, const message_type& msg, NodeId from);
//   void end_round(Round r);
//   bool done(Round r) const;
template <typename Protocol>
EngineResult run_simulation(const SimConfig& cfg, Protocol& proto, AdversaryPolicy& adversary,
                            const EngineOptions& opts = {}) {
  using Msg = typename Protocol::message_type;
  cfg.validate();

  EngineResult result;
  Metrics& metrics = result.metrics;

  std::vector<RngStream> node_rng;
  node_rng.reserve(cfg.n);
  for (uint32_t v = 1; v <= cfg.n; ++v)
    node_rng.push_back(RngStream::from_label(cfg.seed, "node:" + std::to_string(v)));

  DynamicHistory history(cfg.n, opts.record_trace, opts.history_window);
  const bool keep_tx_ids = opts.record_tx_ids || opts.record_trace;
  history.set_tx_ids_recorded(keep_tx_ids);
  IntervalAuditor auditor(cfg.n, adversary.T_promise());

  std::vector<const Msg*> intents(cfg.n, nullptr);
  std::vector<Arrival<Msg>> arrivals;
  DrawLedger ledger;

  for (Round r = 1; r <= cfg.round_limit; ++r) {
    HistoryRecord& rec = history.begin_round(r);
    ledger.entries = &rec.draws;

    for (uint32_t i = 0; i < cfg.n; ++i) {
      ledger.node = i + 1;
      node_rng[i].set_ledger(&ledger);
      intents[i] = proto.transmit(i + 1, r, node_rng[i]);
      node_rng[i].set_ledger(nullptr);
      if (intents[i]) {
        rec.transmitters.push_back(i + 1);
        const auto& ids = trace_ids(*intents[i]);
        uint32_t payload = 0;
        for (uint32_t id : ids)
          if (id != 0) ++payload;
        if (payload > cfg.c)
          throw CapacityError("message with " + std::to_string(payload) +
                              " broadcast messages exceeds capacity c=" + std::to_string(cfg.c));
        if (keep_tx_ids) rec.tx_ids.push_back(ids);
      }
    }

    HistoryView view(history, r, adversary.tau());
    const RoundGraph& graph = adversary.next_graph(view, r);
    if (graph.node_count() != cfg.n)
      throw ConfigError("adversary produced a graph on " + std::to_string(graph.node_count()) +
                        " nodes, expected " + std::to_string(cfg.n));
    auditor.feed(graph, r);

    RoundStats stats;
    resolve_round(graph, intents, arrivals, &stats);

    metrics.transmissions += stats.transmitter_count;
    metrics.receptions += stats.receptions;
    if (stats.transmitter_count == 1) {
      ++metrics.isolation_rounds;
      if (opts.record_isolation_log) result.isolation_log.push_back(r);
    }
    if (stats.collision) ++metrics.collision_rounds;

    for (uint32_t i = 0; i < cfg.n; ++i) {
      if (!arrivals[i].msg) continue;
      rec.recv_from[i] = arrivals[i].from;
      proto.receive(i + 1, r, *arrivals[i].msg, arrivals[i].from);
      if (opts.observer)
        opts.observer->on_receive(r, i + 1, arrivals[i].from, trace_ids(*arrivals[i].msg));
    }
    rec.graph = graph;
    rec.complete = true;
    if (opts.observer) opts.observer->on_round_end(r);

    proto.end_round(r);
    metrics.rounds_total = r;
    if (proto.done(r)) break;
  }

  auditor.finish();
  if (!proto.done(metrics.rounds_total)) metrics.error = "round-limit";
  if (opts.record_trace) result.trace = history.take_all();
  return result;
}

}  // namespace dynbcast
