// The (alpha, beta)-hitting game, the s-clique-star target network, and the
// reduction that wins the game by simulating a multi-message broadcast
// algorithm.
//
// Referee: partitions [alpha+beta] into A and B (visible), draws beta
// distinct elements of A uniformly at random into a random order a_1..a_beta,
// and keeps R = {(a_i, i)} secret. Each round the player may guess one pair;
// hits are removed; the player wins when R is empty.
//
// Player: simulates the algorithm on the target network round by round. With
// more than one transmitter everyone hears collision-silence. With a sole
// transmitter carrying broadcast message i, the player guesses (transmitter,
// i) unless the pair is already known from an earlier hit; on a hit everyone
// receives, on a miss everyone but external e_i receives. The hit memory is
// what keeps the simulation consistent with the real target network, where
// the bridge adjacency is structural and does not disappear after a hit.

#pragma once

#include <algorithm>
#include <memory>
#include <tuple>
#include <vector>

#include "dynbcast/adversary.hpp"
#include "dynbcast/engine.hpp"
#include "dynbcast/message.hpp"

namespace dynbcast {

struct GameProtocolError : SimError {
  using SimError::SimError;
};

enum class Verdict { kMiss, kHit, kWon };

class HittingGameInstance {
 public:
  // The arbitrary partition defaults to B = {1..beta} (externals get the low
  // IDs); any disjoint partition of [alpha+beta] works.
  HittingGameInstance(uint32_t alpha, uint32_t beta, RngStream rng, bool externals_low = true)
      : alpha_(alpha), beta_(beta) {
    if (beta < 1 || beta >= alpha)
      throw DomainError("hitting game: need 1 <= beta < alpha");
    for (uint32_t x = 1; x <= alpha + beta; ++x) {
      const bool in_b = externals_low ? x <= beta : x > alpha;
      (in_b ? b_ : a_).push_back(x);
    }
    targets_ = rng.sample(a_, beta);  // uniform distinct, uniformly ordered
    remaining_.assign(beta, 1);
    left_ = beta;
  }

  uint32_t alpha() const { return alpha_; }
  uint32_t beta() const { return beta_; }
  const std::vector<uint32_t>& set_a() const { return a_; }
  const std::vector<uint32_t>& set_b() const { return b_; }

  bool won() const { return left_ == 0; }
  uint64_t guesses_made() const { return guess_log_.size(); }
  const std::vector<std::tuple<uint32_t, uint32_t, Verdict>>& guess_log() const {
    return guess_log_;
  }

  Verdict guess(uint32_t x, uint32_t y) {
    if (won()) throw GameProtocolError("hitting game: guess after the game was won");
    Verdict v = Verdict::kMiss;
    if (y >= 1 && y <= beta_ && remaining_[y - 1] && targets_[y - 1] == x) {
      remaining_[y - 1] = 0;
      --left_;
      v = left_ == 0 ? Verdict::kWon : Verdict::kHit;
    }
    guess_log_.emplace_back(x, y, v);
    return v;
  }

  // Replay gate: exposes a_1..a_beta so tests and the ground-truth replay can
  // instantiate the real target network. Player code must never call this;
  // the access counter backs the secrecy audit.
  const std::vector<uint32_t>& reveal_targets_for_replay() const {
    ++reveal_count_;
    return targets_;
  }
  uint64_t reveal_count() const { return reveal_count_; }

 private:
  uint32_t alpha_, beta_;
  std::vector<uint32_t> a_, b_;
  std::vector<uint32_t> targets_;  // targets_[i-1] = a_i
  std::vector<uint8_t> remaining_;
  uint32_t left_ = 0;
  std::vector<std::tuple<uint32_t, uint32_t, Verdict>> guess_log_;
  mutable uint64_t reveal_count_ = 0;
};

inline HittingGameInstance referee_new(uint32_t alpha, uint32_t beta, uint64_t seed) {
  return HittingGameInstance(alpha, beta, RngStream::from_label(seed, "referee"));
}

// ---------------------------------------------------------------------------
// s-clique-star target network

struct CliqueStar {
  uint32_t n = 0, s = 0;
  std::vector<NodeId> externals;  // externals[i-1] = e_i (IDs from B)
  std::vector<NodeId> bridge_of;  // bridge_of[i-1] = a_i; empty in the player's lazy skeleton
  std::vector<NodeId> source_of;  // source_of[i-1] = clique node initially holding message i
  uint32_t bridge_count = 0;      // j = number of distinct bridge IDs

  // The static s-clique-star graph; requires bridge_of.
  RoundGraph skeleton() const {
    RoundGraph g(n);
    std::vector<uint8_t> external(n + 1, 0);
    for (NodeId e : externals) external[e] = 1;
    for (NodeId u = 1; u <= n; ++u) {
      if (external[u]) continue;
      for (NodeId v = u + 1; v <= n; ++v)
        if (!external[v]) g.add_edge(u, v);
    }
    for (uint32_t i = 0; i < s; ++i) g.add_edge(externals[i], bridge_of[i]);
    return g;
  }
};

namespace detail {

inline CliqueStar clique_star_common(const HittingGameInstance& game, uint32_t n, uint32_t s,
                                     uint64_t seed) {
  if (game.alpha() != n - s || game.beta() != s)
    throw ConfigError("target network: need alpha = n-s and beta = s");
  CliqueStar star;
  star.n = n;
  star.s = s;
  star.externals = game.set_b();
  std::sort(star.externals.begin(), star.externals.end());
  // Broadcast messages land on uniformly random distinct clique processes.
  RngStream build = RngStream::from_label(seed, "target-build");
  star.source_of = build.sample(game.set_a(), s);
  return star;
}

}  // namespace detail

// Player-side construction: externals and message placement only. Bridge
// identities are never read; they surface one by one through referee verdicts.
inline CliqueStar make_clique_star_skeleton(const HittingGameInstance& game, uint32_t n,
                                            uint32_t s, uint64_t seed) {
  return detail::clique_star_common(game, n, s, seed);
}

// Adversary of the fully instantiated target network (Lemma 9's three-case
// rule): (1) more than one transmitter -> complete graph; (2) the sole
// transmitter carries message i and is e_i's bridge -> complete graph;
// (3) otherwise a sole transmitter carrying message i -> complete graph minus
// the edge {transmitter, e_i}. A sole transmitter with control-only content
// yields a complete graph and no missing edge.
class TargetNetworkAdversary final : public AdversaryPolicy {
 public:
  explicit TargetNetworkAdversary(CliqueStar star)
      : AdversaryPolicy("target-network", 0, kInfinite),
        star_(std::move(star)),
        complete_(RoundGraph::complete(star_.n)),
        current_(star_.n) {
    if (star_.bridge_of.size() != star_.s)
      throw ConfigError("target-network adversary needs the instantiated bridge map");
  }

  const CliqueStar& star() const { return star_; }

  const RoundGraph& next_graph(const HistoryView& history, Round r) override {
    const auto& tx = history.transmitters(r);
    if (tx.size() != 1) return complete_;
    const auto& ids = history.transmitted_ids(r)[0];
    uint32_t msg = 0;
    uint32_t payload = 0;
    for (uint32_t id : ids)
      if (id != kControlMessage) {
        msg = id;
        ++payload;
      }
    if (payload == 0) return complete_;
    if (payload > 1)
      throw ConfigError("target-network adversary is defined for capacity 1 payloads");
    if (star_.bridge_of[msg - 1] == tx[0]) return complete_;
    current_ = complete_;
    current_.remove_edge(tx[0], star_.externals[msg - 1]);
    return current_;
  }

 private:
  CliqueStar star_;
  RoundGraph complete_;
  RoundGraph current_;
};

// Full instantiation from the referee's secret; used by the ground-truth
// replay and by tests, not by the player.
inline std::pair<CliqueStar, std::unique_ptr<AdversaryPolicy>> build_target_network(
    const HittingGameInstance& game, uint32_t n, uint32_t s, uint64_t seed) {
  CliqueStar star = detail::clique_star_common(game, n, s, seed);
  star.bridge_of = game.reveal_targets_for_replay();
  std::vector<NodeId> distinct = star.bridge_of;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  star.bridge_count = static_cast<uint32_t>(distinct.size());
  auto adv = std::make_unique<TargetNetworkAdversary>(star);
  return {std::move(star), std::move(adv)};
}

// ---------------------------------------------------------------------------
// Receive-history fingerprints (used to compare the player's simulation with
// the ground-truth execution without storing full traces)

class ReceiveHasher : public EngineObserver {
 public:
  explicit ReceiveHasher(uint32_t n) : hash_(n + 1, kOffset), count_(n + 1, 0) {}

  void on_receive(Round r, NodeId to, NodeId from, const std::vector<uint32_t>& ids) override {
    uint64_t h = hash_[to];
    h = step(h, r);
    h = step(h, from);
    for (uint32_t id : ids) h = step(h, id + 1);
    hash_[to] = h;
    ++count_[to];
  }

  const std::vector<uint64_t>& hashes() const { return hash_; }
  const std::vector<uint64_t>& counts() const { return count_; }

 private:
  static constexpr uint64_t kOffset = 0xCBF29CE484222325ULL;
  static uint64_t step(uint64_t h, uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xFF;
      h *= 0x100000001B3ULL;
    }
    return h;
  }

  std::vector<uint64_t> hash_;
  std::vector<uint64_t> count_;
};

// ---------------------------------------------------------------------------
// The reduction player

struct GameTranscript {
  bool won = false;
  Round rounds = 0;
  uint64_t guesses = 0;
  Metrics metrics;
  std::vector<uint64_t> receive_hash;   // per node, receive-history fingerprint
  std::vector<uint64_t> receive_count;  // per node
  std::string error;
};

// Simulates `proto` (a store-and-forward multicast driver, capacity 1) on the
// target network defined by `skeleton`, playing `game` as it goes. Bridge
// identities are only ever consulted through referee verdicts. Stops when the
// game is won, the protocol finishes (reported as a correctness violation of
// the wrapped algorithm), or the round limit runs out.
template <typename Protocol>
GameTranscript play_hitting_game(const SimConfig& cfg, Protocol& proto, HittingGameInstance& game,
                                 const CliqueStar& skeleton) {
  using Msg = typename Protocol::message_type;
  cfg.validate();
  if (cfg.c != 1)
    throw ConfigError("the hitting-game player is defined for communication capacity c = 1");
  const uint32_t n = cfg.n;

  std::vector<RngStream> node_rng;
  node_rng.reserve(n);
  for (NodeId v = 1; v <= n; ++v)
    node_rng.push_back(RngStream::from_label(cfg.seed, "node:" + std::to_string(v)));

  std::vector<uint8_t> is_external(n + 1, 0);
  for (NodeId e : skeleton.externals) is_external[e] = 1;
  std::vector<uint8_t> hit_known(cfg.s + 1, 0);  // pairs already revealed as bridges
  std::vector<NodeId> known_bridge(cfg.s + 1, 0);

  GameTranscript out;
  out.receive_hash.assign(n + 1, 0);
  ReceiveHasher hasher(n);
  std::vector<const Msg*> intents(n, nullptr);

  for (Round r = 1; r <= cfg.round_limit; ++r) {
    uint32_t tx_count = 0;
    NodeId tx_node = 0;
    for (uint32_t i = 0; i < n; ++i) {
      intents[i] = proto.transmit(i + 1, r, node_rng[i]);
      if (intents[i]) {
        ++tx_count;
        tx_node = i + 1;
      }
    }
    out.metrics.transmissions += tx_count;
    if (tx_count == 1) ++out.metrics.isolation_rounds;
    if (tx_count >= 2 && tx_count < n) ++out.metrics.collision_rounds;

    NodeId excluded = 0;  // external that misses this round's delivery
    bool deliver = false;
    if (tx_count == 1) {
      deliver = true;
      const Msg& msg = *intents[tx_node - 1];
      const auto& ids = trace_ids(msg);
      uint32_t payload_id = 0, payload = 0;
      for (uint32_t id : ids)
        if (id != kControlMessage) {
          payload_id = id;
          ++payload;
        }
      if (payload > 1) throw ConfigError("hitting-game player saw a multi-message packet");
      if (payload == 1) {
        const uint32_t i = payload_id;
        if (is_external[tx_node]) {
          excluded = skeleton.externals[i - 1];  // rule (ii): no guess
        } else if (hit_known[i]) {
          // Bridge of e_i already revealed by an earlier hit: cases (2)/(3)
          // are decided structurally, no guess needed or useful.
          excluded = known_bridge[i] == tx_node ? 0 : skeleton.externals[i - 1];
        } else {
          const Verdict v = game.guess(tx_node, i);
          ++out.guesses;
          if (v == Verdict::kHit || v == Verdict::kWon) {
            hit_known[i] = 1;
            known_bridge[i] = tx_node;
            excluded = 0;
          } else {
            excluded = skeleton.externals[i - 1];
          }
        }
      }
      // Control-only content: everyone but the transmitter receives.
    }

    if (deliver) {
      const Msg& msg = *intents[tx_node - 1];
      for (NodeId v = 1; v <= n; ++v) {
        if (v == tx_node || v == excluded) continue;
        proto.receive(v, r, msg, tx_node);
        hasher.on_receive(r, v, tx_node, trace_ids(msg));
        ++out.metrics.receptions;
      }
    }

    proto.end_round(r);
    out.rounds = r;
    out.metrics.rounds_total = r;
    if (game.won()) {
      out.won = true;
      break;
    }
    if (proto.done(r)) {
      out.error = "wrapped algorithm finished before the game was won";
      break;
    }
  }
  if (!out.won && out.error.empty()) out.error = "round-limit";
  out.receive_hash = hasher.hashes();
  out.receive_count = hasher.counts();
  out.metrics.success = out.won;
  return out;
}

// Ground-truth execution on the instantiated target network with the same
// seeds, fingerprinted over the first `rounds` rounds.
template <typename ProtocolFactory>
GameTranscript replay_on_target_network(const SimConfig& cfg, ProtocolFactory&& make_protocol,
                                        const HittingGameInstance& game, uint64_t build_seed,
                                        Round rounds) {
  auto [star, adv] = build_target_network(game, cfg.n, cfg.s, build_seed);
  auto proto = make_protocol(star.source_of);
  ReceiveHasher hasher(cfg.n);
  EngineOptions opts;
  opts.observer = &hasher;
  opts.record_tx_ids = true;  // the adversary reads transmitted message ids
  SimConfig run = cfg;
  run.round_limit = rounds;
  EngineResult er = run_simulation(run, *proto, *adv, opts);
  GameTranscript out;
  out.rounds = er.metrics.rounds_total;
  out.metrics = er.metrics;
  out.metrics.error.clear();
  out.receive_hash = hasher.hashes();
  out.receive_count = hasher.counts();
  return out;
}

// Memoryless uniform random player: guesses uniformly over A x [beta] until
// the game is won. Returns the number of guesses used.
inline uint64_t uniform_random_player(HittingGameInstance& game, RngStream& rng) {
  const auto& a = game.set_a();
  while (!game.won()) {
    const uint32_t x = a[rng.uniform_int(a.size())];
    const uint32_t y = 1 + static_cast<uint32_t>(rng.uniform_int(game.beta()));
    game.guess(x, y);
  }
  return game.guesses_made();
}

}  // namespace dynbcast
