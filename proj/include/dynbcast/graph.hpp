// Per-round communication graphs.
//
// Undirected, no self-loops, nodes are 1..n. Adjacency is stored as bitset
// rows so the per-round reception rule and interval-connectivity checks stay
// cheap on the hot path.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dynbcast/rng.hpp"

namespace dynbcast {

using NodeId = uint32_t;  // 1-based

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : SimError {
  using SimError::SimError;
};
struct DomainError : SimError {
  using SimError::SimError;
};

class RoundGraph {
 public:
  explicit RoundGraph(uint32_t n = 0)
      : n_(n), words_((n + 63) / 64), adj_(static_cast<size_t>(n) * words_, 0) {}

  uint32_t node_count() const { return n_; }
  uint32_t words_per_row() const { return words_; }

  void add_edge(NodeId u, NodeId v) {
    check_node(u);
    check_node(v);
    if (u == v) throw DomainError("RoundGraph: self-loop " + std::to_string(u));
    set_bit(u - 1, v - 1);
    set_bit(v - 1, u - 1);
  }

  void remove_edge(NodeId u, NodeId v) {
    check_node(u);
    check_node(v);
    if (u == v) return;
    clear_bit(u - 1, v - 1);
    clear_bit(v - 1, u - 1);
  }

  bool has_edge(NodeId u, NodeId v) const {
    if (u == v || u < 1 || v < 1 || u > n_ || v > n_) return false;
    return (row(u - 1)[(v - 1) >> 6] >> ((v - 1) & 63)) & 1;
  }

  const uint64_t* row(uint32_t i) const { return adj_.data() + static_cast<size_t>(i) * words_; }

  uint32_t degree(NodeId u) const {
    check_node(u);
    uint32_t d = 0;
    const uint64_t* r = row(u - 1);
    for (uint32_t w = 0; w < words_; ++w) d += popcount(r[w]);
    return d;
  }

  uint32_t max_degree() const {
    uint32_t d = 0;
    for (NodeId u = 1; u <= n_; ++u) d = std::max(d, degree(u));
    return d;
  }

  template <typename Fn>
  void for_each_neighbor(NodeId u, Fn&& fn) const {
    const uint64_t* r = row(u - 1);
    for (uint32_t w = 0; w < words_; ++w) {
      uint64_t bits = r[w];
      while (bits) {
        uint32_t b = ctz(bits);
        fn(static_cast<NodeId>(w * 64 + b + 1));
        bits &= bits - 1;
      }
    }
  }

  std::vector<std::pair<NodeId, NodeId>> edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    for (NodeId u = 1; u <= n_; ++u)
      for_each_neighbor(u, [&](NodeId v) {
        if (u < v) out.emplace_back(u, v);
      });
    return out;
  }

  uint64_t edge_count() const {
    uint64_t total = 0;
    for (const uint64_t w : adj_) total += popcount(w);
    return total / 2;
  }

  bool connected() const {
    if (n_ == 0) return true;
    std::vector<uint64_t> visited(words_, 0), frontier(words_, 0);
    frontier[0] = 1;  // node 1
    visited[0] = 1;
    bool grew = true;
    while (grew) {
      grew = false;
      std::vector<uint64_t> next(words_, 0);
      for (uint32_t w = 0; w < words_; ++w) {
        uint64_t bits = frontier[w];
        while (bits) {
          uint32_t b = ctz(bits);
          bits &= bits - 1;
          const uint64_t* r = row(w * 64 + b);
          for (uint32_t w2 = 0; w2 < words_; ++w2) next[w2] |= r[w2];
        }
      }
      for (uint32_t w = 0; w < words_; ++w) {
        uint64_t fresh = next[w] & ~visited[w];
        if (fresh) {
          visited[w] |= fresh;
          frontier[w] = fresh;
          grew = true;
        } else {
          frontier[w] = 0;
        }
      }
    }
    uint32_t seen = 0;
    for (const uint64_t w : visited) seen += popcount(w);
    return seen == n_;
  }

  // In-place edge intersection with another graph on the same node set.
  void intersect_with(const RoundGraph& other) {
    if (other.n_ != n_) throw ConfigError("RoundGraph: intersect size mismatch");
    for (size_t i = 0; i < adj_.size(); ++i) adj_[i] &= other.adj_[i];
  }

  bool operator==(const RoundGraph& other) const {
    return n_ == other.n_ && adj_ == other.adj_;
  }

  static RoundGraph complete(uint32_t n) {
    RoundGraph g(n);
    for (NodeId u = 1; u <= n; ++u)
      for (NodeId v = u + 1; v <= n; ++v) g.add_edge(u, v);
    return g;
  }

  static RoundGraph ring(uint32_t n) {
    RoundGraph g(n);
    if (n == 2) {
      g.add_edge(1, 2);
      return g;
    }
    for (NodeId u = 1; u <= n; ++u) g.add_edge(u, u % n + 1);
    return g;
  }

  static RoundGraph path(uint32_t n) {
    RoundGraph g(n);
    for (NodeId u = 1; u + 1 <= n; ++u) g.add_edge(u, u + 1);
    return g;
  }

  static RoundGraph star(uint32_t n) {
    RoundGraph g(n);
    for (NodeId u = 2; u <= n; ++u) g.add_edge(1, u);
    return g;
  }

  static RoundGraph from_edges(uint32_t n, const std::vector<std::pair<NodeId, NodeId>>& edges) {
    RoundGraph g(n);
    for (auto [u, v] : edges) g.add_edge(u, v);
    return g;
  }

  // Uniform random labeled spanning tree (random Pruefer sequence).
  static RoundGraph uniform_tree(uint32_t n, RngStream& rng) {
    RoundGraph g(n);
    if (n == 1) return g;
    if (n == 2) {
      g.add_edge(1, 2);
      return g;
    }
    std::vector<uint32_t> pruefer(n - 2);
    for (auto& x : pruefer) x = static_cast<uint32_t>(rng.uniform_int(n)) + 1;
    std::vector<uint32_t> deg(n + 1, 1);
    for (uint32_t x : pruefer) deg[x]++;
    // Decode with a simple min-leaf scan; n is desk-scale.
    std::vector<bool> used(n + 1, false);
    for (uint32_t x : pruefer) {
      NodeId leaf = 0;
      for (NodeId v = 1; v <= n; ++v)
        if (deg[v] == 1 && !used[v]) {
          leaf = v;
          break;
        }
      g.add_edge(leaf, x);
      used[leaf] = true;
      deg[leaf]--;
      deg[x]--;
    }
    NodeId a = 0, b = 0;
    for (NodeId v = 1; v <= n; ++v)
      if (deg[v] == 1 && !used[v]) {
        if (!a)
          a = v;
        else
          b = v;
      }
    g.add_edge(a, b);
    return g;
  }

 private:
  void check_node(NodeId u) const {
    if (u < 1 || u > n_)
      throw DomainError("RoundGraph: node " + std::to_string(u) + " outside [1," +
                        std::to_string(n_) + "]");
  }
  void set_bit(uint32_t i, uint32_t j) { adj_[static_cast<size_t>(i) * words_ + (j >> 6)] |= uint64_t{1} << (j & 63); }
  void clear_bit(uint32_t i, uint32_t j) { adj_[static_cast<size_t>(i) * words_ + (j >> 6)] &= ~(uint64_t{1} << (j & 63)); }

  static uint32_t popcount(uint64_t x) { return static_cast<uint32_t>(__builtin_popcountll(x)); }
  static uint32_t ctz(uint64_t x) { return static_cast<uint32_t>(__builtin_ctzll(x)); }

  uint32_t n_;
  uint32_t words_;
  std::vector<uint64_t> adj_;
};

}  // namespace dynbcast
