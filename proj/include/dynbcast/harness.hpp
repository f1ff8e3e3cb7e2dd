// Experiment orchestration: named protocols and adversaries, grid sweeps with
// per-trial seeds, CSV output, and the self-check suite behind `validate`.

#pragma once

#include <array>
#include <atomic>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "dynbcast/fit.hpp"
#include "dynbcast/hitting_game.hpp"
#include "dynbcast/multicast.hpp"
#include "dynbcast/protocols.hpp"
#include "dynbcast/rlnc.hpp"

namespace dynbcast {

inline const std::vector<std::string>& protocol_names() {
  static const std::vector<std::string> kNames = {
      "harmonic-klimited", "harmonic-cr",  "homogeneous-klimited", "homogeneous-cr",
      "psi-klimited",      "psi-cr",       "auto-klimited",        "auto-cr",
      "algorithm1",        "algorithm2",   "rlnc"};
  return kNames;
}

inline const std::vector<std::string>& adversary_names() {
  static const std::vector<std::string> kNames = {"static", "dualgraph-strong", "target-network",
                                                  "random-connected", "isolating-heuristic"};
  return kNames;
}

struct ProtocolSpec {
  std::string name = "harmonic-klimited";
  uint32_t k = 0;               // k-limited target; 0 = n
  uint32_t source_count = 1;    // sources for single-message runs
  SfProtocolParams sf;          // eps, kappa, kappa', harmonic budget knobs
  double alpha = 24.0;          // algorithm1 inner-iteration constant
  double phase_cap_multiplier = 10.0;  // algorithm2 livelock cap
  uint32_t q = 257;             // rlnc field modulus
  double kappa2 = 4.0;          // rlnc budget constant
  uint32_t payload_len = 0;     // rlnc payload length; 0 = s
};

struct AdversarySpec {
  std::string name = "random-connected";
  std::string stable = "ring";  // stable subgraph: ring | path | clique | star | random-tree
  double extra_edge_prob = 0.0;
};

struct Cell {
  uint32_t n = 8, s = 1, c = 1;
  uint64_t T = kInfinite, tau = kInfinite;
};

struct ExperimentSpec {
  int schema_version = 1;
  ProtocolSpec protocol;
  AdversarySpec adversary;
  std::vector<uint32_t> grid_n = {8};
  std::vector<uint32_t> grid_s = {1};
  std::vector<uint32_t> grid_c = {1};
  std::vector<uint64_t> grid_T = {kInfinite};
  std::vector<uint64_t> grid_tau = {kInfinite};
  uint32_t trials = 1;
  uint64_t seed = 1;
  Round round_limit = Round{1} << 40;
  std::string out;
  uint32_t threads = 0;  // 0 = hardware concurrency
};

struct TrialRow {
  Cell cell;
  uint32_t trial = 0;
  uint64_t seed = 0;
  Metrics metrics;
  uint64_t phases = 0;
  std::vector<MulticastPhaseRow> phase_rows;
};

inline uint64_t trial_seed(uint64_t base, uint64_t cell_index, uint64_t trial) {
  uint64_t h = base;
  splitmix64(h);
  h ^= splitmix64(h) + cell_index;
  h ^= splitmix64(h) + trial;
  return splitmix64(h);
}

// ---------------------------------------------------------------------------
// Factories

inline RoundGraph make_stable_graph(const std::string& kind, uint32_t n, uint64_t seed) {
  if (kind == "ring") return RoundGraph::ring(n);
  if (kind == "path") return RoundGraph::path(n);
  if (kind == "clique") return RoundGraph::complete(n);
  if (kind == "star") return RoundGraph::star(n);
  if (kind == "random-tree") {
    RngStream rng = RngStream::from_label(seed, "stable-graph");
    return RoundGraph::uniform_tree(n, rng);
  }
  throw ConfigError("unknown stable graph '" + kind +
                    "' (known: ring, path, clique, star, random-tree)");
}

inline std::unique_ptr<AdversaryPolicy> make_adversary(const AdversarySpec& spec, const Cell& cell,
                                                       uint64_t seed,
                                                       const std::vector<NodeId>& sources) {
  if (spec.name == "static")
    return std::make_unique<StaticAdversary>(make_stable_graph(spec.stable, cell.n, seed));
  if (spec.name == "dualgraph-strong")
    return strong_dualgraph_adversary(StableSubgraph(make_stable_graph(spec.stable, cell.n, seed)));
  if (spec.name == "random-connected")
    return std::make_unique<RandomConnectedAdversary>(
        cell.n, cell.T, spec.extra_edge_prob, RngStream::from_label(seed, "adversary"), cell.tau);
  if (spec.name == "isolating-heuristic")
    return std::make_unique<IsolatingHeuristicAdversary>(cell.n, sources,
                                                         RngStream::from_label(seed, "adversary"));
  if (spec.name == "target-network")
    throw ConfigError("the target-network adversary is driven by the hitgame subcommand");
  std::string known;
  for (const auto& name : adversary_names()) known += (known.empty() ? "" : ", ") + name;
  throw ConfigError("unknown adversary '" + spec.name + "' (known: " + known + ")");
}

// Distinct source nodes, one per broadcast message.
inline std::vector<NodeId> pick_sources(uint32_t n, uint32_t count, uint64_t seed) {
  if (count > n) throw ConfigError("more sources than nodes");
  RngStream rng = RngStream::from_label(seed, "sources");
  std::vector<NodeId> nodes(n);
  for (uint32_t i = 0; i < n; ++i) nodes[i] = i + 1;
  return rng.sample(nodes, count);
}

// ---------------------------------------------------------------------------
// One trial

namespace detail {

template <typename Setting>
TrialRow run_multicast_trial(const std::string& algo, const SimConfig& cfg,
                             const Setting& setting, const ProtocolSpec& ps,
                             AdversaryPolicy& adv, const std::vector<NodeId>& source_of) {
  TrialRow row;
  if (algo == "algorithm1") {
    CouponMulticast<Setting> proto(cfg, setting, source_of, ps.alpha);
    EngineResult er = run_simulation(cfg, proto, adv);
    row.metrics = er.metrics;
    row.metrics.success = proto.report().completed;
    row.phases = proto.report().phases;
    row.phase_rows = proto.report().rows;
    if (!proto.report().error.empty()) row.metrics.error = proto.report().error;
  } else {
    ResistantMulticast<Setting> proto(cfg, setting, source_of, ps.phase_cap_multiplier);
    EngineResult er = run_simulation(cfg, proto, adv);
    row.metrics = er.metrics;
    row.metrics.success = proto.report().completed;
    row.phases = proto.report().phases;
    row.phase_rows = proto.report().rows;
    if (!proto.report().error.empty()) row.metrics.error = proto.report().error;
  }
  return row;
}

}  // namespace detail

inline TrialRow run_trial(const ProtocolSpec& ps, const AdversarySpec& as, const Cell& cell,
                          uint64_t seed, Round round_limit) {
  SimConfig cfg;
  cfg.n = cell.n;
  cfg.s = cell.s;
  cfg.c = cell.c;
  cfg.seed = seed;
  cfg.round_limit = round_limit;
  cfg.validate();

  TrialRow row;
  row.seed = seed;
  row.cell = cell;

  const std::string& name = ps.name;
  const bool klim = name.size() > 9 && name.substr(name.size() - 9) == "-klimited";
  const bool cr = name.size() > 3 && name.substr(name.size() - 3) == "-cr";

  if (klim || cr) {
    const uint32_t count = cr ? ps.source_count : std::max<uint32_t>(1, ps.source_count);
    std::vector<NodeId> src_nodes = pick_sources(cfg.n, std::min(count, cfg.n), seed);
    std::vector<SourceInit> sources;
    for (uint32_t i = 0; i < src_nodes.size(); ++i)
      sources.push_back({src_nodes[i], SfMessage::single(cr ? i + 1 : 1)});
    auto adv = make_adversary(as, cell, seed, src_nodes);
    const uint32_t k = ps.k ? ps.k : cfg.n;

    SettingKind kind;
    if (name.rfind("harmonic", 0) == 0)
      kind = SettingKind::kHarmonic;
    else if (name.rfind("homogeneous", 0) == 0)
      kind = SettingKind::kHomogeneous;
    else if (name.rfind("psi", 0) == 0)
      kind = SettingKind::kPsiPhase;
    else
      kind = select_setting(cfg.n, cell.T, cell.tau);

    SingleBcastOutcome out;
    switch (kind) {
      case SettingKind::kHarmonic:
        out = klim ? harmonic_k_limited(cfg, *adv, sources, k, ps.sf)
                   : harmonic_concurrency_resistant(cfg, *adv, sources, ps.sf);
        break;
      case SettingKind::kHomogeneous:
        out = klim ? homogeneous_k_limited(cfg, *adv, sources, k, ps.sf)
                   : homogeneous_concurrency_resistant(cfg, *adv, sources, ps.sf);
        break;
      case SettingKind::kPsiPhase:
        out = klim ? psi_phase_k_limited(cfg, *adv, sources, k, cell.T, cell.tau, ps.sf)
                   : psi_phase_concurrency_resistant(cfg, *adv, sources, cell.T, cell.tau, ps.sf);
        break;
    }
    row.metrics = out.metrics;
    if (cr) {
      // Success for a CR run = unanimous and correct detection.
      const bool expect_success = sources.size() == 1;
      row.metrics.success = out.detection_unanimous && (out.returned_one == expect_success);
    }
    return row;
  }

  if (name == "algorithm1" || name == "algorithm2") {
    std::vector<NodeId> source_of = pick_sources(cfg.n, cfg.s, seed);
    auto adv = make_adversary(as, cell, seed, source_of);
    switch (select_setting(cfg.n, cell.T, cell.tau)) {
      case SettingKind::kHarmonic:
        row = detail::run_multicast_trial(name, cfg, HarmonicSetting(cfg.n, ps.sf), ps, *adv,
                                          source_of);
        break;
      case SettingKind::kHomogeneous:
        row = detail::run_multicast_trial(name, cfg, HomogeneousSetting(cfg.n, ps.sf), ps, *adv,
                                          source_of);
        break;
      case SettingKind::kPsiPhase:
        row = detail::run_multicast_trial(name, cfg, PsiSetting(cfg.n, cell.tau, cell.T, ps.sf),
                                          ps, *adv, source_of);
        break;
    }
    row.seed = seed;
    row.cell = cell;
    return row;
  }

  if (name == "rlnc") {
    std::vector<NodeId> source_of = pick_sources(cfg.n, cfg.s, seed);
    auto adv = make_adversary(as, cell, seed, source_of);
    RlncParams params;
    params.q = ps.q;
    params.kappa2 = ps.kappa2;
    params.payload_len = ps.payload_len;
    RlncOutcome out = rlnc_broadcast(cfg, *adv, source_of, params);
    row.metrics = out.metrics;
    return row;
  }

  std::string known;
  for (const auto& p : protocol_names()) known += (known.empty() ? "" : ", ") + p;
  throw ConfigError("unknown protocol '" + name + "' (known: " + known + ")");
}

// ---------------------------------------------------------------------------
// Sweeps

inline std::string format_inf(uint64_t x) {
  return x == kInfinite ? "inf" : std::to_string(x);
}

inline const char* csv_header() {
  return "protocol,adversary,n,s,c,T,tau,trial,seed,rounds,success,transmissions,receptions,"
         "isolation_rounds,collision_rounds,phases,error";
}

inline std::string csv_row(const ProtocolSpec& ps, const AdversarySpec& as, const TrialRow& row) {
  std::ostringstream os;
  os << ps.name << ',' << as.name << ',' << row.cell.n << ',' << row.cell.s << ',' << row.cell.c
     << ',' << format_inf(row.cell.T) << ',' << format_inf(row.cell.tau) << ',' << row.trial << ','
     << row.seed << ',' << row.metrics.rounds_total << ',' << (row.metrics.success ? 1 : 0) << ','
     << row.metrics.transmissions << ',' << row.metrics.receptions << ','
     << row.metrics.isolation_rounds << ',' << row.metrics.collision_rounds << ',' << row.phases
     << ',' << row.metrics.error;
  return os.str();
}

struct SweepResult {
  std::vector<TrialRow> rows;  // cell-major, then trial order
  std::string csv;
};

// Executes trials x grid cells; each trial gets an independent seed derived
// from (seed, cell index, trial). Trials run in parallel but rows keep the
// deterministic (cell, trial) order, so re-running an identical spec gives a
// byte-identical CSV.
inline SweepResult run_experiment(const ExperimentSpec& spec) {
  std::vector<Cell> cells;
  for (uint32_t n : spec.grid_n)
    for (uint32_t s : spec.grid_s)
      for (uint32_t c : spec.grid_c)
        for (uint64_t T : spec.grid_T)
          for (uint64_t tau : spec.grid_tau) cells.push_back({n, s, c, T, tau});
  if (spec.trials < 1) throw ConfigError("trials must be >= 1");

  const size_t total = cells.size() * spec.trials;
  std::vector<TrialRow> rows(total);
  std::atomic<size_t> next{0};
  uint32_t nthreads = spec.threads ? spec.threads : std::thread::hardware_concurrency();
  if (nthreads < 1) nthreads = 1;
  nthreads = static_cast<uint32_t>(std::min<size_t>(nthreads, total));

  auto worker = [&]() {
    for (size_t idx = next.fetch_add(1); idx < total; idx = next.fetch_add(1)) {
      const size_t cell_idx = idx / spec.trials;
      const uint32_t trial = static_cast<uint32_t>(idx % spec.trials);
      const uint64_t seed = trial_seed(spec.seed, cell_idx, trial);
      TrialRow& row = rows[idx];
      try {
        row = run_trial(spec.protocol, spec.adversary, cells[cell_idx],  seed, spec.round_limit);
      } catch (const SimError& e) {
        row.cell = cells[cell_idx];
        row.seed = seed;
        row.metrics.error = std::string("error: ") + e.what();
      }
      row.trial = trial;
    }
  };
  std::vector<std::thread> pool;
  for (uint32_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  SweepResult result;
  std::ostringstream os;
  os << csv_header() << '\n';
  for (const TrialRow& row : rows) os << csv_row(spec.protocol, spec.adversary, row) << '\n';
  result.rows = std::move(rows);
  result.csv = os.str();
  if (!spec.out.empty()) {
    std::ofstream f(spec.out, std::ios::trunc);
    if (!f) throw ConfigError("cannot open output file " + spec.out);
    f << result.csv;
  }
  return result;
}

// Parse a sweep CSV back into per-cell medians for fitting.
inline std::vector<FitPoint> fit_points_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw FitError("empty csv");
  std::map<std::array<double, 5>, std::vector<double>> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() < 16) continue;
    auto num = [](const std::string& s) -> double {
      return s == "inf" ? 0.0 : std::stod(s);  // 0 encodes infinity in fit space
    };
    std::array<double, 5> key = {num(f[2]), num(f[3]), num(f[4]), num(f[5]), num(f[6])};
    if (f.size() > 16 && !f[16].empty()) continue;  // skip error rows
    cells[key].push_back(num(f[9]));
  }
  std::vector<FitPoint> pts;
  for (auto& [key, ys] : cells) {
    FitPoint p;
    p.n = key[0];
    p.s = key[1];
    p.c = key[2];
    p.T = key[3];
    p.tau = key[4];
    p.y = median(ys);
    pts.push_back(p);
  }
  return pts;
}

}  // namespace dynbcast
