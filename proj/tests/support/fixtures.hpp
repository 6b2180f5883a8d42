#pragma once
// Shared fixtures: the small deterministic toy graph used by gradient checks
// and trainability tests, plus a clustered synthetic interaction corpus that
// stands in for a public implicit-feedback dataset at desk scale.
#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "autocf/graph.hpp"
#include "autocf/rng.hpp"

namespace fixtures {

using autocf::Edge;
using autocf::InteractionGraph;
using autocf::NodeId;
using autocf::RngStream;

// 5 users x 6 items, 14 edges, connected, mixed degrees.
inline InteractionGraph toy_graph() {
  std::vector<Edge> edges = {
      {0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 3}, {2, 0}, {2, 3},
      {2, 4}, {3, 2}, {3, 4}, {3, 5}, {4, 0}, {4, 5}, {1, 2},
  };
  return InteractionGraph::from_edges(5, 6, std::move(edges));
}

// Clustered implicit-feedback generator: users belong to latent interest
// clusters, items carry a cluster affinity plus a global popularity skew.
// Degree targets follow a truncated power law so the sparsity groups of the
// evaluation protocol are all populated.
struct SyntheticSpec {
  NodeId users = 2556;
  NodeId items = 1975;
  std::size_t target_edges = 29500;
  int clusters = 24;
  double in_cluster_prob = 0.82;  // probability an interaction stays on-cluster
  std::uint64_t seed = 20230430;
};

inline InteractionGraph synthetic_interactions(const SyntheticSpec& spec) {
  RngStream rng(spec.seed, "synthetic");

  std::vector<int> user_cluster(static_cast<std::size_t>(spec.users));
  for (auto& c : user_cluster) c = static_cast<int>(rng.uniform_index(spec.clusters));

  // items per cluster, with a zipf-ish within-cluster popularity ordering
  std::vector<std::vector<NodeId>> cluster_items(static_cast<std::size_t>(spec.clusters));
  for (NodeId i = 0; i < spec.items; ++i)
    cluster_items[rng.uniform_index(spec.clusters)].push_back(i);
  for (auto& ci : cluster_items)
    if (ci.empty()) ci.push_back(static_cast<NodeId>(rng.uniform_index(spec.items)));

  auto zipf_pick = [&](const std::vector<NodeId>& pool) {
    // P(rank r) ~ 1/(r+1): invert the harmonic CDF by rejection
    while (true) {
      const std::size_t r = rng.uniform_index(pool.size());
      if (rng.uniform01() < 1.0 / (1.0 + 0.15 * static_cast<double>(r))) return pool[r];
    }
  };

  // truncated power-law degree targets, scaled to the edge budget
  std::vector<double> want(static_cast<std::size_t>(spec.users));
  double total = 0;
  for (auto& w : want) {
    w = std::min(120.0, 2.0 / std::pow(rng.uniform01() + 1e-3, 0.62));
    total += w;
  }
  const double scale = static_cast<double>(spec.target_edges) / total;

  std::set<Edge> chosen;
  for (NodeId u = 0; u < spec.users; ++u) {
    const int deg = std::max(1, static_cast<int>(std::lround(want[static_cast<std::size_t>(u)] * scale)));
    const auto& own = cluster_items[static_cast<std::size_t>(user_cluster[static_cast<std::size_t>(u)])];
    int placed = 0;
    int attempts = 0;
    while (placed < deg && attempts < deg * 30) {
      ++attempts;
      NodeId item;
      if (rng.uniform01() < spec.in_cluster_prob) {
        item = zipf_pick(own);
      } else {
        const auto& other = cluster_items[rng.uniform_index(spec.clusters)];
        item = zipf_pick(other);
      }
      if (chosen.insert({u, item}).second) ++placed;
    }
  }
  return InteractionGraph::from_edges(spec.users, spec.items,
                                      std::vector<Edge>(chosen.begin(), chosen.end()));
}

inline void write_tsv(const std::string& path, const InteractionGraph& g) {
  std::ofstream out(path);
  for (const Edge& e : g.edges()) out << "u" << e.u << "\t" << "i" << e.i << "\n";
}

}  // namespace fixtures
