#pragma once
// Independent brute-force oracles for the test and acceptance suites. These
// deliberately avoid the library's indexed/vectorized code paths: plain
// double loops and dense matrices only.
#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <vector>

#include "autocf/graph.hpp"
#include "autocf/rng.hpp"
#include "autocf/tensor.hpp"

namespace oracle {

using autocf::Edge;
using autocf::InteractionGraph;
using autocf::NodeId;
using autocf::RngStream;
using autocf::Tensor;

// Plain BFS distances over the bipartite adjacency; -1 = unreachable.
inline std::vector<int> bfs_distances(const InteractionGraph& g, NodeId start) {
  std::vector<int> dist(static_cast<std::size_t>(g.num_nodes()), -1);
  std::deque<NodeId> q;
  dist[static_cast<std::size_t>(start)] = 0;
  q.push_back(start);
  while (!q.empty()) {
    NodeId cur = q.front();
    q.pop_front();
    for (NodeId nb : g.neighbors(cur)) {
      if (dist[static_cast<std::size_t>(nb)] >= 0) continue;
      dist[static_cast<std::size_t>(nb)] = dist[static_cast<std::size_t>(cur)] + 1;
      q.push_back(nb);
    }
  }
  return dist;
}

inline std::vector<NodeId> khop_by_bfs(const InteractionGraph& g, NodeId v, int k) {
  auto dist = bfs_distances(g, v);
  std::vector<NodeId> members;
  for (NodeId n = 0; n < g.num_nodes(); ++n)
    if (dist[static_cast<std::size_t>(n)] >= 0 && dist[static_cast<std::size_t>(n)] <= k)
      members.push_back(n);
  return members;
}

inline InteractionGraph random_bipartite(NodeId users, NodeId items, std::size_t edges,
                                         RngStream& rng) {
  std::set<Edge> chosen;
  const std::size_t cap = static_cast<std::size_t>(users) * static_cast<std::size_t>(items);
  edges = std::min(edges, cap);
  while (chosen.size() < edges) {
    chosen.insert({static_cast<NodeId>(rng.uniform_index(static_cast<std::uint64_t>(users))),
                   static_cast<NodeId>(rng.uniform_index(static_cast<std::uint64_t>(items)))});
  }
  return InteractionGraph::from_edges(users, items,
                                      std::vector<Edge>(chosen.begin(), chosen.end()));
}

inline Tensor random_tensor(std::size_t r, std::size_t c, RngStream& rng, double lo = -1,
                            double hi = 1) {
  Tensor t(r, c);
  for (auto& x : t.v) x = rng.uniform(lo, hi);
  return t;
}

// Dense N x N propagation matrix: diag(1/deg or 1) + D^{-1/2} A D^{-1/2}.
inline std::vector<std::vector<double>> dense_propagation_matrix(const InteractionGraph& g) {
  const std::size_t n = static_cast<std::size_t>(g.num_nodes());
  std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const std::size_t deg = g.degree(v);
    M[static_cast<std::size_t>(v)][static_cast<std::size_t>(v)] =
        deg == 0 ? 1.0 : 1.0 / static_cast<double>(deg);
  }
  for (const Edge& e : g.edges()) {
    const std::size_t u = static_cast<std::size_t>(e.u);
    const std::size_t i = static_cast<std::size_t>(g.item_node(e.i));
    const double a = 1.0 / std::sqrt(static_cast<double>(g.degree(e.u)) *
                                     static_cast<double>(g.degree(g.item_node(e.i))));
    M[u][i] = a;
    M[i][u] = a;
  }
  return M;
}

inline Tensor dense_matvec_rows(const std::vector<std::vector<double>>& M, const Tensor& H) {
  Tensor out(H.nrows, H.ncols);
  for (std::size_t r = 0; r < H.nrows; ++r)
    for (std::size_t c = 0; c < H.ncols; ++c) {
      double s = 0;
      for (std::size_t k = 0; k < H.nrows; ++k) s += M[r][k] * H.at(k, c);
      out.at(r, c) = s;
    }
  return out;
}

// Mean cosine between h_v and every member of its k-hop neighborhood (v
// excluded), then sigmoid; the literal double loop of the definition.
inline double relatedness_by_loops(const InteractionGraph& g, const Tensor& ego, NodeId v, int k,
                                   bool mean_readout = true) {
  auto dist = bfs_distances(g, v);
  std::vector<NodeId> members;
  for (NodeId n = 0; n < g.num_nodes(); ++n)
    if (n != v && dist[static_cast<std::size_t>(n)] >= 0 &&
        dist[static_cast<std::size_t>(n)] <= k)
      members.push_back(n);
  if (members.empty()) return 0.5;
  auto norm = [&](NodeId n) {
    double s = 0;
    for (std::size_t j = 0; j < ego.ncols; ++j) s += ego.at(static_cast<std::size_t>(n), j) *
                                                     ego.at(static_cast<std::size_t>(n), j);
    return std::sqrt(s + 1e-24);
  };
  double acc = 0;
  for (NodeId w : members) {
    double dot = 0;
    for (std::size_t j = 0; j < ego.ncols; ++j)
      dot += ego.at(static_cast<std::size_t>(v), j) * ego.at(static_cast<std::size_t>(w), j);
    acc += dot / (norm(v) * norm(w));
  }
  if (mean_readout) acc /= static_cast<double>(members.size());
  return 1.0 / (1.0 + std::exp(-acc));
}

// Masked-edge oracle: an edge is masked iff both endpoints fall in the BFS
// k-hop set of some centric node.
inline std::vector<Edge> masked_by_bfs(const InteractionGraph& g,
                                       const std::vector<NodeId>& centric, int k) {
  std::vector<std::set<NodeId>> hoods;
  for (NodeId v : centric) {
    auto members = khop_by_bfs(g, v, k);
    hoods.emplace_back(members.begin(), members.end());
  }
  std::vector<Edge> masked;
  for (const Edge& e : g.edges()) {
    const NodeId a = e.u;
    const NodeId b = g.item_node(e.i);
    for (const auto& h : hoods)
      if (h.count(a) && h.count(b)) {
        masked.push_back(e);
        break;
      }
  }
  return masked;
}

// Explicit per-pair multi-head attention: scores, per-node softmax, weighted
// value sum, concatenated heads.
struct AttentionOracleHead {
  Tensor wq, wk, wv;  // (dh, d)
};

inline Tensor attention_by_loops(const Tensor& h,
                                 const std::vector<std::pair<NodeId, NodeId>>& undirected_edges,
                                 const std::vector<AttentionOracleHead>& heads) {
  const std::size_t n = h.nrows;
  const std::size_t d = h.ncols;
  const std::size_t H = heads.size();
  const std::size_t dh = d / H;

  std::vector<std::vector<NodeId>> inc(n);
  for (const auto& [a, b] : undirected_edges) {
    inc[static_cast<std::size_t>(a)].push_back(b);
    inc[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& row : inc) std::sort(row.begin(), row.end());

  auto project = [&](const Tensor& w, NodeId node) {
    std::vector<double> out(dh, 0.0);
    for (std::size_t r = 0; r < dh; ++r)
      for (std::size_t c = 0; c < d; ++c)
        out[r] += w.at(r, c) * h.at(static_cast<std::size_t>(node), c);
    return out;
  };

  Tensor out(n, d);
  for (std::size_t v = 0; v < n; ++v) {
    const auto& nbrs = inc[v];
    if (nbrs.empty()) continue;
    for (std::size_t hd = 0; hd < H; ++hd) {
      auto q = project(heads[hd].wq, static_cast<NodeId>(v));
      std::vector<double> scores;
      for (NodeId w : nbrs) {
        auto kv = project(heads[hd].wk, w);
        double s = 0;
        for (std::size_t j = 0; j < dh; ++j) s += q[j] * kv[j];
        scores.push_back(s / std::sqrt(static_cast<double>(dh)));
      }
      double mx = *std::max_element(scores.begin(), scores.end());
      double z = 0;
      for (double& s : scores) {
        s = std::exp(s - mx);
        z += s;
      }
      for (double& s : scores) s /= z;
      for (std::size_t a = 0; a < nbrs.size(); ++a) {
        auto val = project(heads[hd].wv, nbrs[a]);
        for (std::size_t j = 0; j < dh; ++j) out.at(v, hd * dh + j) += scores[a] * val[j];
      }
    }
  }
  return out;
}

// Literal-definition Recall@N / NDCG@N.
inline std::pair<double, double> metrics_by_definition(const std::vector<NodeId>& ranking,
                                                       const std::vector<NodeId>& test, int N) {
  std::set<NodeId> tset(test.begin(), test.end());
  std::size_t hits = 0;
  double dcg = 0;
  for (int pos = 1; pos <= N && pos <= static_cast<int>(ranking.size()); ++pos) {
    if (tset.count(ranking[static_cast<std::size_t>(pos - 1)])) {
      ++hits;
      dcg += 1.0 / std::log2(pos + 1.0);
    }
  }
  double idcg = 0;
  for (int pos = 1; pos <= N && pos <= static_cast<int>(tset.size()); ++pos)
    idcg += 1.0 / std::log2(pos + 1.0);
  return {static_cast<double>(hits) / static_cast<double>(tset.size()), dcg / idcg};
}

}  // namespace oracle
