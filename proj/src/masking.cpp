#include "autocf/masking.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace autocf {

NeighborhoodIndex NeighborhoodIndex::build(const InteractionGraph& graph,
                                           const std::vector<NodeId>& anchors, int k) {
  if (k < 1) throw ConfigError("NeighborhoodIndex: k must be >= 1");
  NeighborhoodIndex idx;
  idx.k = k;
  idx.anchors = anchors;
  idx.offsets.assign(anchors.size() + 1, 0);

  // scratch BFS buffers reused across anchors
  std::vector<int> dist(static_cast<std::size_t>(graph.num_nodes()), -1);
  std::vector<NodeId> touched;
  std::deque<NodeId> queue;

  for (std::size_t a = 0; a < anchors.size(); ++a) {
    const NodeId v = anchors[a];
    if (v < 0 || v >= graph.num_nodes()) throw IndexError("NeighborhoodIndex: node out of range");
    touched.clear();
    queue.clear();
    dist[static_cast<std::size_t>(v)] = 0;
    touched.push_back(v);
    queue.push_back(v);
    while (!queue.empty()) {
      NodeId cur = queue.front();
      queue.pop_front();
      const int dcur = dist[static_cast<std::size_t>(cur)];
      if (dcur == k) continue;
      for (NodeId nb : graph.neighbors(cur)) {
        if (dist[static_cast<std::size_t>(nb)] >= 0) continue;
        dist[static_cast<std::size_t>(nb)] = dcur + 1;
        touched.push_back(nb);
        queue.push_back(nb);
        idx.pairs.push_back(nb);
      }
    }
    idx.offsets[a + 1] = static_cast<std::int64_t>(idx.pairs.size());
    for (NodeId t : touched) dist[static_cast<std::size_t>(t)] = -1;
  }
  return idx;
}

double gumbel_noise_from_uniform(double mu) {
  mu = std::min(std::max(mu, 1e-10), 1.0 - 1e-10);
  return -std::log(-std::log(mu));
}

std::vector<double> gumbel_perturb(const RelatednessScores& scores, RngStream& rng) {
  std::vector<double> out(scores.s.size());
  for (std::size_t v = 0; v < scores.s.size(); ++v) {
    if (!(scores.s[v] > 0.0 && scores.s[v] < 1.0))
      throw DomainError("gumbel_perturb: scores must lie in (0, 1)");
    out[v] = std::log(scores.s[v]) + gumbel_noise_from_uniform(rng.uniform01());
  }
  return out;
}

std::vector<NodeId> select_centric(const std::vector<double>& perturbed, std::size_t S) {
  if (S == 0) throw ConfigError("select_centric: S must be positive");
  if (S > perturbed.size()) throw ConfigError("select_centric: S exceeds node count");
  std::vector<NodeId> order(perturbed.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(S), order.end(),
                    [&](NodeId a, NodeId b) {
                      if (perturbed[static_cast<std::size_t>(a)] !=
                          perturbed[static_cast<std::size_t>(b)])
                        return perturbed[static_cast<std::size_t>(a)] >
                               perturbed[static_cast<std::size_t>(b)];
                      return a < b;
                    });
  order.resize(S);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<NodeId> select_centric_filtered(const RelatednessScores& scores,
                                            const std::vector<NodeId>& anchors, std::size_t S,
                                            RngStream& rng) {
  std::vector<double> perturbed = gumbel_perturb(scores, rng);
  std::vector<std::pair<double, NodeId>> candidates;
  candidates.reserve(anchors.size());
  for (std::size_t a = 0; a < anchors.size(); ++a)
    if (!scores.isolated[a]) candidates.emplace_back(perturbed[a], anchors[a]);
  const std::size_t take = std::min(S, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end(), [](const auto& x, const auto& y) {
                      if (x.first != y.first) return x.first > y.first;
                      return x.second < y.second;
                    });
  std::vector<NodeId> out;
  out.reserve(take);
  for (std::size_t j = 0; j < take; ++j) out.push_back(candidates[j].second);
  std::sort(out.begin(), out.end());
  return out;
}

MaskPlan mask_edges(const InteractionGraph& graph, const std::vector<NodeId>& centric, int k) {
  for (NodeId v : centric)
    if (v < 0 || v >= graph.num_nodes()) throw IndexError("mask_edges: centric node out of range");

  MaskPlan plan;
  plan.centric = centric;
  std::sort(plan.centric.begin(), plan.centric.end());
  plan.centric.erase(std::unique(plan.centric.begin(), plan.centric.end()), plan.centric.end());

  std::vector<std::uint8_t> masked(graph.num_edges(), 0);
  std::vector<std::uint8_t> in_union(static_cast<std::size_t>(graph.num_nodes()), 0);

  // membership bitmap per centric neighborhood; reset after each centric node
  std::vector<std::uint8_t> member(static_cast<std::size_t>(graph.num_nodes()), 0);
  for (NodeId v : plan.centric) {
    NodeSet hood = k_hop_neighborhood(graph, v, k);
    for (NodeId m : hood.members) {
      member[static_cast<std::size_t>(m)] = 1;
      in_union[static_cast<std::size_t>(m)] = 1;
    }
    // an edge (u, i) is inside the subgraph iff both endpoints are members
    for (NodeId m : hood.members) {
      if (!graph.is_user(m)) continue;
      auto row = graph.user_items().row(m);
      const std::int64_t base = graph.user_items().offsets[m];
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (member[static_cast<std::size_t>(row[j])])
          masked[static_cast<std::size_t>(base) + j] = 1;
      }
    }
    for (NodeId m : hood.members) member[static_cast<std::size_t>(m)] = 0;
  }

  // user_items rows enumerate edges in the same (u, i)-sorted order as edges()
  std::vector<Edge> survivors;
  survivors.reserve(graph.num_edges());
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    if (masked[e])
      plan.masked_edges.push_back(graph.edges()[e]);
    else
      survivors.push_back(graph.edges()[e]);
  }
  plan.surviving =
      InteractionGraph::from_edges(graph.num_users(), graph.num_items(), std::move(survivors));
  for (NodeId v = 0; v < graph.num_nodes(); ++v)
    if (in_union[static_cast<std::size_t>(v)]) plan.subgraph_nodes.push_back(v);
  return plan;
}

double infomax_loss(const RelatednessScores& scores, const std::vector<std::size_t>& over) {
  if (over.empty()) throw ConfigError("infomax_loss: node set is empty");
  double acc = 0;
  for (std::size_t a : over) acc += scores.s[a];
  return -acc;
}

}  // namespace autocf
