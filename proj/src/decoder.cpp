#include "autocf/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace autocf {

namespace {

void build_incidence(AttentionGraph& ag,
                     const std::vector<std::pair<NodeId, NodeId>>& undirected) {
  const std::size_t n = static_cast<std::size_t>(ag.num_nodes);
  std::vector<std::pair<NodeId, NodeId>> directed;
  directed.reserve(2 * undirected.size());
  for (const auto& [a, b] : undirected) {
    directed.emplace_back(a, b);  // (dst, src)
    directed.emplace_back(b, a);
  }
  std::sort(directed.begin(), directed.end());

  ag.offsets.assign(n + 1, 0);
  ag.src.resize(directed.size());
  ag.dst.resize(directed.size());
  for (std::size_t e = 0; e < directed.size(); ++e) {
    ag.dst[e] = directed[e].first;
    ag.src[e] = directed[e].second;
    ++ag.offsets[static_cast<std::size_t>(directed[e].first) + 1];
  }
  for (std::size_t v = 1; v <= n; ++v) ag.offsets[v] += ag.offsets[v - 1];
}

}  // namespace

AttentionGraph sample_attention_graph(const MaskPlan& plan, double rho, RngStream& rng) {
  const InteractionGraph& gp = plan.surviving;
  if (rho <= 0 || rho > 1) throw ConfigError("sample_attention_graph: rho must lie in (0, 1]");

  AttentionGraph ag;
  ag.rho = rho;
  ag.num_nodes = gp.num_nodes();

  const std::size_t quota = static_cast<std::size_t>(
      std::ceil(rho * static_cast<double>(gp.num_nodes())));
  if (quota < 2) throw ConfigError("sample_attention_graph: rho quota below 2 nodes");

  // active set: all masked-subgraph nodes, topped up with uniform extras;
  // never subsampled below V-bar
  std::vector<std::uint8_t> in_active(static_cast<std::size_t>(gp.num_nodes()), 0);
  ag.active = plan.subgraph_nodes;
  for (NodeId v : ag.active) in_active[static_cast<std::size_t>(v)] = 1;
  if (ag.active.size() < quota) {
    std::vector<NodeId> rest;
    rest.reserve(static_cast<std::size_t>(gp.num_nodes()) - ag.active.size());
    for (NodeId v = 0; v < gp.num_nodes(); ++v)
      if (!in_active[static_cast<std::size_t>(v)]) rest.push_back(v);
    rng.shuffle(rest);
    const std::size_t extra = quota - ag.active.size();
    for (std::size_t j = 0; j < extra; ++j) {
      ag.active.push_back(rest[j]);
      in_active[static_cast<std::size_t>(rest[j])] = 1;
    }
    std::sort(ag.active.begin(), ag.active.end());
  }

  // |E-bar| = |E'| distinct unordered pairs inside the active set, no self
  // pairs; duplicate draws are rejected and redrawn
  const std::size_t want = gp.num_edges();
  const std::size_t na = ag.active.size();
  const std::uint64_t capacity =
      static_cast<std::uint64_t>(na) * (static_cast<std::uint64_t>(na) - 1) / 2;
  if (want > capacity)
    throw CapacityError("sample_attention_graph: active set cannot host |E'| distinct pairs");
  std::set<std::pair<NodeId, NodeId>> chosen;
  while (chosen.size() < want) {
    NodeId a = ag.active[rng.uniform_index(na)];
    NodeId b = ag.active[rng.uniform_index(na)];
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    chosen.insert({a, b});
  }
  ag.sampled.assign(chosen.begin(), chosen.end());

  // E-tilde = E-bar union E'
  std::vector<std::pair<NodeId, NodeId>> undirected = ag.sampled;
  undirected.reserve(undirected.size() + gp.num_edges());
  for (const Edge& e : gp.edges()) undirected.emplace_back(e.u, gp.item_node(e.i));
  std::sort(undirected.begin(), undirected.end());
  undirected.erase(std::unique(undirected.begin(), undirected.end()), undirected.end());

  build_incidence(ag, undirected);
  return ag;
}

AttentionGraph full_attention_graph(const InteractionGraph& graph) {
  AttentionGraph ag;
  ag.rho = 1.0;
  ag.num_nodes = graph.num_nodes();
  ag.active.resize(static_cast<std::size_t>(graph.num_nodes()));
  for (std::size_t v = 0; v < ag.active.size(); ++v) ag.active[v] = static_cast<NodeId>(v);
  std::vector<std::pair<NodeId, NodeId>> undirected;
  undirected.reserve(graph.num_edges());
  for (const Edge& e : graph.edges()) undirected.emplace_back(e.u, graph.item_node(e.i));
  build_incidence(ag, undirected);
  return ag;
}

}  // namespace autocf
