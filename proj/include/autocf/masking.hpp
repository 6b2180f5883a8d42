#pragma once
#include <cmath>
#include <cstdint>
#include <vector>

#include "autocf/graph.hpp"
#include "autocf/rng.hpp"
#include "autocf/tensor.hpp"

namespace autocf {

enum class Readout { Mean, Sum };

// Per-node subgraph relatedness: sigmoid of the (mean) cosine between a node's
// embedding and each member of its k-hop neighborhood, the node itself
// excluded from the aggregation. Nodes with no neighbors within k hops are
// flagged isolated, score sigmoid(0) = 0.5, and are never picked as centric.
struct RelatednessScores {
  std::vector<double> s;         // sigmoid(readout of cosines), in (0, 1)
  std::vector<double> pre_sigmoid;
  std::vector<std::uint8_t> isolated;
  int k = 0;
};

// Flattened k-hop pair lists for a set of anchor nodes; shared by the value
// and tape evaluations of the relatedness score so they agree exactly.
struct NeighborhoodIndex {
  std::vector<NodeId> anchors;
  std::vector<std::int64_t> offsets;   // per anchor into `pairs`
  std::vector<NodeId> pairs;           // neighborhood members, anchor excluded
  int k = 0;

  static NeighborhoodIndex build(const InteractionGraph& graph,
                                 const std::vector<NodeId>& anchors, int k);
  std::size_t pair_count(std::size_t a) const {
    return static_cast<std::size_t>(offsets[a + 1] - offsets[a]);
  }
};

inline constexpr double kNormFloor = 1e-12;
// sqrt(x + kNormShift) floors row norms at kNormFloor
inline constexpr double kNormShift = kNormFloor * kNormFloor;

template <class Real>
RelatednessScores relatedness_scores_indexed(const NeighborhoodIndex& idx,
                                             const TensorT<Real>& ego, Readout readout) {
  const std::size_t d = ego.ncols;
  std::vector<double> inv_norm(ego.nrows);
  for (std::size_t r = 0; r < ego.nrows; ++r) {
    double n2 = 0;
    const Real* x = ego.row(r);
    for (std::size_t j = 0; j < d; ++j) n2 += static_cast<double>(x[j]) * x[j];
    inv_norm[r] = 1.0 / std::sqrt(n2 + kNormShift);
  }

  RelatednessScores res;
  res.k = idx.k;
  res.s.resize(idx.anchors.size());
  res.pre_sigmoid.resize(idx.anchors.size());
  res.isolated.resize(idx.anchors.size());
  for (std::size_t a = 0; a < idx.anchors.size(); ++a) {
    const NodeId v = idx.anchors[a];
    const std::size_t cnt = idx.pair_count(a);
    if (cnt == 0) {
      res.isolated[a] = 1;
      res.pre_sigmoid[a] = 0.0;
      res.s[a] = 0.5;
      continue;
    }
    res.isolated[a] = 0;
    const Real* hv = ego.row(static_cast<std::size_t>(v));
    double acc = 0;
    for (std::int64_t p = idx.offsets[a]; p < idx.offsets[a + 1]; ++p) {
      const NodeId w = idx.pairs[static_cast<std::size_t>(p)];
      const Real* hw = ego.row(static_cast<std::size_t>(w));
      double dot = 0;
      for (std::size_t j = 0; j < d; ++j) dot += static_cast<double>(hv[j]) * hw[j];
      acc += dot * inv_norm[static_cast<std::size_t>(v)] * inv_norm[static_cast<std::size_t>(w)];
    }
    const double pre = readout == Readout::Mean ? acc / static_cast<double>(cnt) : acc;
    res.pre_sigmoid[a] = pre;
    res.s[a] = 1.0 / (1.0 + std::exp(-pre));
  }
  return res;
}

// Scores for every node of the graph.
template <class Real>
RelatednessScores relatedness_scores(const InteractionGraph& graph, const TensorT<Real>& ego,
                                     int k, Readout readout = Readout::Mean) {
  if (k < 1) throw ConfigError("relatedness_scores: k must be >= 1");
  if (static_cast<NodeId>(ego.nrows) != graph.num_nodes())
    throw DimensionError("relatedness_scores: embedding row count != node count");
  std::vector<NodeId> anchors(static_cast<std::size_t>(graph.num_nodes()));
  for (std::size_t v = 0; v < anchors.size(); ++v) anchors[v] = static_cast<NodeId>(v);
  return relatedness_scores_indexed(NeighborhoodIndex::build(graph, anchors, k), ego, readout);
}

// Gumbel(0,1) noise from a uniform draw, with the draw clamped away from the
// endpoints before the double log.
double gumbel_noise_from_uniform(double mu);

// log s_v + Gumbel(0,1) per node; one uniform draw per node in node order.
std::vector<double> gumbel_perturb(const RelatednessScores& scores, RngStream& rng);

// Top-S by perturbed score, ties broken by smaller node id.
std::vector<NodeId> select_centric(const std::vector<double>& perturbed, std::size_t S);

// Perturb, drop isolated nodes, then top-S (capped by the number of
// non-isolated candidates). anchors[i] maps scores index -> node id.
std::vector<NodeId> select_centric_filtered(const RelatednessScores& scores,
                                            const std::vector<NodeId>& anchors, std::size_t S,
                                            RngStream& rng);

struct MaskPlan {
  std::vector<NodeId> centric;
  std::vector<Edge> masked_edges;      // E \ E', sorted
  InteractionGraph surviving;          // G'
  std::vector<NodeId> subgraph_nodes;  // union of all N_v^k, sorted
};

// Masks every edge whose endpoints both lie inside one centric node's k-hop
// neighborhood (the centric node included).
MaskPlan mask_edges(const InteractionGraph& graph, const std::vector<NodeId>& centric, int k);

// -sum s_v over the given score entries (value form).
double infomax_loss(const RelatednessScores& scores, const std::vector<std::size_t>& over);

}  // namespace autocf
