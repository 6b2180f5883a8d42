#pragma once
#include <cstdint>
#include <vector>

#include "autocf/graph.hpp"
#include "autocf/tape.hpp"
#include "autocf/tensor.hpp"

namespace autocf {

// Degree-normalized propagation weights for a surviving graph G'. Directed
// edge arrays are grouped by destination so both the value and tape paths can
// run a single gather/scatter sweep. Coefficients must be rebuilt whenever
// the mask plan changes.
struct NormalizedAdjacency {
  std::int64_t num_nodes = 0;
  std::vector<std::int64_t> offsets;  // per destination node, size N+1
  std::vector<NodeId> src;            // source node per directed edge
  std::vector<NodeId> dst;            // destination node per directed edge
  std::vector<double> coef;           // 1/sqrt(deg(v) deg(v')) per directed edge
  std::vector<double> self_coef;      // 1/deg(v), or 1 for isolated nodes
};

NormalizedAdjacency normalized_weights(const InteractionGraph& surviving);

// One lightweight graph-convolution sweep: self term plus degree-weighted
// neighbor sum, no nonlinearity, no learned transform.
template <class Real>
typename TapeT<Real>::Id propagate(TapeT<Real>& tape, typename TapeT<Real>::Id h,
                                   const NormalizedAdjacency& adj) {
  if (static_cast<std::int64_t>(tape.value(h).nrows) != adj.num_nodes)
    throw DimensionError("propagate: embedding rows != node count");

  TensorT<Real> self_c(static_cast<std::size_t>(adj.num_nodes), 1);
  for (std::size_t v = 0; v < self_c.size(); ++v)
    self_c.v[v] = static_cast<Real>(adj.self_coef[v]);
  auto out = tape.row_scale(h, tape.constant(std::move(self_c)));

  if (!adj.src.empty()) {
    TensorT<Real> edge_c(adj.src.size(), 1);
    for (std::size_t e = 0; e < adj.src.size(); ++e) edge_c.v[e] = static_cast<Real>(adj.coef[e]);
    std::vector<std::int64_t> srcs(adj.src.begin(), adj.src.end());
    std::vector<std::int64_t> dsts(adj.dst.begin(), adj.dst.end());
    auto gathered = tape.gather_rows(h, make_index(std::move(srcs)));
    auto scaled = tape.row_scale(gathered, tape.constant(std::move(edge_c)));
    auto agg = tape.segment_sum(scaled, make_index(std::move(dsts)),
                                static_cast<std::size_t>(adj.num_nodes));
    out = tape.add(out, agg);
  }
  return out;
}

// L propagation sweeps; the ego layer is re-added at the final layer
// (self-propagation residual). Returns all layers h^0..h^L.
template <class Real>
std::vector<typename TapeT<Real>::Id> encode(TapeT<Real>& tape, typename TapeT<Real>::Id h0,
                                             const NormalizedAdjacency& adj, int layers) {
  if (layers < 1) throw ConfigError("encode: layer count must be >= 1");
  std::vector<typename TapeT<Real>::Id> out{h0};
  for (int l = 1; l <= layers; ++l) {
    auto next = propagate(tape, out.back(), adj);
    if (l == layers) next = tape.add(next, h0);
    out.push_back(next);
  }
  return out;
}

// Value-only conveniences for tests and inference plumbing.
template <class Real>
TensorT<Real> propagate_values(const TensorT<Real>& h, const NormalizedAdjacency& adj) {
  TapeT<Real> tape(false);
  return tape.value(propagate(tape, tape.constant(h), adj));
}

template <class Real>
std::vector<TensorT<Real>> encode_values(const TensorT<Real>& h0, const NormalizedAdjacency& adj,
                                         int layers) {
  TapeT<Real> tape(false);
  auto ids = encode(tape, tape.constant(h0), adj, layers);
  std::vector<TensorT<Real>> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(tape.value(id));
  return out;
}

}  // namespace autocf
