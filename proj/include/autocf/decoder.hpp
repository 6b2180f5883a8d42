#pragma once
#include <cmath>
#include <cstdint>
#include <vector>

#include "autocf/masking.hpp"
#include "autocf/rng.hpp"
#include "autocf/tape.hpp"

namespace autocf {

// Sparse attention graph for the decoder: the masked-subgraph nodes plus
// uniformly sampled extras form the active set, |E'| sampled node pairs join
// the surviving edges, and every pair is attended in both directions.
struct AttentionGraph {
  std::vector<NodeId> active;               // sorted V-bar union V-tilde
  std::vector<std::pair<NodeId, NodeId>> sampled;  // sampled pairs (a < b)
  double rho = 0;
  // directed incidence of E-tilde, grouped by destination
  std::int64_t num_nodes = 0;
  std::vector<std::int64_t> offsets;  // size N+1
  std::vector<NodeId> src;
  std::vector<NodeId> dst;
};

AttentionGraph sample_attention_graph(const MaskPlan& plan, double rho, RngStream& rng);

// Attention incidence over exactly the graph's own edges, no sampled pairs;
// used for deterministic mask-free inference.
AttentionGraph full_attention_graph(const InteractionGraph& graph);

// Per-head query/key/value projections, each (d/H, d).
template <class Real>
struct AttentionHeadT {
  ParameterT<Real> wq, wk, wv;
};

template <class Real>
std::vector<AttentionHeadT<Real>> init_attention_heads(int dim, int heads, RngStream& rng) {
  if (heads < 1 || dim % heads != 0)
    throw ConfigError("attention heads must divide the embedding dimension");
  const int dh = dim / heads;
  const double bound = std::sqrt(6.0 / (dim + dh));
  std::vector<AttentionHeadT<Real>> out;
  out.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    auto make = [&](const char* tag) {
      TensorT<Real> w(static_cast<std::size_t>(dh), static_cast<std::size_t>(dim));
      for (auto& x : w.v) x = static_cast<Real>(rng.uniform(-bound, bound));
      return ParameterT<Real>(std::string(tag) + std::to_string(h), std::move(w));
    };
    out.push_back({make("wq"), make("wk"), make("wv")});
  }
  return out;
}

// One masked multi-head self-attention sweep over the attention graph.
// Per-node softmax runs over that node's incident directed edges only; nodes
// with no incident edge contribute a zero row. Heads are concatenated back to
// the full dimension.
template <class Real>
typename TapeT<Real>::Id attention_layer(TapeT<Real>& tape, typename TapeT<Real>::Id h_in,
                                         const AttentionGraph& ag,
                                         std::vector<AttentionHeadT<Real>>& heads) {
  const auto& H = tape.value(h_in);
  if (static_cast<std::int64_t>(H.nrows) != ag.num_nodes)
    throw DimensionError("attention_layer: embedding rows != node count");
  if (heads.empty() || H.ncols % heads.size() != 0)
    throw DimensionError("attention_layer: head count must divide dimension");
  const std::size_t dh = H.ncols / heads.size();
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));

  const std::size_t n = static_cast<std::size_t>(ag.num_nodes);
  if (ag.src.empty()) {
    // no attention edges anywhere: decoder output is identically zero
    return tape.constant(TensorT<Real>(n, H.ncols));
  }

  auto src_idx = make_index(std::vector<std::int64_t>(ag.src.begin(), ag.src.end()));
  auto dst_idx = make_index(std::vector<std::int64_t>(ag.dst.begin(), ag.dst.end()));
  auto offs = make_index(std::vector<std::int64_t>(ag.offsets.begin(), ag.offsets.end()));

  std::vector<typename TapeT<Real>::Id> head_out;
  head_out.reserve(heads.size());
  for (auto& head : heads) {
    auto q = tape.matmul(h_in, tape.transpose(tape.leaf(head.wq)));  // (N, dh)
    auto k = tape.matmul(h_in, tape.transpose(tape.leaf(head.wk)));
    auto v = tape.matmul(h_in, tape.transpose(tape.leaf(head.wv)));
    auto scores = tape.scale(
        tape.dot_rows(tape.gather_rows(q, dst_idx), tape.gather_rows(k, src_idx)), inv_scale);
    auto weights = tape.segment_softmax(scores, offs);
    auto messages = tape.row_scale(tape.gather_rows(v, src_idx), weights);
    head_out.push_back(tape.segment_sum(messages, dst_idx, n));
  }
  return head_out.size() == 1 ? head_out[0] : tape.concat_cols(head_out);
}

// h-hat: sum of all encoder layers plus the decoder output.
template <class Real>
typename TapeT<Real>::Id final_embeddings(TapeT<Real>& tape,
                                          const std::vector<typename TapeT<Real>::Id>& layers,
                                          typename TapeT<Real>::Id decoder_out) {
  if (layers.empty()) throw DimensionError("final_embeddings: no layers");
  auto acc = layers[0];
  for (std::size_t l = 1; l < layers.size(); ++l) acc = tape.add(acc, layers[l]);
  return tape.add(acc, decoder_out);
}

template <class Real>
TensorT<Real> attention_layer_values(const TensorT<Real>& h_in, const AttentionGraph& ag,
                                     std::vector<AttentionHeadT<Real>>& heads) {
  TapeT<Real> tape(false);
  return tape.value(attention_layer(tape, tape.constant(h_in), ag, heads));
}

}  // namespace autocf
