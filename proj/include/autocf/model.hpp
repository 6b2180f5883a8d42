#pragma once
#include <cmath>
#include <vector>

#include "autocf/adam.hpp"
#include "autocf/config.hpp"
#include "autocf/decoder.hpp"
#include "autocf/encoder.hpp"
#include "autocf/graph.hpp"
#include "autocf/tape.hpp"

namespace autocf {

// Trainable state: ego embeddings for every user/item node plus the per-head
// attention projections, with the optimizer moments alongside.
template <class Real>
struct ModelStateT {
  int dim = 0;
  ParameterT<Real> ego;  // (num_nodes, dim)
  std::vector<AttentionHeadT<Real>> heads;
  AdamStateT<Real> opt;
  long step = 0;

  static ModelStateT init(const TrainConfig& cfg, NodeId num_nodes, std::uint64_t seed) {
    ModelStateT m;
    m.dim = cfg.dim;
    RngStream ego_rng(seed, "init/ego");
    const double bound = std::sqrt(6.0 / (2.0 * cfg.dim));
    TensorT<Real> e(static_cast<std::size_t>(num_nodes), static_cast<std::size_t>(cfg.dim));
    for (auto& x : e.v) x = static_cast<Real>(ego_rng.uniform(-bound, bound));
    m.ego = ParameterT<Real>("ego", std::move(e));
    if (cfg.variant != Variant::NoGSA) {
      RngStream attn_rng(seed, "init/attn");
      m.heads = init_attention_heads<Real>(cfg.dim, cfg.heads, attn_rng);
    }
    m.opt.lr = cfg.lr;
    auto ps = m.parameters();
    m.opt.register_params(std::span<ParameterT<Real>* const>(ps.data(), ps.size()));
    return m;
  }

  std::vector<ParameterT<Real>*> parameters() {
    std::vector<ParameterT<Real>*> ps{&ego};
    for (auto& h : heads) {
      ps.push_back(&h.wq);
      ps.push_back(&h.wk);
      ps.push_back(&h.wv);
    }
    return ps;
  }
};

using ModelState = ModelStateT<double>;

// Tape ids of one full forward pass, kept alive on the tape for backward.
template <class Real>
struct ForwardTraceT {
  typename TapeT<Real>::Id ego_leaf = -1;
  std::vector<typename TapeT<Real>::Id> layers;  // h^0 .. h^L
  typename TapeT<Real>::Id decoder_out = -1;
  typename TapeT<Real>::Id hhat = -1;
};

// Encoder sweep over the surviving graph, decoder sweep over the attention
// graph (or one extra propagation for the -GSA variant), then the layer sum.
template <class Real>
ForwardTraceT<Real> model_forward(TapeT<Real>& tape, ModelStateT<Real>& model,
                                  const NormalizedAdjacency& adj, const AttentionGraph* ag,
                                  int layers, Variant variant) {
  ForwardTraceT<Real> tr;
  tr.ego_leaf = tape.leaf(model.ego);
  tr.layers = encode(tape, tr.ego_leaf, adj, layers);
  if (variant == Variant::NoGSA) {
    tr.decoder_out = propagate(tape, tr.layers.back(), adj);
  } else {
    if (ag == nullptr) throw ConfigError("model_forward: attention graph required");
    tr.decoder_out = attention_layer(tape, tr.layers.back(), *ag, model.heads);
  }
  tr.hhat = final_embeddings(tape, tr.layers, tr.decoder_out);
  return tr;
}

// Deterministic inference: propagate over the unmasked graph and decode over
// its own edges. Returns h-hat for every node.
template <class Real>
TensorT<Real> inference_embeddings(ModelStateT<Real>& model, const InteractionGraph& graph,
                                   int layers, Variant variant) {
  TapeT<Real> tape(false);
  NormalizedAdjacency adj = normalized_weights(graph);
  if (variant == Variant::NoGSA) {
    auto tr = model_forward(tape, model, adj, nullptr, layers, variant);
    return tape.value(tr.hhat);
  }
  AttentionGraph ag = full_attention_graph(graph);
  auto tr = model_forward(tape, model, adj, &ag, layers, variant);
  return tape.value(tr.hhat);
}

}  // namespace autocf
