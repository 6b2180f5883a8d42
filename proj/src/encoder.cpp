#include "autocf/encoder.hpp"

#include <cmath>

namespace autocf {

NormalizedAdjacency normalized_weights(const InteractionGraph& surviving) {
  NormalizedAdjacency adj;
  adj.num_nodes = surviving.num_nodes();
  const std::size_t n = static_cast<std::size_t>(adj.num_nodes);
  const std::size_t m = 2 * surviving.num_edges();

  adj.offsets.assign(n + 1, 0);
  adj.self_coef.resize(n);
  for (NodeId v = 0; v < adj.num_nodes; ++v) {
    const std::size_t deg = surviving.degree(v);
    adj.offsets[static_cast<std::size_t>(v) + 1] = static_cast<std::int64_t>(deg);
    adj.self_coef[static_cast<std::size_t>(v)] = deg == 0 ? 1.0 : 1.0 / static_cast<double>(deg);
  }
  for (std::size_t v = 1; v <= n; ++v) adj.offsets[v] += adj.offsets[v - 1];

  adj.src.resize(m);
  adj.dst.resize(m);
  adj.coef.resize(m);
  std::vector<std::int64_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
  for (const Edge& e : surviving.edges()) {
    const NodeId un = e.u;
    const NodeId in = surviving.item_node(e.i);
    const double c = 1.0 / std::sqrt(static_cast<double>(surviving.degree(un)) *
                                     static_cast<double>(surviving.degree(in)));
    std::int64_t pu = cursor[static_cast<std::size_t>(un)]++;
    adj.src[static_cast<std::size_t>(pu)] = in;
    adj.dst[static_cast<std::size_t>(pu)] = un;
    adj.coef[static_cast<std::size_t>(pu)] = c;
    std::int64_t pi = cursor[static_cast<std::size_t>(in)]++;
    adj.src[static_cast<std::size_t>(pi)] = un;
    adj.dst[static_cast<std::size_t>(pi)] = in;
    adj.coef[static_cast<std::size_t>(pi)] = c;
  }
  return adj;
}

}  // namespace autocf
