#pragma once
#include <algorithm>
#include <vector>

#include "autocf/graph.hpp"
#include "autocf/masking.hpp"
#include "autocf/tape.hpp"

namespace autocf {

// Per-step loss components; total recomposes exactly as
// rec + lambda1 * (uniformity + infomax + recon) + lambda2 * weight_decay.
struct LossBreakdown {
  double rec = 0;
  double recon = 0;
  double uniformity = 0;
  double infomax = 0;
  double weight_decay = 0;
  double total = 0;
};

namespace detail {
template <class Real>
typename TapeT<Real>::Id neg_mean_dot(TapeT<Real>& tape, typename TapeT<Real>::Id hhat,
                                      const std::vector<Edge>& edges, NodeId num_users) {
  std::vector<std::int64_t> us, is;
  us.reserve(edges.size());
  is.reserve(edges.size());
  for (const Edge& e : edges) {
    us.push_back(e.u);
    is.push_back(static_cast<std::int64_t>(num_users) + e.i);
  }
  auto hu = tape.gather_rows(hhat, make_index(std::move(us)));
  auto hi = tape.gather_rows(hhat, make_index(std::move(is)));
  return tape.scale(tape.mean(tape.dot_rows(hu, hi)), -1.0);
}
}  // namespace detail

// Alignment term of the joint objective: mean over batch edges of
// -(h-hat_u . h-hat_i).
template <class Real>
typename TapeT<Real>::Id rec_loss(TapeT<Real>& tape, typename TapeT<Real>::Id hhat,
                                  const std::vector<Edge>& batch, NodeId num_users) {
  if (batch.empty()) throw ConfigError("rec_loss: batch is empty");
  return detail::neg_mean_dot(tape, hhat, batch, num_users);
}

// Reconstruction over the masked edges; an empty masked set contributes 0.
template <class Real>
typename TapeT<Real>::Id recon_loss(TapeT<Real>& tape, typename TapeT<Real>::Id hhat,
                                    const std::vector<Edge>& masked, NodeId num_users) {
  if (masked.empty()) return tape.constant_scalar(Real(0));
  return detail::neg_mean_dot(tape, hhat, masked, num_users);
}

// Log-sum-exp repulsion: for each batch anchor, log sum over all targets of
// exp(h-hat_a . h-hat_t / tau), mean-reduced over anchors; the three terms use
// (batch users x all items), (batch users x all users), (batch items x all
// items).
template <class Real>
typename TapeT<Real>::Id uniformity_loss(TapeT<Real>& tape, typename TapeT<Real>::Id hhat,
                                         const std::vector<NodeId>& batch_users,
                                         const std::vector<NodeId>& batch_items,
                                         NodeId num_users, NodeId num_items, double tau = 1.0) {
  if (batch_users.empty() || batch_items.empty())
    throw ConfigError("uniformity_loss: batch anchor sets are empty");

  std::vector<std::int64_t> all_users(static_cast<std::size_t>(num_users));
  for (std::size_t j = 0; j < all_users.size(); ++j) all_users[j] = static_cast<std::int64_t>(j);
  std::vector<std::int64_t> all_items(static_cast<std::size_t>(num_items));
  for (std::size_t j = 0; j < all_items.size(); ++j)
    all_items[j] = static_cast<std::int64_t>(num_users) + static_cast<std::int64_t>(j);

  auto users_t = tape.transpose(tape.gather_rows(hhat, make_index(std::move(all_users))));
  auto items_t = tape.transpose(tape.gather_rows(hhat, make_index(std::move(all_items))));
  auto bu = tape.gather_rows(
      hhat, make_index(std::vector<std::int64_t>(batch_users.begin(), batch_users.end())));
  auto bi = tape.gather_rows(
      hhat, make_index(std::vector<std::int64_t>(batch_items.begin(), batch_items.end())));

  auto term = [&](typename TapeT<Real>::Id anchors, typename TapeT<Real>::Id targets_t) {
    auto scores = tape.matmul(anchors, targets_t);
    if (tau != 1.0) scores = tape.scale(scores, 1.0 / tau);
    return tape.mean(tape.logsumexp_rows(scores));
  };
  auto ui = term(bu, items_t);
  auto uu = term(bu, users_t);
  auto ii = term(bi, items_t);
  return tape.add(tape.add(ui, uu), ii);
}

// Flattened k-hop membership lists for one anchor set, sliced out of a
// whole-graph NeighborhoodIndex so the per-step cost stays proportional to
// the batch.
struct InfomaxBatch {
  std::vector<NodeId> anchors;             // sorted unique node ids
  std::vector<std::int64_t> pair_member;   // flat member node ids
  std::vector<std::int64_t> pair_anchor;   // anchor position per pair entry
  std::vector<double> inv_count;           // 1/max(1, |N_v^k \ {v}|)
  std::size_t isolated = 0;

  static InfomaxBatch slice(const NeighborhoodIndex& full, std::vector<NodeId> nodes) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    InfomaxBatch b;
    b.anchors = std::move(nodes);
    b.inv_count.reserve(b.anchors.size());
    for (std::size_t a = 0; a < b.anchors.size(); ++a) {
      const std::size_t v = static_cast<std::size_t>(b.anchors[a]);
      const std::size_t cnt = full.pair_count(v);
      if (cnt == 0) ++b.isolated;
      b.inv_count.push_back(1.0 / static_cast<double>(std::max<std::size_t>(1, cnt)));
      for (std::int64_t p = full.offsets[v]; p < full.offsets[v + 1]; ++p) {
        b.pair_member.push_back(full.pairs[static_cast<std::size_t>(p)]);
        b.pair_anchor.push_back(static_cast<std::int64_t>(a));
      }
    }
    return b;
  }
};

// Differentiable -mean_v s_v over the anchors. Isolated anchors contribute
// the constant sigmoid(0) = 0.5 and no gradient, matching the value path.
template <class Real>
typename TapeT<Real>::Id infomax_term(TapeT<Real>& tape, typename TapeT<Real>::Id ego,
                                      const InfomaxBatch& batch, Readout readout) {
  if (batch.anchors.empty()) throw ConfigError("infomax_term: node set is empty");
  auto norms = tape.sqrt_shift(tape.dot_rows(ego, ego), kNormShift);
  auto unit = tape.row_scale(ego, tape.recip(norms));

  auto anchor_rows = tape.gather_rows(
      unit, make_index(std::vector<std::int64_t>(batch.anchors.begin(), batch.anchors.end())));
  auto gathered = tape.gather_rows(
      unit, make_index(std::vector<std::int64_t>(batch.pair_member)));
  auto sums = tape.segment_sum(gathered, make_index(std::vector<std::int64_t>(batch.pair_anchor)),
                               batch.anchors.size());
  if (readout == Readout::Mean) {
    TensorT<Real> inv(batch.anchors.size(), 1);
    for (std::size_t a = 0; a < batch.anchors.size(); ++a)
      inv.v[a] = static_cast<Real>(batch.inv_count[a]);
    sums = tape.row_scale(sums, tape.constant(std::move(inv)));
  }
  auto s = tape.sigmoid(tape.dot_rows(anchor_rows, sums));
  return tape.scale(tape.mean(s), -1.0);
}

// lambda2 * ||Theta||_F^2 building block: sum of squares of one parameter.
template <class Real>
typename TapeT<Real>::Id squared_norm(TapeT<Real>& tape, typename TapeT<Real>::Id leaf) {
  return tape.sum(tape.mul(leaf, leaf));
}

}  // namespace autocf
