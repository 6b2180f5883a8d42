#include "autocf/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace autocf {

std::vector<std::vector<NodeId>> per_user_items(const std::vector<Edge>& edges, NodeId num_users) {
  std::vector<std::vector<NodeId>> out(static_cast<std::size_t>(num_users));
  for (const Edge& e : edges) out[static_cast<std::size_t>(e.u)].push_back(e.i);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

std::vector<NodeId> all_rank(const Tensor& hhat, NodeId user,
                             std::span<const NodeId> train_items, NodeId num_users,
                             NodeId num_items) {
  const std::size_t d = hhat.ncols;
  const double* hu = hhat.row(static_cast<std::size_t>(user));

  std::vector<std::pair<double, NodeId>> scored;
  scored.reserve(static_cast<std::size_t>(num_items) - train_items.size());
  for (NodeId i = 0; i < num_items; ++i) {
    if (std::binary_search(train_items.begin(), train_items.end(), i)) continue;
    const double* hi = hhat.row(static_cast<std::size_t>(num_users + i));
    double s = 0;
    for (std::size_t j = 0; j < d; ++j) s += hu[j] * hi[j];
    scored.emplace_back(s, i);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<NodeId> out;
  out.reserve(scored.size());
  for (const auto& [_, i] : scored) out.push_back(i);
  return out;
}

std::pair<double, double> recall_ndcg(std::span<const NodeId> ranking,
                                      std::span<const NodeId> test_items, int cutoff) {
  if (cutoff < 1) throw ConfigError("recall_ndcg: cutoff must be >= 1");
  if (test_items.empty()) throw ConfigError("recall_ndcg: empty test set");
  const std::size_t n = std::min(static_cast<std::size_t>(cutoff), ranking.size());
  std::size_t hits = 0;
  double dcg = 0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    if (std::binary_search(test_items.begin(), test_items.end(), ranking[pos])) {
      ++hits;
      dcg += 1.0 / std::log2(static_cast<double>(pos) + 2.0);
    }
  }
  const std::size_t ideal = std::min(static_cast<std::size_t>(cutoff), test_items.size());
  double idcg = 0;
  for (std::size_t pos = 0; pos < ideal; ++pos)
    idcg += 1.0 / std::log2(static_cast<double>(pos) + 2.0);
  return {static_cast<double>(hits) / static_cast<double>(test_items.size()), dcg / idcg};
}

namespace {

struct UserMetrics {
  bool scored = false;
  std::map<int, double> recall;
  std::map<int, double> ndcg;
};

// Rankings are produced per user independently and reduced in user order, so
// the result does not depend on the thread count.
template <class RankFn>
MetricsReport aggregate(const DatasetSplit& split, const EvalOptions& opts, RankFn&& rank_user) {
  const NodeId num_users = split.train.num_users();
  auto train_items = per_user_items(split.train.edges(), num_users);
  auto test_items = per_user_items(split.test, num_users);

  std::vector<UserMetrics> per_user(static_cast<std::size_t>(num_users));
  auto work = [&](NodeId u0, NodeId u1) {
    for (NodeId u = u0; u < u1; ++u) {
      const auto& test = test_items[static_cast<std::size_t>(u)];
      if (test.empty()) continue;
      std::vector<NodeId> ranking = rank_user(u, train_items[static_cast<std::size_t>(u)]);
      auto& um = per_user[static_cast<std::size_t>(u)];
      um.scored = true;
      for (int c : opts.cutoffs) {
        auto [r, n] = recall_ndcg(ranking, test, c);
        um.recall[c] = r;
        um.ndcg[c] = n;
      }
    }
  };
  const int threads = std::max(1, opts.threads);
  if (threads == 1 || num_users < 64) {
    work(0, num_users);
  } else {
    std::vector<std::thread> pool;
    const NodeId chunk = (num_users + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      NodeId lo = t * chunk;
      NodeId hi = std::min<NodeId>(num_users, lo + chunk);
      if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  MetricsReport rep;
  rep.cutoffs = opts.cutoffs;
  rep.config_fingerprint = opts.fingerprint;
  for (int c : opts.cutoffs) {
    rep.recall[c] = 0;
    rep.ndcg[c] = 0;
  }
  for (const auto& um : per_user) {
    if (!um.scored) continue;
    ++rep.users_evaluated;
    for (int c : opts.cutoffs) {
      rep.recall[c] += um.recall.at(c);
      rep.ndcg[c] += um.ndcg.at(c);
    }
  }
  if (rep.users_evaluated > 0)
    for (int c : opts.cutoffs) {
      rep.recall[c] /= static_cast<double>(rep.users_evaluated);
      rep.ndcg[c] /= static_cast<double>(rep.users_evaluated);
    }

  if (!opts.sparsity_bounds.empty()) {
    SparsityGroups sg = sparsity_groups(split.train, opts.sparsity_bounds);
    for (std::size_t g = 0; g < sg.groups.size(); ++g) {
      GroupMetrics gm;
      gm.label = sg.label(g);
      for (int c : opts.cutoffs) {
        gm.recall[c] = 0;
        gm.ndcg[c] = 0;
      }
      for (NodeId u : sg.groups[g]) {
        const auto& um = per_user[static_cast<std::size_t>(u)];
        if (!um.scored) continue;
        ++gm.users;
        for (int c : opts.cutoffs) {
          gm.recall[c] += um.recall.at(c);
          gm.ndcg[c] += um.ndcg.at(c);
        }
      }
      if (gm.users > 0)
        for (int c : opts.cutoffs) {
          gm.recall[c] /= static_cast<double>(gm.users);
          gm.ndcg[c] /= static_cast<double>(gm.users);
        }
      rep.sparsity.push_back(std::move(gm));
    }
  }
  return rep;
}

}  // namespace

MetricsReport evaluate_embeddings(const Tensor& hhat, const DatasetSplit& split,
                                  const EvalOptions& opts) {
  const NodeId num_users = split.train.num_users();
  const NodeId num_items = split.train.num_items();
  if (static_cast<NodeId>(hhat.nrows) != num_users + num_items)
    throw DimensionError("evaluate_embeddings: embedding rows != node count");
  return aggregate(split, opts, [&](NodeId u, const std::vector<NodeId>& train) {
    return all_rank(hhat, u, train, num_users, num_items);
  });
}

PopularityBaseline popularity_baseline(const InteractionGraph& train) {
  std::vector<std::pair<std::int64_t, NodeId>> counted;
  counted.reserve(static_cast<std::size_t>(train.num_items()));
  for (NodeId i = 0; i < train.num_items(); ++i)
    counted.emplace_back(static_cast<std::int64_t>(train.item_users().degree(i)), i);
  std::sort(counted.begin(), counted.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  PopularityBaseline pb;
  pb.global_order.reserve(counted.size());
  for (const auto& [_, i] : counted) pb.global_order.push_back(i);
  return pb;
}

std::vector<NodeId> PopularityBaseline::rank_for(std::span<const NodeId> train_items) const {
  std::vector<NodeId> out;
  out.reserve(global_order.size() - train_items.size());
  for (NodeId i : global_order)
    if (!std::binary_search(train_items.begin(), train_items.end(), i)) out.push_back(i);
  return out;
}

MetricsReport evaluate_popularity(const InteractionGraph& train, const DatasetSplit& split,
                                  const EvalOptions& opts) {
  PopularityBaseline pb = popularity_baseline(train);
  return aggregate(split, opts, [&](NodeId, const std::vector<NodeId>& train_items) {
    return pb.rank_for(train_items);
  });
}

}  // namespace autocf
