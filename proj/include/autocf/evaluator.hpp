#pragma once
#include <map>
#include <span>
#include <string>
#include <vector>

#include "autocf/graph.hpp"
#include "autocf/tensor.hpp"

namespace autocf {

struct GroupMetrics {
  std::string label;
  long users = 0;
  std::map<int, double> recall;
  std::map<int, double> ndcg;
};

struct NoisePoint {
  double ratio = 0;
  long added_edges = 0;
  std::map<int, double> recall;
  std::map<int, double> ndcg;
};

struct MetricsReport {
  std::vector<int> cutoffs;
  std::map<int, double> recall;
  std::map<int, double> ndcg;
  long users_evaluated = 0;
  std::string config_fingerprint;
  std::vector<GroupMetrics> sparsity;
  std::vector<NoisePoint> noise_series;
};

// Descending-score ranking of every item outside the user's training set;
// ties broken by smaller item id. train_items: sorted item-local ids.
std::vector<NodeId> all_rank(const Tensor& hhat, NodeId user,
                             std::span<const NodeId> train_items, NodeId num_users,
                             NodeId num_items);

// recall = |top-N  intersect test| / |test|; NDCG with binary gain
// 1/log2(pos+1) and the ideal DCG over min(|test|, N) positions.
std::pair<double, double> recall_ndcg(std::span<const NodeId> ranking,
                                      std::span<const NodeId> test_items, int cutoff);

struct EvalOptions {
  std::vector<int> cutoffs = {20, 40};
  std::string fingerprint;
  std::vector<std::int64_t> sparsity_bounds;  // empty = no per-group section
  int threads = 1;
};

// Mean per-user metrics over users with at least one test edge.
MetricsReport evaluate_embeddings(const Tensor& hhat, const DatasetSplit& split,
                                  const EvalOptions& opts);

// Same protocol against an arbitrary per-user ranking function; used for the
// popularity baseline.
struct PopularityBaseline {
  std::vector<NodeId> global_order;  // items by descending train count, ties by id

  std::vector<NodeId> rank_for(std::span<const NodeId> train_items) const;
};

PopularityBaseline popularity_baseline(const InteractionGraph& train);

MetricsReport evaluate_popularity(const InteractionGraph& train, const DatasetSplit& split,
                                  const EvalOptions& opts);

// Per-user item lists from an edge list, item-local sorted ids.
std::vector<std::vector<NodeId>> per_user_items(const std::vector<Edge>& edges, NodeId num_users);

}  // namespace autocf
