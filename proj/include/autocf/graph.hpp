#pragma once
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "autocf/errors.hpp"

namespace autocf {

using NodeId = std::int32_t;

// An observed user-item interaction. `u` is a user index in [0, num_users),
// `i` an item index in [0, num_items).
struct Edge {
  NodeId u = 0;
  NodeId i = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Csr {
  std::vector<std::int64_t> offsets;  // size rows+1
  std::vector<NodeId> neighbors;      // global node ids

  std::span<const NodeId> row(NodeId r) const {
    return {neighbors.data() + offsets[r], neighbors.data() + offsets[r + 1]};
  }
  std::size_t degree(NodeId r) const {
    return static_cast<std::size_t>(offsets[r + 1] - offsets[r]);
  }
};

// Bipartite interaction graph over a shared node-id space: users occupy
// [0, num_users), items occupy [num_users, num_users + num_items).
// Immutable after construction; adjacency rows are sorted and duplicate-free,
// and the user->item / item->user indexes are exact transposes of each other.
class InteractionGraph {
 public:
  InteractionGraph() = default;

  // Validates ranges, sorts, and collapses duplicate pairs to a single edge.
  static InteractionGraph from_edges(NodeId num_users, NodeId num_items,
                                     std::vector<Edge> edges);

  NodeId num_users() const { return num_users_; }
  NodeId num_items() const { return num_items_; }
  NodeId num_nodes() const { return num_users_ + num_items_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  NodeId item_node(NodeId item) const { return num_users_ + item; }
  bool is_user(NodeId node) const { return node < num_users_; }
  NodeId item_of(NodeId node) const { return node - num_users_; }

  const Csr& user_items() const { return user_items_; }
  const Csr& item_users() const { return item_users_; }

  std::span<const NodeId> neighbors(NodeId node) const {
    check_node(node);
    return is_user(node) ? user_items_.row(node) : item_users_.row(item_of(node));
  }
  std::size_t degree(NodeId node) const { return neighbors(node).size(); }

  bool has_edge(NodeId u, NodeId i) const;

  // Structural self-check used by tests: dual-index transpose property,
  // sortedness, degree bookkeeping.
  void validate() const;

 private:
  void check_node(NodeId node) const {
    if (node < 0 || node >= num_nodes()) throw IndexError("node id out of range");
  }

  NodeId num_users_ = 0;
  NodeId num_items_ = 0;
  std::vector<Edge> edges_;
  Csr user_items_;
  Csr item_users_;
};

struct LoadResult {
  InteractionGraph graph;
  std::vector<std::string> user_labels;  // dense id -> original token
  std::vector<std::string> item_labels;
};

// Reads UTF-8 TSV interactions, one `user<TAB>item[<TAB>ignored]` per line.
// Tokens are remapped to dense ids in first-appearance order; duplicate pairs
// collapse to one edge. Throws ParseError (with line number) or
// EmptyDatasetError.
LoadResult load_interactions(const std::string& path);

struct DatasetSplit {
  InteractionGraph train;
  std::vector<Edge> validation;
  std::vector<Edge> test;
  std::uint64_t seed = 0;
  double ratios[3] = {0, 0, 0};
};

// Per-user stratified split. Every user with at least one interaction keeps at
// least one training edge; per-user counts follow the ratios by largest
// remainder (ties resolved train, then validation, then test). Deterministic
// under `seed`.
DatasetSplit split_dataset(const InteractionGraph& graph, double train_ratio,
                           double val_ratio, double test_ratio, std::uint64_t seed);

struct NodeSet {
  std::vector<NodeId> members;  // sorted, includes the centric node
  NodeId centric = 0;
  int hops = 0;

  bool contains(NodeId v) const;
};

// All nodes within bipartite BFS distance <= k of v, v included.
NodeSet k_hop_neighborhood(const InteractionGraph& graph, NodeId v, int k);

struct NoiseResult {
  InteractionGraph graph;
  std::vector<Edge> added;  // synthetic edges, sorted
};

// Adds ceil(ratio * |E|) uniformly random non-existing edges. Original edges
// are preserved; the added set is returned for audit.
NoiseResult inject_noise(const InteractionGraph& graph, double ratio, std::uint64_t seed);

struct SparsityGroups {
  std::vector<std::int64_t> bounds;          // ascending cut list
  std::vector<std::vector<NodeId>> groups;   // one per interval + overflow
  std::string label(std::size_t g) const;
};

// Buckets users by training degree into [b_i, b_{i+1}) intervals plus an
// overflow group for degrees >= bounds.back().
SparsityGroups sparsity_groups(const InteractionGraph& train,
                               const std::vector<std::int64_t>& bounds);

}  // namespace autocf
