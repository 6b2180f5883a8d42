#include "autocf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <unordered_map>

#include "autocf/rng.hpp"

namespace autocf {

namespace {

Csr build_csr(NodeId rows, const std::vector<std::pair<NodeId, NodeId>>& pairs) {
  // pairs are (row, neighbor), already sorted by (row, neighbor)
  Csr csr;
  csr.offsets.assign(static_cast<std::size_t>(rows) + 1, 0);
  for (const auto& [r, _] : pairs) ++csr.offsets[static_cast<std::size_t>(r) + 1];
  for (std::size_t r = 1; r < csr.offsets.size(); ++r) csr.offsets[r] += csr.offsets[r - 1];
  csr.neighbors.reserve(pairs.size());
  for (const auto& [_, n] : pairs) csr.neighbors.push_back(n);
  return csr;
}

}  // namespace

InteractionGraph InteractionGraph::from_edges(NodeId num_users, NodeId num_items,
                                              std::vector<Edge> edges) {
  if (num_users < 0 || num_items < 0) throw ConfigError("negative node counts");
  for (const Edge& e : edges) {
    if (e.u < 0 || e.u >= num_users) throw IndexError("edge user id out of range");
    if (e.i < 0 || e.i >= num_items) throw IndexError("edge item id out of range");
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  InteractionGraph g;
  g.num_users_ = num_users;
  g.num_items_ = num_items;
  g.edges_ = std::move(edges);

  std::vector<std::pair<NodeId, NodeId>> ui;
  std::vector<std::pair<NodeId, NodeId>> iu;
  ui.reserve(g.edges_.size());
  iu.reserve(g.edges_.size());
  for (const Edge& e : g.edges_) {
    ui.emplace_back(e.u, g.item_node(e.i));
    iu.emplace_back(e.i, e.u);
  }
  // ui is already sorted (edges_ sorted by (u, i)); iu needs a sort.
  std::sort(iu.begin(), iu.end());
  g.user_items_ = build_csr(num_users, ui);
  g.item_users_ = build_csr(num_items, iu);
  return g;
}

bool InteractionGraph::has_edge(NodeId u, NodeId i) const {
  if (u < 0 || u >= num_users_ || i < 0 || i >= num_items_) return false;
  auto row = user_items_.row(u);
  return std::binary_search(row.begin(), row.end(), item_node(i));
}

void InteractionGraph::validate() const {
  if (user_items_.neighbors.size() != edges_.size() ||
      item_users_.neighbors.size() != edges_.size())
    throw Error("graph invariant: adjacency size mismatch");
  for (std::size_t k = 1; k < edges_.size(); ++k)
    if (!(edges_[k - 1] < edges_[k])) throw Error("graph invariant: edges not sorted/unique");
  for (NodeId u = 0; u < num_users_; ++u) {
    auto row = user_items_.row(u);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0 && row[j - 1] >= row[j]) throw Error("graph invariant: user row not sorted");
      NodeId item = item_of(row[j]);
      auto back = item_users_.row(item);
      if (!std::binary_search(back.begin(), back.end(), u))
        throw Error("graph invariant: indexes are not transposes");
    }
  }
  for (NodeId i = 0; i < num_items_; ++i) {
    auto row = item_users_.row(i);
    for (NodeId u : row)
      if (!has_edge(u, i)) throw Error("graph invariant: indexes are not transposes");
  }
}

LoadResult load_interactions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open interaction file: " + path);

  LoadResult res;
  std::unordered_map<std::string, NodeId> user_ids;
  std::unordered_map<std::string, NodeId> item_ids;
  std::vector<Edge> edges;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab1 = line.find('\t');
    if (tab1 == std::string::npos || tab1 == 0)
      throw ParseError("line " + std::to_string(lineno) + ": expected user<TAB>item");
    std::size_t tab2 = line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) tab2 = line.size();
    if (tab2 == tab1 + 1)
      throw ParseError("line " + std::to_string(lineno) + ": empty item field");
    const std::string utok = line.substr(0, tab1);
    const std::string itok = line.substr(tab1 + 1, tab2 - tab1 - 1);

    auto [uit, unew] = user_ids.try_emplace(utok, static_cast<NodeId>(res.user_labels.size()));
    if (unew) res.user_labels.push_back(utok);
    auto [iit, inew] = item_ids.try_emplace(itok, static_cast<NodeId>(res.item_labels.size()));
    if (inew) res.item_labels.push_back(itok);
    edges.push_back({uit->second, iit->second});
  }
  if (edges.empty()) throw EmptyDatasetError("no interactions found in " + path);

  res.graph = InteractionGraph::from_edges(static_cast<NodeId>(res.user_labels.size()),
                                           static_cast<NodeId>(res.item_labels.size()),
                                           std::move(edges));
  return res;
}

DatasetSplit split_dataset(const InteractionGraph& graph, double train_ratio,
                           double val_ratio, double test_ratio, std::uint64_t seed) {
  const double sum = train_ratio + val_ratio + test_ratio;
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
  if (train_ratio < 0 || val_ratio < 0 || test_ratio < 0)
    throw ConfigError("split ratios must be non-negative");

  RngStream rng(seed, "split");
  std::vector<Edge> train_edges, val_edges, test_edges;
  train_edges.reserve(graph.num_edges());

  for (NodeId u = 0; u < graph.num_users(); ++u) {
    auto row = graph.user_items().row(u);
    const std::size_t n = row.size();
    if (n == 0) continue;
    std::vector<NodeId> items(row.begin(), row.end());
    rng.shuffle(items);

    const double targets[3] = {train_ratio * n, val_ratio * n, test_ratio * n};
    std::size_t counts[3];
    double rema[3];
    std::size_t assigned = 0;
    for (int j = 0; j < 3; ++j) {
      counts[j] = static_cast<std::size_t>(std::floor(targets[j]));
      rema[j] = targets[j] - static_cast<double>(counts[j]);
      assigned += counts[j];
    }
    while (assigned < n) {
      int best = 0;
      for (int j = 1; j < 3; ++j)
        if (rema[j] > rema[best]) best = j;
      ++counts[best];
      rema[best] = -1;
      ++assigned;
    }
    // every interacting user keeps at least one training edge
    if (counts[0] == 0) {
      if (counts[2] > 0)
        --counts[2];
      else
        --counts[1];
      ++counts[0];
    }

    std::size_t pos = 0;
    for (std::size_t j = 0; j < counts[0]; ++j)
      train_edges.push_back({u, graph.item_of(items[pos++])});
    for (std::size_t j = 0; j < counts[1]; ++j)
      val_edges.push_back({u, graph.item_of(items[pos++])});
    for (std::size_t j = 0; j < counts[2]; ++j)
      test_edges.push_back({u, graph.item_of(items[pos++])});
  }

  std::sort(val_edges.begin(), val_edges.end());
  std::sort(test_edges.begin(), test_edges.end());

  DatasetSplit split;
  split.train = InteractionGraph::from_edges(graph.num_users(), graph.num_items(),
                                             std::move(train_edges));
  split.validation = std::move(val_edges);
  split.test = std::move(test_edges);
  split.seed = seed;
  split.ratios[0] = train_ratio;
  split.ratios[1] = val_ratio;
  split.ratios[2] = test_ratio;
  return split;
}

bool NodeSet::contains(NodeId v) const {
  return std::binary_search(members.begin(), members.end(), v);
}

NodeSet k_hop_neighborhood(const InteractionGraph& graph, NodeId v, int k) {
  if (v < 0 || v >= graph.num_nodes()) throw IndexError("k_hop_neighborhood: node out of range");
  if (k < 1) throw ConfigError("k_hop_neighborhood: k must be >= 1");

  NodeSet set;
  set.centric = v;
  set.hops = k;

  std::vector<int> dist(static_cast<std::size_t>(graph.num_nodes()), -1);
  std::deque<NodeId> queue;
  dist[static_cast<std::size_t>(v)] = 0;
  queue.push_back(v);
  set.members.push_back(v);
  while (!queue.empty()) {
    NodeId cur = queue.front();
    queue.pop_front();
    const int d = dist[static_cast<std::size_t>(cur)];
    if (d == k) continue;
    for (NodeId nb : graph.neighbors(cur)) {
      if (dist[static_cast<std::size_t>(nb)] >= 0) continue;
      dist[static_cast<std::size_t>(nb)] = d + 1;
      set.members.push_back(nb);
      queue.push_back(nb);
    }
  }
  std::sort(set.members.begin(), set.members.end());
  return set;
}

NoiseResult inject_noise(const InteractionGraph& graph, double ratio, std::uint64_t seed) {
  if (ratio < 0 || ratio > 1) throw ConfigError("inject_noise: ratio must lie in [0, 1]");
  const std::size_t need =
      static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(graph.num_edges())));

  NoiseResult res;
  if (need == 0) {
    res.graph = graph;
    return res;
  }
  const std::uint64_t cells = static_cast<std::uint64_t>(graph.num_users()) *
                              static_cast<std::uint64_t>(graph.num_items());
  if (graph.num_edges() + need > cells)
    throw CapacityError("inject_noise: graph too dense to host requested noise");

  RngStream rng(seed, "noise");
  std::vector<Edge> added;
  added.reserve(need);
  auto exists = [&](const Edge& e) {
    return graph.has_edge(e.u, e.i) || std::find(added.begin(), added.end(), e) != added.end();
  };

  const std::uint64_t free_cells = cells - graph.num_edges();
  if (free_cells < 4 * static_cast<std::uint64_t>(need) && cells <= (1u << 22)) {
    // dense case: enumerate the free cells and draw without replacement
    std::vector<Edge> pool;
    pool.reserve(static_cast<std::size_t>(free_cells));
    for (NodeId u = 0; u < graph.num_users(); ++u)
      for (NodeId i = 0; i < graph.num_items(); ++i)
        if (!graph.has_edge(u, i)) pool.push_back({u, i});
    rng.shuffle(pool);
    added.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(need));
  } else {
    while (added.size() < need) {
      Edge e{static_cast<NodeId>(rng.uniform_index(static_cast<std::uint64_t>(graph.num_users()))),
             static_cast<NodeId>(rng.uniform_index(static_cast<std::uint64_t>(graph.num_items())))};
      if (!exists(e)) added.push_back(e);
    }
  }
  std::sort(added.begin(), added.end());

  std::vector<Edge> all = graph.edges();
  all.insert(all.end(), added.begin(), added.end());
  res.graph = InteractionGraph::from_edges(graph.num_users(), graph.num_items(), std::move(all));
  res.added = std::move(added);
  return res;
}

std::string SparsityGroups::label(std::size_t g) const {
  char buf[64];
  if (g + 1 < bounds.size())
    std::snprintf(buf, sizeof(buf), "[%lld,%lld)", static_cast<long long>(bounds[g]),
                  static_cast<long long>(bounds[g + 1]));
  else
    std::snprintf(buf, sizeof(buf), "[%lld,inf)", static_cast<long long>(bounds.back()));
  return buf;
}

SparsityGroups sparsity_groups(const InteractionGraph& train,
                               const std::vector<std::int64_t>& bounds) {
  if (bounds.size() < 2) throw ConfigError("sparsity_groups: need at least two bounds");
  for (std::size_t j = 1; j < bounds.size(); ++j)
    if (bounds[j] <= bounds[j - 1]) throw ConfigError("sparsity_groups: bounds must be strictly ascending");

  SparsityGroups res;
  res.bounds = bounds;
  res.groups.assign(bounds.size(), {});
  for (NodeId u = 0; u < train.num_users(); ++u) {
    const std::int64_t deg = static_cast<std::int64_t>(train.user_items().degree(u));
    std::size_t g = 0;
    while (g + 1 < bounds.size() && deg >= bounds[g + 1]) ++g;
    res.groups[g].push_back(u);
  }
  return res;
}

}  // namespace autocf
