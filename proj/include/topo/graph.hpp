#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "topo/common.hpp"

namespace topo {

using Edge = std::pair<NodeId, NodeId>;

/// Immutable undirected simple graph in CSR form.
///
/// Neighbor lists are sorted ascending, symmetric, and free of self-loops
/// and duplicates. Features (num_nodes x dim) and labels are optional.
class Graph {
 public:
  Graph() = default;

  std::size_t num_nodes() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const noexcept { return adjacency_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(NodeId u, NodeId v) const;

  /// Edges (u, v) with u < v in lexicographic order.
  std::vector<Edge> edges() const;

  bool has_features() const noexcept { return features_.size() > 0; }
  const Eigen::MatrixXf& features() const noexcept { return features_; }
  bool has_labels() const noexcept { return !labels_.empty(); }
  const std::vector<int>& labels() const noexcept { return labels_; }
  int num_classes() const;

  void set_features(Eigen::MatrixXf features);
  void set_labels(std::vector<int> labels);

  /// Hash of the topology only (node count + edge set).
  std::uint64_t content_hash() const;

  friend Graph load_graph(std::span<const Edge> edges, std::size_t num_nodes);

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> adjacency_;
  Eigen::MatrixXf features_;
  std::vector<int> labels_;
};

/// Builds a graph from an edge list. Input edges are symmetrized; self-loops
/// and duplicates are dropped. Throws a data error on out-of-range ids.
Graph load_graph(std::span<const Edge> edges, std::size_t num_nodes);

/// Ego network: the induced subgraph on the r-hop ball around `ego`.
struct EgoNet {
  NodeId ego = 0;
  std::vector<NodeId> members;  // sorted parent ids
  std::vector<std::pair<std::uint32_t, std::uint32_t>> local_edges;  // local ids, a < b, sorted

  std::uint32_t local_id(NodeId parent) const;  // throws if not a member
  std::size_t size() const noexcept { return members.size(); }
};

EgoNet ego_net(const Graph& g, NodeId v, unsigned radius = 2);

/// Result of a hop-distance query.
struct HopDistance {
  enum class Kind { Exact, AtLeast, Unreachable };
  Kind kind = Kind::Exact;
  std::uint32_t value = 0;  // exact distance, or the lower bound for AtLeast

  static HopDistance exact(std::uint32_t v) { return {Kind::Exact, v}; }
  static HopDistance at_least(std::uint32_t v) { return {Kind::AtLeast, v}; }
  static HopDistance unreachable() { return {Kind::Unreachable, 0}; }

  bool is_exact() const noexcept { return kind == Kind::Exact; }
  /// Lower bound usable for mining; Unreachable is treated as infinitely far.
  bool at_least_hops(std::uint32_t h) const noexcept {
    return kind == Kind::Unreachable || value >= h;
  }
  friend bool operator==(const HopDistance&, const HopDistance&) = default;
};

/// BFS distance truncated at `cap`. Beyond the cap returns AtLeast(cap + 1);
/// if the frontier dies out first, returns Unreachable.
HopDistance hop_distance(const Graph& g, NodeId u, NodeId v, std::uint32_t cap);

/// Unbounded BFS distance (exact mode).
HopDistance hop_distance_exact(const Graph& g, NodeId u, NodeId v);

/// Per-node BFS distances from `source`; unreachable nodes get UINT32_MAX.
/// Exploration stops after depth `max_depth`.
std::vector<std::uint32_t> bfs_distances(const Graph& g, NodeId source,
                                         std::uint32_t max_depth = UINT32_MAX);

/// Fraction of edges whose endpoints share a label.
double homophily_index(const Graph& g);

/// Connected-component id per node, numbered in order of the smallest member.
std::vector<std::uint32_t> connected_components(const Graph& g);

/// Largest connected component, relabelled in increasing original id order.
/// `kept` receives the original id of every retained node.
Graph largest_connected_component(const Graph& g, std::vector<NodeId>* kept = nullptr);

}  // namespace topo
