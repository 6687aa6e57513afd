#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "topo/graph.hpp"

namespace topo {

/// Lazy random-walk measure of a node: mass alpha on the node itself and
/// (1 - alpha) / deg spread over its neighbors.
struct NodeMeasure {
  std::vector<NodeId> support;  // sorted
  std::vector<double> mass;
};

struct TransportFlow {
  std::size_t source = 0;  // index into the source measure / cost-matrix row
  std::size_t target = 0;
  double mass = 0.0;
};

struct TransportPlan {
  std::vector<TransportFlow> flows;
  double cost = 0.0;
};

struct EdgeCurvature {
  Edge edge;
  double kappa = 0.0;
};

/// Real value per edge, stored in Graph::edges() order.
class EdgeFunction {
 public:
  EdgeFunction() = default;
  EdgeFunction(std::vector<Edge> edges, std::vector<double> values);

  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return edges_.size(); }

  /// Value of the undirected edge {u, v}; nullopt when absent.
  std::optional<double> find(NodeId u, NodeId v) const;

 private:
  std::vector<Edge> edges_;
  std::vector<double> values_;
};

NodeMeasure node_measure(const Graph& g, NodeId i, double alpha = 0.5);

/// Exact minimum-cost transport between two discrete measures with the
/// given cost matrix (rows: supply atoms, cols: demand atoms). Uses
/// successive shortest paths on the bipartite residual network.
TransportPlan min_cost_transport(const Eigen::MatrixXd& cost, std::span<const double> supply,
                                 std::span<const double> demand);

/// Shortest-path ground distances between the supports of two measures.
/// Throws a numeric error if some pair is disconnected.
Eigen::MatrixXd ground_distances(const Graph& g, std::span<const NodeId> from, std::span<const NodeId> to);

/// Wasserstein-1 transport between two node measures under hop distance.
/// Flow indices refer to positions in a.support / b.support.
TransportPlan wasserstein(const Graph& g, const NodeMeasure& a, const NodeMeasure& b);

/// Ollivier-Ricci curvature of an existing edge: 1 - W(m_u, m_v).
EdgeCurvature ricci_curvature(const Graph& g, NodeId u, NodeId v, double alpha = 0.5);

/// Curvature of every edge of g, computed once on the full graph.
EdgeFunction ricci_curvatures(const Graph& g, double alpha = 0.5, unsigned threads = 1);

/// Node degree in the full graph, as a node function.
std::vector<double> degree_values(const Graph& g);

/// Curvature cache: header `# graph_hash=<hex> alpha=<value>` then `u<TAB>v<TAB>kappa` lines.
void write_curvature_cache(const std::filesystem::path& path, const Graph& g, double alpha, const EdgeFunction& f);

/// Returns nullopt when the file is missing or keyed to another graph / alpha.
std::optional<EdgeFunction> read_curvature_cache(const std::filesystem::path& path, const Graph& g, double alpha);

}  // namespace topo
