#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "topo/curvature.hpp"
#include "topo/graph.hpp"

namespace topo {

enum class FiltrationSource { EdgeFunction, NodeFunction };

/// Node and edge values of an ego net, indexed by local ids / local edge order.
struct FiltrationAssignment {
  std::vector<double> node_values;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<double> edge_values;
  FiltrationSource source = FiltrationSource::EdgeFunction;
};

/// A raw function on the parent graph: per-edge (e.g. curvature) or per-node (e.g. degree).
using RawFunction = std::variant<EdgeFunction, std::vector<double>>;

/// Completes a raw function into node + edge values on the ego net.
/// Node source: f(edge) = max of its endpoints. Edge source: f(node) = min over
/// incident ego-net edges; an edgeless ego gets 0.
FiltrationAssignment lift_values(const EgoNet& ego, const RawFunction& raw);

struct Simplex {
  enum class Kind : std::uint8_t { Vertex, Edge };
  Kind kind = Kind::Vertex;
  std::uint32_t index = 0;  // vertex id or edge index
  double value = 0.0;
};

/// Simplices sorted by value; ties put vertices before edges, then lower ids first.
struct Filtration {
  std::size_t num_vertices = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<Simplex> order;
};

Filtration sublevel_filtration(const FiltrationAssignment& fa);

struct PersistencePair {
  double birth = 0.0;
  double death = std::numeric_limits<double>::infinity();

  bool essential() const noexcept { return death == std::numeric_limits<double>::infinity(); }
  double persistence() const noexcept { return death - birth; }
  friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
  friend auto operator<=>(const PersistencePair&, const PersistencePair&) = default;
};

struct PersistenceDiagram {
  std::vector<PersistencePair> h0;
  std::vector<PersistencePair> h1;  // always essential on a graph

  std::size_t size() const noexcept { return h0.size() + h1.size(); }
  bool empty() const noexcept { return h0.empty() && h1.empty(); }
  friend bool operator==(const PersistenceDiagram&, const PersistenceDiagram&) = default;
};

/// 0- and 1-dimensional persistence of a graph filtration via union-find.
/// Merges follow the elder rule; equal births kill the component whose oldest
/// vertex has the larger id. Zero-persistence pairs are kept; see drop_zero_persistence.
PersistenceDiagram persistence_diagram(const Filtration& filtration);

/// Removes finite H0 pairs with birth == death; returns how many were removed.
std::size_t drop_zero_persistence(PersistenceDiagram& pd);

/// Ego net -> lift -> filtration -> diagram (zero-persistence pairs dropped).
PersistenceDiagram node_diagram(const Graph& g, NodeId v, const RawFunction& raw, unsigned radius = 2);

/// One diagram per node, in node order.
std::vector<PersistenceDiagram> node_diagrams(const Graph& g, const RawFunction& raw, unsigned radius = 2,
                                              unsigned threads = 1);

/// Debug dump: `# node <id>` separators, then `dim<TAB>birth<TAB>death` with `inf` for essential deaths.
void write_diagrams(const std::filesystem::path& path, std::span<const PersistenceDiagram> diagrams);

}  // namespace topo
