#include "topo/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <limits>
#include <numeric>

namespace topo {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Graph load_graph(std::span<const Edge> edges, std::size_t num_nodes) {
  if (edges.empty()) std::fprintf(stderr, "warning: empty edge list (%zu isolated nodes)\n", num_nodes);

  std::vector<Edge> directed;
  directed.reserve(2 * edges.size());
  for (const auto& [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes)
      throw data_error("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                       ") out of range for " + std::to_string(num_nodes) + " nodes");
    if (u == v) continue;
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  Graph g;
  g.offsets_.assign(num_nodes + 1, 0);
  for (const auto& e : directed) ++g.offsets_[e.first + 1];
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  g.adjacency_.reserve(directed.size());
  for (const auto& e : directed) g.adjacency_.push_back(e.second);
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u)
    for (NodeId v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

int Graph::num_classes() const {
  if (labels_.empty()) return 0;
  return *std::max_element(labels_.begin(), labels_.end()) + 1;
}

void Graph::set_features(Eigen::MatrixXf features) {
  if (features.size() > 0 && static_cast<std::size_t>(features.rows()) != num_nodes())
    throw data_error("feature rows (" + std::to_string(features.rows()) + ") != num_nodes (" +
                     std::to_string(num_nodes()) + ")");
  features_ = std::move(features);
}

void Graph::set_labels(std::vector<int> labels) {
  if (!labels.empty() && labels.size() != num_nodes())
    throw data_error("label count != num_nodes");
  for (int l : labels)
    if (l < 0) throw data_error("negative class id");
  labels_ = std::move(labels);
}

std::uint64_t Graph::content_hash() const {
  Hasher h;
  h.value(static_cast<std::uint64_t>(num_nodes()));
  for (std::size_t o : offsets_) h.value(static_cast<std::uint64_t>(o));
  h.bytes(adjacency_.data(), adjacency_.size() * sizeof(NodeId));
  return h.digest();
}

std::uint32_t EgoNet::local_id(NodeId parent) const {
  auto it = std::lower_bound(members.begin(), members.end(), parent);
  if (it == members.end() || *it != parent) throw std::out_of_range("node not in ego net");
  return static_cast<std::uint32_t>(it - members.begin());
}

std::vector<std::uint32_t> bfs_distances(const Graph& g, NodeId source, std::uint32_t max_depth) {
  constexpr auto kInf = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> dist(g.num_nodes(), kInf);
  std::vector<NodeId> frontier{source}, next;
  dist[source] = 0;
  for (std::uint32_t depth = 0; !frontier.empty() && depth < max_depth; ++depth) {
    next.clear();
    for (NodeId u : frontier)
      for (NodeId w : g.neighbors(u))
        if (dist[w] == kInf) {
          dist[w] = depth + 1;
          next.push_back(w);
        }
    frontier.swap(next);
  }
  return dist;
}

EgoNet ego_net(const Graph& g, NodeId v, unsigned radius) {
  if (v >= g.num_nodes()) throw std::out_of_range("ego node out of range");
  if (radius < 1) throw config_error("ego radius must be >= 1");

  EgoNet ego;
  ego.ego = v;
  // Small local BFS; avoids an O(n) distance array per ego net.
  std::vector<NodeId> frontier{v}, next;
  ego.members.push_back(v);
  for (unsigned depth = 0; depth < radius && !frontier.empty(); ++depth) {
    next.clear();
    for (NodeId u : frontier)
      for (NodeId w : g.neighbors(u)) next.push_back(w);
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    std::vector<NodeId> fresh;
    std::set_difference(next.begin(), next.end(), ego.members.begin(), ego.members.end(),
                        std::back_inserter(fresh));
    std::vector<NodeId> merged;
    std::merge(ego.members.begin(), ego.members.end(), fresh.begin(), fresh.end(),
               std::back_inserter(merged));
    ego.members.swap(merged);
    frontier.swap(fresh);
  }

  for (std::uint32_t a = 0; a < ego.members.size(); ++a) {
    NodeId u = ego.members[a];
    auto nb = g.neighbors(u);
    // Intersect the sorted neighbor list with the sorted member list.
    auto m = std::upper_bound(ego.members.begin(), ego.members.end(), u);
    auto n = std::upper_bound(nb.begin(), nb.end(), u);
    while (m != ego.members.end() && n != nb.end()) {
      if (*m < *n) {
        ++m;
      } else if (*n < *m) {
        ++n;
      } else {
        ego.local_edges.emplace_back(a, static_cast<std::uint32_t>(m - ego.members.begin()));
        ++m;
        ++n;
      }
    }
  }
  return ego;
}

HopDistance hop_distance(const Graph& g, NodeId u, NodeId v, std::uint32_t cap) {
  if (cap < 1) throw config_error("hop cap must be >= 1");
  if (u == v) return HopDistance::exact(0);
  auto dist = bfs_distances(g, u, cap);
  if (dist[v] != std::numeric_limits<std::uint32_t>::max()) return HopDistance::exact(dist[v]);
  // The frontier is exhausted if nothing reached depth == cap has unexplored neighbors.
  for (NodeId w = 0; w < g.num_nodes(); ++w)
    if (dist[w] == cap)
      for (NodeId x : g.neighbors(w))
        if (dist[x] == std::numeric_limits<std::uint32_t>::max()) return HopDistance::at_least(cap + 1);
  return HopDistance::unreachable();
}

HopDistance hop_distance_exact(const Graph& g, NodeId u, NodeId v) {
  if (u == v) return HopDistance::exact(0);
  auto dist = bfs_distances(g, u);
  if (dist[v] == std::numeric_limits<std::uint32_t>::max()) return HopDistance::unreachable();
  return HopDistance::exact(dist[v]);
}

double homophily_index(const Graph& g) {
  if (!g.has_labels()) throw data_error("homophily index requires labels");
  if (g.num_edges() == 0) throw data_error("homophily index requires at least one edge");
  const auto& y = g.labels();
  std::size_t same = 0;
  for (const auto& [u, v] : g.edges()) same += (y[u] == y[v]);
  return static_cast<double>(same) / static_cast<double>(g.num_edges());
}

std::vector<std::uint32_t> connected_components(const Graph& g) {
  constexpr auto kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> comp(g.num_nodes(), kNone);
  std::uint32_t next_id = 0;
  std::deque<NodeId> queue;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (comp[s] != kNone) continue;
    comp[s] = next_id;
    queue.push_back(s);
    while (!queue.empty()) {
      NodeId u = queue.front();
      queue.pop_front();
      for (NodeId w : g.neighbors(u))
        if (comp[w] == kNone) {
          comp[w] = next_id;
          queue.push_back(w);
        }
    }
    ++next_id;
  }
  return comp;
}

Graph largest_connected_component(const Graph& g, std::vector<NodeId>* kept) {
  auto comp = connected_components(g);
  if (comp.empty()) return g;
  std::vector<std::size_t> sizes(*std::max_element(comp.begin(), comp.end()) + 1, 0);
  for (auto c : comp) ++sizes[c];
  const auto largest = static_cast<std::uint32_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());

  std::vector<NodeId> remap(g.num_nodes(), std::numeric_limits<NodeId>::max());
  std::vector<NodeId> keep;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (comp[v] == largest) {
      remap[v] = static_cast<NodeId>(keep.size());
      keep.push_back(v);
    }

  std::vector<Edge> edges;
  for (const auto& [u, v] : g.edges())
    if (comp[u] == largest) edges.emplace_back(remap[u], remap[v]);
  Graph out = load_graph(edges, keep.size());

  if (g.has_features()) {
    Eigen::MatrixXf f(keep.size(), g.features().cols());
    for (std::size_t i = 0; i < keep.size(); ++i) f.row(i) = g.features().row(keep[i]);
    out.set_features(std::move(f));
  }
  if (g.has_labels()) {
    std::vector<int> y(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) y[i] = g.labels()[keep[i]];
    out.set_labels(std::move(y));
  }
  if (kept) *kept = std::move(keep);
  return out;
}

}  // namespace topo
