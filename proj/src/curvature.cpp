#include "topo/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace topo {
namespace {

constexpr double kMassEps = 1e-14;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

EdgeFunction::EdgeFunction(std::vector<Edge> edges, std::vector<double> values)
    : edges_(std::move(edges)), values_(std::move(values)) {
  if (edges_.size() != values_.size()) throw std::invalid_argument("edge/value size mismatch");
  if (!std::is_sorted(edges_.begin(), edges_.end())) throw std::invalid_argument("edges must be sorted");
}

std::optional<double> EdgeFunction::find(NodeId u, NodeId v) const {
  const Edge key = u < v ? Edge{u, v} : Edge{v, u};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return std::nullopt;
  return values_[static_cast<std::size_t>(it - edges_.begin())];
}

NodeMeasure node_measure(const Graph& g, NodeId i, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw config_error("alpha must lie in [0, 1]");
  NodeMeasure m;
  auto nb = g.neighbors(i);
  if (nb.empty()) {
    m.support = {i};
    m.mass = {1.0};
    return m;
  }
  const double share = (1.0 - alpha) / static_cast<double>(nb.size());
  m.support.reserve(nb.size() + 1);
  bool placed = false;
  for (NodeId w : nb) {
    if (!placed && i < w) {
      m.support.push_back(i);
      m.mass.push_back(alpha);
      placed = true;
    }
    m.support.push_back(w);
    m.mass.push_back(share);
  }
  if (!placed) {
    m.support.push_back(i);
    m.mass.push_back(alpha);
  }
  return m;
}

TransportPlan min_cost_transport(const Eigen::MatrixXd& cost, std::span<const double> supply,
                                 std::span<const double> demand) {
  const auto m = static_cast<std::size_t>(cost.rows());
  const auto k = static_cast<std::size_t>(cost.cols());
  if (supply.size() != m || demand.size() != k) throw std::invalid_argument("cost matrix shape mismatch");
  double total_a = 0, total_b = 0;
  for (double a : supply) total_a += a;
  for (double b : demand) total_b += b;
  if (std::abs(total_a - total_b) > 1e-9) throw numeric_error("transport marginals have different total mass");

  std::vector<double> left(supply.begin(), supply.end());
  std::vector<double> need(demand.begin(), demand.end());
  Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(m, k);

  // Residual network: forward arcs i->j (uncapacitated, cost c), reverse arcs
  // j->i when flow(i,j) > 0 (cost -c). Bellman-Ford handles the negative arcs.
  std::vector<double> dist_s(m), dist_t(k);
  std::vector<std::ptrdiff_t> pred_s(m), pred_t(k);
  const std::size_t max_rounds = 4 * (m + k) * (m + k) + 16;
  for (std::size_t round = 0;; ++round) {
    if (round > max_rounds) throw numeric_error("min-cost flow failed to converge");
    bool any_demand = false;
    for (double b : need) any_demand |= b > kMassEps;
    if (!any_demand) break;

    for (std::size_t i = 0; i < m; ++i) {
      dist_s[i] = left[i] > kMassEps ? 0.0 : kInf;
      pred_s[i] = -1;
    }
    std::fill(dist_t.begin(), dist_t.end(), kInf);
    std::fill(pred_t.begin(), pred_t.end(), -1);
    for (std::size_t pass = 0; pass < m + k; ++pass) {
      bool changed = false;
      for (std::size_t i = 0; i < m; ++i) {
        if (dist_s[i] == kInf) continue;
        for (std::size_t j = 0; j < k; ++j)
          if (dist_s[i] + cost(i, j) < dist_t[j] - 1e-15) {
            dist_t[j] = dist_s[i] + cost(i, j);
            pred_t[j] = static_cast<std::ptrdiff_t>(i);
            changed = true;
          }
      }
      for (std::size_t j = 0; j < k; ++j) {
        if (dist_t[j] == kInf) continue;
        for (std::size_t i = 0; i < m; ++i)
          if (flow(i, j) > kMassEps && dist_t[j] - cost(i, j) < dist_s[i] - 1e-15) {
            dist_s[i] = dist_t[j] - cost(i, j);
            pred_s[i] = static_cast<std::ptrdiff_t>(j);
            changed = true;
          }
      }
      if (!changed) break;
    }

    std::ptrdiff_t sink = -1;
    for (std::size_t j = 0; j < k; ++j)
      if (need[j] > kMassEps && dist_t[j] < kInf && (sink < 0 || dist_t[j] < dist_t[sink])) sink = static_cast<std::ptrdiff_t>(j);
    if (sink < 0) throw numeric_error("min-cost flow: remaining demand is unreachable");

    // Walk back to find the bottleneck.
    double push = need[sink];
    std::size_t j = static_cast<std::size_t>(sink);
    std::size_t i = static_cast<std::size_t>(pred_t[j]);
    while (true) {
      if (pred_s[i] < 0) {
        push = std::min(push, left[i]);
        break;
      }
      const auto prev_j = static_cast<std::size_t>(pred_s[i]);
      push = std::min(push, flow(i, prev_j));
      j = prev_j;
      i = static_cast<std::size_t>(pred_t[j]);
    }

    j = static_cast<std::size_t>(sink);
    need[j] -= push;
    i = static_cast<std::size_t>(pred_t[j]);
    while (true) {
      flow(i, j) += push;
      if (pred_s[i] < 0) {
        left[i] -= push;
        break;
      }
      j = static_cast<std::size_t>(pred_s[i]);
      flow(i, j) -= push;
      i = static_cast<std::size_t>(pred_t[j]);
    }
  }

  TransportPlan plan;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (flow(i, j) > kMassEps) {
        plan.flows.push_back({i, j, flow(i, j)});
        plan.cost += flow(i, j) * cost(i, j);
      }
  return plan;
}

Eigen::MatrixXd ground_distances(const Graph& g, std::span<const NodeId> from, std::span<const NodeId> to) {
  Eigen::MatrixXd d(from.size(), to.size());
  std::vector<NodeId> frontier, next;
  std::vector<std::pair<NodeId, std::uint32_t>> seen;  // sorted (node, depth)
  for (std::size_t a = 0; a < from.size(); ++a) {
    std::size_t found = 0;
    std::vector<bool> done(to.size(), false);
    auto record = [&](NodeId w, std::uint32_t depth) {
      for (std::size_t b = 0; b < to.size(); ++b)
        if (!done[b] && to[b] == w) {
          d(a, b) = depth;
          done[b] = true;
          ++found;
        }
    };
    // Truncated BFS: stops as soon as every target atom has been reached.
    std::vector<NodeId> visited{from[a]};
    frontier = {from[a]};
    record(from[a], 0);
    for (std::uint32_t depth = 1; found < to.size() && !frontier.empty(); ++depth) {
      next.clear();
      for (NodeId u : frontier)
        for (NodeId w : g.neighbors(u)) {
          auto it = std::lower_bound(visited.begin(), visited.end(), w);
          if (it != visited.end() && *it == w) continue;
          visited.insert(it, w);
          next.push_back(w);
          record(w, depth);
        }
      frontier.swap(next);
    }
    if (found < to.size()) throw numeric_error("infinite ground distance between measure supports");
  }
  return d;
}

TransportPlan wasserstein(const Graph& g, const NodeMeasure& a, const NodeMeasure& b) {
  const Eigen::MatrixXd cost = ground_distances(g, a.support, b.support);
  return min_cost_transport(cost, a.mass, b.mass);
}

EdgeCurvature ricci_curvature(const Graph& g, NodeId u, NodeId v, double alpha) {
  if (!g.has_edge(u, v)) throw std::invalid_argument("ricci_curvature requires an edge");
  const auto plan = wasserstein(g, node_measure(g, u, alpha), node_measure(g, v, alpha));
  // d(u, v) = 1 for adjacent nodes. Rounding to 1e-12 makes isomorphic
  // neighborhoods give bitwise-equal values whatever order the solver visits atoms in.
  const double kappa = std::round((1.0 - plan.cost) * 1e12) / 1e12;
  return {u < v ? Edge{u, v} : Edge{v, u}, kappa};
}

EdgeFunction ricci_curvatures(const Graph& g, double alpha, unsigned threads) {
  auto edges = g.edges();
  std::vector<double> kappa(edges.size());
  parallel_for(edges.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) kappa[e] = ricci_curvature(g, edges[e].first, edges[e].second, alpha).kappa;
  });
  return {std::move(edges), std::move(kappa)};
}

std::vector<double> degree_values(const Graph& g) {
  std::vector<double> deg(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) deg[v] = static_cast<double>(g.degree(v));
  return deg;
}

void write_curvature_cache(const std::filesystem::path& path, const Graph& g, double alpha, const EdgeFunction& f) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path.string());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", alpha);
  out << "# graph_hash=" << hex64(g.content_hash()) << " alpha=" << buf << '\n';
  for (std::size_t e = 0; e < f.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%.17g", f.values()[e]);
    out << f.edges()[e].first << '\t' << f.edges()[e].second << '\t' << buf << '\n';
  }
}

std::optional<EdgeFunction> read_curvature_cache(const std::filesystem::path& path, const Graph& g, double alpha) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string header;
  std::getline(in, header);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", alpha);
  if (header != "# graph_hash=" + hex64(g.content_hash()) + " alpha=" + buf) return std::nullopt;

  std::vector<Edge> edges;
  std::vector<double> values;
  NodeId u, v;
  double kappa;
  while (in >> u >> v >> kappa) {
    edges.emplace_back(u, v);
    values.push_back(kappa);
  }
  if (edges != g.edges()) return std::nullopt;
  return EdgeFunction(std::move(edges), std::move(values));
}

}  // namespace topo
