#include "topo/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace topo {

FiltrationAssignment lift_values(const EgoNet& ego, const RawFunction& raw) {
  FiltrationAssignment fa;
  fa.edges = ego.local_edges;
  const std::size_t n = ego.members.size();

  if (const auto* node_fn = std::get_if<std::vector<double>>(&raw)) {
    fa.source = FiltrationSource::NodeFunction;
    fa.node_values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (ego.members[i] >= node_fn->size()) throw data_error("node function is missing a value");
      fa.node_values[i] = (*node_fn)[ego.members[i]];
    }
    fa.edge_values.reserve(fa.edges.size());
    for (const auto& [a, b] : fa.edges) fa.edge_values.push_back(std::max(fa.node_values[a], fa.node_values[b]));
    return fa;
  }

  const auto& edge_fn = std::get<EdgeFunction>(raw);
  fa.source = FiltrationSource::EdgeFunction;
  fa.edge_values.reserve(fa.edges.size());
  for (const auto& [a, b] : fa.edges) {
    auto value = edge_fn.find(ego.members[a], ego.members[b]);
    if (!value) throw data_error("edge function is missing a value");
    fa.edge_values.push_back(*value);
  }
  const double fallback =
      fa.edge_values.empty() ? 0.0 : *std::min_element(fa.edge_values.begin(), fa.edge_values.end());
  fa.node_values.assign(n, std::numeric_limits<double>::infinity());
  for (std::size_t e = 0; e < fa.edges.size(); ++e) {
    auto& [a, b] = fa.edges[e];
    fa.node_values[a] = std::min(fa.node_values[a], fa.edge_values[e]);
    fa.node_values[b] = std::min(fa.node_values[b], fa.edge_values[e]);
  }
  for (double& v : fa.node_values)
    if (std::isinf(v)) v = fallback;
  return fa;
}

Filtration sublevel_filtration(const FiltrationAssignment& fa) {
  if (fa.edges.size() != fa.edge_values.size()) throw std::invalid_argument("edge value count mismatch");
  Filtration f;
  f.num_vertices = fa.node_values.size();
  f.edges = fa.edges;
  f.order.reserve(f.num_vertices + f.edges.size());
  for (std::uint32_t i = 0; i < f.num_vertices; ++i) {
    if (std::isnan(fa.node_values[i])) throw numeric_error("NaN vertex value in filtration");
    f.order.push_back({Simplex::Kind::Vertex, i, fa.node_values[i]});
  }
  for (std::uint32_t e = 0; e < f.edges.size(); ++e) {
    if (std::isnan(fa.edge_values[e])) throw numeric_error("NaN edge value in filtration");
    f.order.push_back({Simplex::Kind::Edge, e, fa.edge_values[e]});
  }
  std::sort(f.order.begin(), f.order.end(), [](const Simplex& x, const Simplex& y) {
    if (x.value != y.value) return x.value < y.value;
    if (x.kind != y.kind) return x.kind == Simplex::Kind::Vertex;
    return x.index < y.index;
  });
  return f;
}

namespace {

struct Components {
  std::vector<std::uint32_t> parent;
  std::vector<double> birth;           // valid at roots
  std::vector<std::uint32_t> oldest;   // vertex that carries the component's birth

  explicit Components(std::size_t n) : parent(n), birth(n, 0.0), oldest(n) {
    std::iota(parent.begin(), parent.end(), 0u);
    std::iota(oldest.begin(), oldest.end(), 0u);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
};

}  // namespace

PersistenceDiagram persistence_diagram(const Filtration& filtration) {
  PersistenceDiagram pd;
  Components uf(filtration.num_vertices);
  std::vector<bool> present(filtration.num_vertices, false);

  for (const Simplex& s : filtration.order) {
    if (s.kind == Simplex::Kind::Vertex) {
      present[s.index] = true;
      uf.birth[s.index] = s.value;
      continue;
    }
    const auto [a, b] = filtration.edges[s.index];
    if (!present[a] || !present[b]) throw std::invalid_argument("edge enters the filtration before its vertices");
    auto ra = uf.find(a), rb = uf.find(b);
    if (ra == rb) {
      pd.h1.push_back({s.value, std::numeric_limits<double>::infinity()});
      continue;
    }
    // Elder rule: the younger component dies; equal births kill the larger oldest-vertex id.
    const bool a_dies = uf.birth[ra] > uf.birth[rb] || (uf.birth[ra] == uf.birth[rb] && uf.oldest[ra] > uf.oldest[rb]);
    const auto dying = a_dies ? ra : rb;
    const auto surviving = a_dies ? rb : ra;
    pd.h0.push_back({uf.birth[dying], s.value});
    uf.parent[dying] = surviving;
  }
  for (std::uint32_t v = 0; v < filtration.num_vertices; ++v)
    if (present[v] && uf.find(v) == v) pd.h0.push_back({uf.birth[v], std::numeric_limits<double>::infinity()});

  std::sort(pd.h0.begin(), pd.h0.end());
  std::sort(pd.h1.begin(), pd.h1.end());
  return pd;
}

std::size_t drop_zero_persistence(PersistenceDiagram& pd) {
  const auto before = pd.h0.size();
  std::erase_if(pd.h0, [](const PersistencePair& p) { return !p.essential() && p.death == p.birth; });
  return before - pd.h0.size();
}

PersistenceDiagram node_diagram(const Graph& g, NodeId v, const RawFunction& raw, unsigned radius) {
  auto pd = persistence_diagram(sublevel_filtration(lift_values(ego_net(g, v, radius), raw)));
  drop_zero_persistence(pd);
  return pd;
}

std::vector<PersistenceDiagram> node_diagrams(const Graph& g, const RawFunction& raw, unsigned radius,
                                              unsigned threads) {
  std::vector<PersistenceDiagram> out(g.num_nodes());
  parallel_for(out.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) out[v] = node_diagram(g, static_cast<NodeId>(v), raw, radius);
  });
  return out;
}

void write_diagrams(const std::filesystem::path& path, std::span<const PersistenceDiagram> diagrams) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path.string());
  auto emit = [&](int dim, const PersistencePair& p) {
    char buf[96];
    if (p.essential())
      std::snprintf(buf, sizeof buf, "%d\t%.17g\tinf\n", dim, p.birth);
    else
      std::snprintf(buf, sizeof buf, "%d\t%.17g\t%.17g\n", dim, p.birth, p.death);
    out << buf;
  };
  for (std::size_t v = 0; v < diagrams.size(); ++v) {
    out << "# node " << v << '\n';
    for (const auto& p : diagrams[v].h0) emit(0, p);
    for (const auto& p : diagrams[v].h1) emit(1, p);
  }
}

}  // namespace topo
