#include <fstream>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "topo/persistence.hpp"

using namespace topo;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

FiltrationAssignment assignment(std::vector<double> nodes, std::vector<std::pair<std::uint32_t, std::uint32_t>> edges,
                                std::vector<double> edge_values) {
  FiltrationAssignment fa;
  fa.node_values = std::move(nodes);
  fa.edges = std::move(edges);
  fa.edge_values = std::move(edge_values);
  return fa;
}

/// Random ego-net-like complex with a valid sublevel assignment.
FiltrationAssignment random_assignment(std::mt19937_64& rng, bool integer_values) {
  std::uniform_int_distribution<int> size(1, 12), small(0, 3);
  std::uniform_real_distribution<double> real(-1.0, 1.0);
  const Graph g = oracle::random_graph(rng, static_cast<std::size_t>(size(rng)), 0.35);
  const EgoNet ego = ego_net(g, 0, 2);
  if (std::bernoulli_distribution(0.5)(rng)) {
    std::vector<double> node_fn(g.num_nodes());
    for (auto& x : node_fn) x = integer_values ? small(rng) : real(rng);
    return lift_values(ego, node_fn);
  }
  std::vector<double> vals;
  for (std::size_t e = 0; e < g.num_edges(); ++e) vals.push_back(integer_values ? small(rng) : real(rng));
  return lift_values(ego, EdgeFunction(g.edges(), vals));
}

}  // namespace

TEST_CASE("lift_values") {
  SUBCASE("node source takes the max over endpoints") {
    const Graph g = load_graph(std::vector<Edge>{{0, 1}}, 2);
    const auto fa = lift_values(ego_net(g, 0), std::vector<double>{1.0, 3.0});
    CHECK(fa.source == FiltrationSource::NodeFunction);
    CHECK(fa.edge_values == std::vector<double>{3.0});
  }
  SUBCASE("edge source takes the min over incident edges") {
    const Graph g = load_graph(std::vector<Edge>{{0, 1}, {1, 2}}, 3);
    const auto fa = lift_values(ego_net(g, 1), EdgeFunction(g.edges(), {0.2, 0.7}));
    CHECK(fa.node_values == std::vector<double>{0.2, 0.2, 0.7});
  }
  SUBCASE("edgeless ego with edge source gets 0") {
    const Graph g = load_graph(std::vector<Edge>{{0, 1}}, 3);
    const auto fa = lift_values(ego_net(g, 2), EdgeFunction(g.edges(), {-0.4}));
    CHECK(fa.node_values == std::vector<double>{0.0});
  }
  SUBCASE("missing raw values") {
    const Graph g = load_graph(std::vector<Edge>{{0, 1}, {1, 2}}, 3);
    CHECK_THROWS_AS(lift_values(ego_net(g, 1), std::vector<double>{1.0}), Error);
    CHECK_THROWS_AS(lift_values(ego_net(g, 1), EdgeFunction({{0, 1}}, {1.0})), Error);
  }
}

TEST_CASE("sublevel_filtration ordering") {
  SUBCASE("hand-traced tie rule") {
    // a=0, b=1, c=2; edges ab, bc.
    const auto f = sublevel_filtration(assignment({1, 3, 2}, {{0, 1}, {1, 2}}, {3, 3}));
    std::vector<std::pair<Simplex::Kind, std::uint32_t>> got;
    for (const auto& s : f.order) got.emplace_back(s.kind, s.index);
    using K = Simplex::Kind;
    CHECK(got == std::vector<std::pair<K, std::uint32_t>>{{K::Vertex, 0}, {K::Vertex, 2}, {K::Vertex, 1}, {K::Edge, 0}, {K::Edge, 1}});
  }
  SUBCASE("all equal values: vertices by id, then edges by id") {
    const auto f = sublevel_filtration(assignment({0, 0, 0}, {{0, 1}, {0, 2}, {1, 2}}, {0, 0, 0}));
    for (std::size_t i = 0; i < 3; ++i) CHECK((f.order[i].kind == Simplex::Kind::Vertex && f.order[i].index == i));
    for (std::size_t i = 0; i < 3; ++i) CHECK((f.order[3 + i].kind == Simplex::Kind::Edge && f.order[3 + i].index == i));
  }
  SUBCASE("no edges") {
    const auto f = sublevel_filtration(assignment({2, 1}, {}, {}));
    CHECK(f.order.size() == 2);
    CHECK(f.order[0].index == 1);
  }
  CHECK_THROWS_AS(sublevel_filtration(assignment({std::nan("")}, {}, {})), Error);
}

TEST_CASE("persistence_diagram examples") {
  SUBCASE("path a(1)-b(3)-c(2)") {
    const auto pd = persistence_diagram(sublevel_filtration(assignment({1, 3, 2}, {{0, 1}, {1, 2}}, {3, 3})));
    // b is born and killed at 3 (zero persistence) before c dies at 3.
    auto kept = pd;
    CHECK(drop_zero_persistence(kept) == 1);
    CHECK(kept.h0 == std::vector<PersistencePair>{{1, kInf}, {2, 3}});
    CHECK(kept.h1.empty());
  }
  SUBCASE("C4 with all zeros") {
    const auto pd = persistence_diagram(
        sublevel_filtration(assignment({0, 0, 0, 0}, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}, {0, 0, 0, 0})));
    auto kept = pd;
    drop_zero_persistence(kept);
    CHECK(kept.h0 == std::vector<PersistencePair>{{0, kInf}});
    CHECK(kept.h1 == std::vector<PersistencePair>{{0, kInf}});
  }
  SUBCASE("single vertex") {
    const auto pd = persistence_diagram(sublevel_filtration(assignment({0.7}, {}, {})));
    CHECK(pd.h0 == std::vector<PersistencePair>{{0.7, kInf}});
    CHECK(pd.h1.empty());
  }
  SUBCASE("equal births: larger oldest id dies") {
    const auto pd = persistence_diagram(sublevel_filtration(assignment({0, 0}, {{0, 1}}, {1})));
    CHECK(pd.h0 == std::vector<PersistencePair>{{0, 1}, {0, kInf}});
  }
}

TEST_CASE("diagrams match the brute-force Betti sweep") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const auto fa = random_assignment(rng, trial % 2 == 0);
    const auto pd = persistence_diagram(sublevel_filtration(fa));
    const auto mismatch = oracle::check_betti_sweep(fa, pd);
    CHECK_MESSAGE(!mismatch.has_value(), "trial " << trial);

    // Every vertex opens an H0 class; every edge either closes one or opens H1.
    CHECK(pd.h0.size() == fa.node_values.size());
    std::size_t deaths = 0;
    for (const auto& p : pd.h0) deaths += !p.essential();
    CHECK(deaths + pd.h1.size() == fa.edges.size());
    auto kept = pd;
    const auto dropped = drop_zero_persistence(kept);
    std::size_t essential = 0, finite = 0;
    for (const auto& p : kept.h0) {
      (p.essential() ? essential : finite) += 1;
      if (!p.essential()) CHECK(p.death > p.birth);
    }
    CHECK(dropped + finite + essential == fa.node_values.size());
    CHECK(essential + fa.edges.size() - pd.h1.size() == fa.node_values.size());
    CHECK(essential == oracle::component_count(fa.node_values.size(), std::vector<bool>(fa.node_values.size(), true), fa.edges));
  }
}

TEST_CASE("diagram is invariant under node relabeling") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    const auto fa = random_assignment(rng, true);
    const std::size_t n = fa.node_values.size();
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    FiltrationAssignment relabeled = fa;
    for (std::size_t i = 0; i < n; ++i) relabeled.node_values[perm[i]] = fa.node_values[i];
    for (auto& [a, b] : relabeled.edges) {
      a = perm[a];
      b = perm[b];
      if (a > b) std::swap(a, b);
    }
    CHECK(persistence_diagram(sublevel_filtration(fa)) == persistence_diagram(sublevel_filtration(relabeled)));
  }
}

TEST_CASE("node diagrams on a graph and the debug dump") {
  const Graph g = load_graph(std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}, {3, 0}, {3, 4}}, 6);
  const auto curv = ricci_curvatures(g);
  const auto one = node_diagrams(g, curv, 2, 1);
  const auto three = node_diagrams(g, curv, 2, 3);
  CHECK(one == three);
  CHECK(one[5].h0 == std::vector<PersistencePair>{{0.0, kInf}});
  CHECK(one[0].h1.size() == 1);

  const auto path = std::filesystem::temp_directory_path() / "topogssl_diagrams.txt";
  write_diagrams(path, one);
  std::ifstream in(path);
  std::string first, second;
  std::getline(in, first);
  std::getline(in, second);
  CHECK(first == "# node 0");
  CHECK(second.find("\tinf") != std::string::npos);
}
