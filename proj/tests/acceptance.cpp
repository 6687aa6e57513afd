// Acceptance checks: one PASS / FAIL / SKIP line per criterion, with timings.
// Exit status is non-zero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <future>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "topo/curvature.hpp"
#include "topo/gcn.hpp"
#include "topo/mining.hpp"
#include "topo/persistence.hpp"
#include "topo/pipeline.hpp"
#include "topo/vectorize.hpp"

using namespace topo;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::Pass : Status::Fail, std::move(detail)}; }

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

/// Runs `body` on seeds 0..count-1 across hardware threads; results keep seed order.
template <typename T>
std::vector<T> per_seed(int count, const std::function<T(int)>& body) {
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<T> out(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < std::min<unsigned>(workers, static_cast<unsigned>(count)); ++w)
    pool.emplace_back([&] {
      for (int s = next++; s < count; s = next++) out[static_cast<std::size_t>(s)] = body(s);
    });
  for (auto& t : pool) t.join();
  return out;
}

// 1. Persistence diagrams against the brute-force Betti sweep.
Outcome persistence_oracle() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> size(2, 12);
  std::uniform_real_distribution<double> real(-1.0, 1.0);
  const auto t0 = std::chrono::steady_clock::now();
  int checked = 0, failed = 0;
  while (checked < 250) {
    const Graph g = oracle::random_graph(rng, static_cast<std::size_t>(size(rng)), 0.35);
    const EgoNet ego = ego_net(g, 0, 2);
    FiltrationAssignment fa;
    if (checked % 2 == 0) {
      std::vector<double> node_fn(g.num_nodes());
      for (auto& x : node_fn) x = real(rng);
      fa = lift_values(ego, node_fn);
    } else {
      std::vector<double> vals(g.num_edges());
      for (auto& x : vals) x = real(rng);
      fa = lift_values(ego, EdgeFunction(g.edges(), vals));
    }
    const auto pd = persistence_diagram(sublevel_filtration(fa));
    failed += oracle::check_betti_sweep(fa, pd).has_value();
    ++checked;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return verdict(failed == 0 && secs < 10.0, std::to_string(checked) + " ego-nets, " + std::to_string(failed) +
                                                 " mismatches, " + fmt("%.2f", secs) + " s (limit 10 s)");
}

// 2. Ollivier-Ricci curvature against an LP transport oracle.
Outcome curvature_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> size(2, 10);
  std::uniform_real_distribution<double> density(0.2, 0.8);
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t edges = 0;
  double worst = 0.0;
  while (edges < 600) {
    const Graph g = oracle::random_graph(rng, static_cast<std::size_t>(size(rng)), density(rng));
    for (auto [u, v] : g.edges()) {
      worst = std::max(worst, std::abs(ricci_curvature(g, u, v).kappa - oracle::ricci_oracle(g, u, v, 0.5)));
      ++edges;
    }
  }
  const std::vector<Edge> single{{0, 1}}, k3{{0, 1}, {0, 2}, {1, 2}}, p3{{0, 1}, {1, 2}};
  const bool closed = ricci_curvature(load_graph(single, 2), 0, 1).kappa == 1.0 &&
                      ricci_curvature(load_graph(k3, 3), 0, 1).kappa == 0.75 &&
                      ricci_curvature(load_graph(p3, 3), 0, 1).kappa == 0.5;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return verdict(worst <= 1e-9 && closed && secs < 30.0,
                 std::to_string(edges) + " edges, max |error| " + fmt("%.2e", worst) + " (limit 1e-9), closed cases " +
                     (closed ? "exact" : "WRONG") + ", " + fmt("%.2f", secs) + " s (limit 30 s)");
}

PersistenceDiagram random_diagram(std::mt19937_64& rng, int points) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PersistenceDiagram pd;
  for (int k = 0; k < points; ++k) {
    const double b = 0.1 + 0.7 * u(rng);
    if (k % 4 == 3)
      pd.h1.push_back({b, kInf});
    else if (k % 4 == 0)
      pd.h0.push_back({b, kInf});
    else
      pd.h0.push_back({b, std::min(0.9, b + 0.05 + 0.3 * u(rng))});
  }
  return pd;
}

// 3. Persistence images: quadrature oracle, permutation invariance, stability trend.
Outcome image_oracle() {
  const NormalizationSpec unit{0.0, 1.0, 1.0};
  double worst = 0.0;
  for (double res : {0.1, 0.05}) {
    PIConfig cfg;
    cfg.resolution = res;
    cfg.sigma = 0.1;
    PersistenceDiagram pd;
    pd.h0 = {{0.5, 1.0}};
    const auto img = persistence_image(pd, unit, cfg);
    const auto ref = oracle::quadrature_image(0.5, 0.5, 0.5, 0.1, cfg.grid());
    worst = std::max(worst, (img.pixels.head(ref.size()) - ref).cwiseAbs().maxCoeff());
  }

  std::mt19937_64 rng(31);
  PIConfig cfg;
  bool invariant = true;
  for (int trial = 0; trial < 100; ++trial) {
    auto pd = random_diagram(rng, 12);
    const auto base = persistence_image(pd, unit, cfg).pixels;
    std::shuffle(pd.h0.begin(), pd.h0.end(), rng);
    std::shuffle(pd.h1.begin(), pd.h1.end(), rng);
    invariant = invariant && (persistence_image(pd, unit, cfg).pixels.array() == base.array()).all();
  }

  // Mean image distance after jittering every coordinate by U(-eta, eta).
  std::vector<double> means;
  for (double eta : {0.01, 0.02, 0.04}) {
    std::mt19937_64 r(5);
    std::uniform_real_distribution<double> jitter(-eta, eta);
    double sum = 0.0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
      const auto pd = random_diagram(r, 10);
      auto moved = pd;
      for (auto* pts : {&moved.h0, &moved.h1})
        for (auto& p : *pts) {
          p.birth += jitter(r);
          if (!p.essential()) p.death = std::max(p.birth, p.death + jitter(r));
        }
      sum += topo_distance(persistence_image(pd, unit, cfg), persistence_image(moved, unit, cfg));
    }
    means.push_back(sum / trials);
  }
  const bool monotone = means[0] < means[1] && means[1] < means[2];
  return verdict(worst <= 1e-6 && invariant && monotone,
                 "max pixel error " + fmt("%.2e", worst) + " (limit 1e-6), permutation " +
                     (invariant ? "bitwise invariant" : "NOT invariant") + ", mean distance at eta 0.01/0.02/0.04 = " +
                     fmt("%.4f", means[0]) + "/" + fmt("%.4f", means[1]) + "/" + fmt("%.4f", means[2]));
}

// 4. Joint-loss gradients against central differences.
Outcome gradient_check() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto in = fixture::gradient_instance(1000 + seed);
    in.cfg.lambda = 0.1 + 0.05 * static_cast<double>(seed);
    worst = std::max(worst, fixture::check_gradients(in).worst());
  }
  return verdict(worst <= 1e-4, "20 instances, max relative error " + fmt("%.2e", worst) + " (limit 1e-4)");
}

/// Two-sided exact sign test on the non-tied differences.
double sign_test(int wins, int losses) {
  const int n = wins + losses;
  if (n == 0) return 1.0;
  const int k = std::max(wins, losses);
  double tail = 0.0;
  for (int i = k; i <= n; ++i) tail += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) -
                                               n * std::log(2.0));
  return std::min(1.0, 2.0 * tail);
}

PlantedParams recall_benchmark() {
  PlantedParams p;
  p.motif = MotifType::Rings;
  p.motif_size = 2;
  p.motif_count = 4;
  return p;
}

PlantedParams training_benchmark() {
  PlantedParams p;
  p.background_nodes = 150;
  p.motif = MotifType::Rings;
  p.motif_size = 2;
  p.motif_count = 8;
  p.motif_signal = 0.5;
  return p;
}

// 5. Planted-equivalence recovery and the joint-training gain.
Outcome planted_recovery() {
  const auto t0 = std::chrono::steady_clock::now();

  struct Recall {
    std::size_t found = 0, planted = 0;
  };
  const auto recalls = per_seed<Recall>(20, [](int seed) {
    const auto p = recall_benchmark();
    const auto planted = generate_planted_graph(static_cast<std::uint64_t>(seed), p);
    const Graph& g = planted.graph;
    MiningConfig m;
    m.delta = static_cast<std::uint32_t>(p.connector_length - 2);
    const double n = static_cast<double>(g.num_nodes());
    m.epsilon = QuantileEpsilon{static_cast<double>(planted.planted_pairs.size()) / (n * (n - 1) / 2)};
    const auto set = mine_positive_pairs(g, extract_topology(g, {}).store, m);
    std::set<Edge> got;
    for (const auto& q : set.pairs) got.emplace(q.u, q.v);
    Recall r;
    r.planted = planted.planted_pairs.size();
    for (const auto& e : planted.planted_pairs) r.found += got.count(e);
    return r;
  });
  std::size_t found = 0, total = 0;
  for (const auto& r : recalls) {
    found += r.found;
    total += r.planted;
  }
  const double recall = static_cast<double>(found) / static_cast<double>(total);

  const auto diffs = per_seed<double>(20, [](int seed) {
    const auto planted = generate_planted_graph(static_cast<std::uint64_t>(seed), training_benchmark());
    const Graph& g = planted.graph;
    MiningConfig m;
    m.epsilon = QuantileEpsilon{0.01};
    const auto pairs = mine_positive_pairs(g, extract_topology(g, {}).store, m);
    const auto split = gcn::make_split(g.labels(), 20, 500, 1000, static_cast<std::uint64_t>(seed));
    const Eigen::MatrixXd x = g.features().cast<double>();
    gcn::TrainConfig tc;
    tc.seed = static_cast<std::uint64_t>(seed);
    tc.lambda = 0.0;
    const double base = gcn::joint_train<double>(g, x, g.labels(), split, pairs, tc).metrics.test_accuracy;
    tc.lambda = 0.1;
    const double joint = gcn::joint_train<double>(g, x, g.labels(), split, pairs, tc).metrics.test_accuracy;
    return joint - base;
  });
  int wins = 0, losses = 0;
  for (double d : diffs) {
    wins += d > 0;
    losses += d < 0;
  }
  const double mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) / static_cast<double>(diffs.size());
  const double p = sign_test(wins, losses);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return verdict(recall >= 0.9 && mean > 0 && p < 0.05 && secs < 300.0,
                 "recall " + fmt("%.3f", recall) + " (limit 0.9) over 20 seeds; lambda 0.1 vs 0: mean test gain " +
                     fmt("%+.4f", mean) + ", " + std::to_string(wins) + " wins / " + std::to_string(losses) +
                     " losses, sign test p " + fmt("%.4f", p) + " (limit 0.05); " + fmt("%.1f", secs) +
                     " s (limit 300 s)");
}

// 6. Far same-label pairs are topologically closer than different-label pairs.
Outcome bias_ordering() {
  struct Gap {
    double positive = 0.0, negative = 0.0;
    bool ok = false;
  };
  const auto gaps = per_seed<Gap>(5, [](int seed) {
    auto p = training_benchmark();
    p.background_nodes = 600;
    p.p_in = 0.02;
    p.p_out = 0.001;
    const auto planted = generate_planted_graph(static_cast<std::uint64_t>(100 + seed), p);
    const Graph& g = planted.graph;
    const auto report = neighbor_bias_report(g, extract_topology(g, {}).store, 2'000'000, 0);
    Gap gap;
    if (report.positive_far.mean() && report.negative_nonneighbor.mean()) {
      gap.positive = *report.positive_far.mean();
      gap.negative = *report.negative_nonneighbor.mean();
      gap.ok = gap.positive < gap.negative;
    }
    return gap;
  });
  std::ostringstream detail;
  bool ok = true;
  detail << "far positive vs negative mean distance:";
  for (const auto& gap : gaps) {
    ok = ok && gap.ok;
    detail << ' ' << fmt("%.4f", gap.positive) << '<' << fmt("%.4f", gap.negative) << (gap.ok ? "" : "(no)");
  }
  return verdict(ok, detail.str());
}

// 7. Optional reproduction on user-supplied Cora files.
Outcome cora() {
  const char* dir = std::getenv("TOPOGSSL_CORA_DIR");
  if (!dir || !*dir) return {Status::Skip, "set TOPOGSSL_CORA_DIR to a directory with edges.tsv, labels.tsv, features.tefx"};
  const auto t0 = std::chrono::steady_clock::now();
  const std::filesystem::path root = dir;
  RunConfig cfg;
  cfg.edges = root / "edges.tsv";
  cfg.labels = root / "labels.tsv";
  cfg.features = root / "features.tefx";
  cfg.lcc = true;
  cfg.threads = std::max(1u, std::thread::hardware_concurrency());
  try {
    const Graph g = load_run_graph(cfg);
    const double h = homophily_index(g);
    const auto store = extract_topology(g, topology_options(cfg), cache_directory(cfg)).store;
    MiningConfig m = cfg.mining;
    m.threads = cfg.threads;
    const auto pairs = mine_positive_pairs(g, store, m);
    const auto split = gcn::make_split(g.labels(), cfg.train_per_class, cfg.val_size, cfg.test_size, cfg.seed);
    const Eigen::MatrixXd x = g.features().cast<double>();
    gcn::TrainConfig tc = cfg.train;
    tc.lambda = 0.0;
    const double base = gcn::joint_train<double>(g, x, g.labels(), split, pairs, tc).metrics.test_accuracy * 100;
    tc.lambda = 0.1;
    const double joint = gcn::joint_train<double>(g, x, g.labels(), split, pairs, tc).metrics.test_accuracy * 100;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = std::abs(h - 0.8138) <= 0.005 && std::abs(base - 80.6) <= 1.5 && joint >= base + 1.0 && secs <= 900;
    return verdict(ok, "homophily " + fmt("%.4f", h) + " (0.8138 +- 0.005), GCN " + fmt("%.1f", base) +
                           " (80.6 +- 1.5), joint " + fmt("%.1f", joint) + " (>= GCN + 1.0), " + fmt("%.0f", secs) +
                           " s (limit 900 s)");
  } catch (const std::exception& e) {
    return {Status::Fail, std::string("error: ") + e.what()};
  }
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"1 persistence vs Betti oracle", persistence_oracle},
      {"2 curvature vs transport LP", curvature_oracle},
      {"3 persistence images", image_oracle},
      {"4 gradient check", gradient_check},
      {"5 planted equivalence recovery", planted_recovery},
      {"6 neighbor-bias ordering", bias_ordering},
      {"7 Cora reproduction", cora},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = out.status == Status::Pass ? "PASS" : out.status == Status::Fail ? "FAIL" : "SKIP";
    failures += out.status == Status::Fail;
    std::printf("%s [%s] %s [%.2f s]\n", tag, c.name, out.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
