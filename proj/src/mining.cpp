#include "topo/mining.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace topo {

void MiningConfig::validate() const {
  if (delta < 2) throw config_error("delta must be >= 2");
  if (const auto* q = std::get_if<QuantileEpsilon>(&epsilon); q && !(q->q > 0.0 && q->q < 1.0))
    throw config_error("epsilon quantile must lie in (0, 1)");
  if (const auto* a = std::get_if<AbsoluteEpsilon>(&epsilon); a && !(a->value >= 0.0))
    throw config_error("absolute epsilon must be >= 0");
  if (max_pairs_per_node == 0) throw config_error("max_pairs_per_node must be >= 1");
  if (const auto* s = std::get_if<SampledCandidates>(&candidates); s && s->k == 0)
    throw config_error("sampled candidate count must be >= 1");
}

namespace {

constexpr auto kFar = std::numeric_limits<std::uint32_t>::max();

struct Candidate {
  double distance;
  NodeId partner;
  std::uint32_t hop_lb;
  bool operator<(const Candidate& o) const {
    return distance != o.distance ? distance < o.distance : partner < o.partner;
  }
};

/// Truncated BFS with a reusable distance array (reset through the touched list).
class LocalBfs {
 public:
  explicit LocalBfs(std::size_t n) : dist_(n, kFar) {}

  void run(const Graph& g, NodeId source, std::uint32_t max_depth) {
    for (NodeId w : touched_) dist_[w] = kFar;
    touched_.assign(1, source);
    dist_[source] = 0;
    std::size_t head = 0;
    while (head < touched_.size()) {
      const NodeId u = touched_[head++];
      if (dist_[u] >= max_depth) continue;
      for (NodeId w : g.neighbors(u))
        if (dist_[w] == kFar) {
          dist_[w] = dist_[u] + 1;
          touched_.push_back(w);
        }
    }
  }
  std::uint32_t operator[](NodeId v) const { return dist_[v]; }
  const std::vector<NodeId>& touched() const { return touched_; }

 private:
  std::vector<std::uint32_t> dist_;
  std::vector<NodeId> touched_;
};

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double quantile_of(std::vector<double>& values, double q) {
  if (values.empty()) return 0.0;
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n) - 1;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank), values.end());
  return values[rank];
}

}  // namespace

PositivePairSet mine_positive_pairs(const Graph& g, const PIStore& pis, const MiningConfig& cfg) {
  cfg.validate();
  if (pis.num_nodes() == 0) throw data_error("empty PI store");
  if (pis.num_nodes() != g.num_nodes()) throw data_error("PI store does not cover every node");

  const std::size_t n = g.num_nodes();
  const bool exhaustive = std::holds_alternative<ExhaustiveCandidates>(cfg.candidates);
  const std::size_t keep = exhaustive ? cfg.max_pairs_per_node
                                      : std::max(cfg.max_pairs_per_node, std::get<SampledCandidates>(cfg.candidates).k);
  const bool want_quantile = std::holds_alternative<QuantileEpsilon>(cfg.epsilon);
  const double total_pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const bool subsample = exhaustive && total_pairs > static_cast<double>(cfg.quantile_pool_limit);
  const auto sample_threshold = static_cast<std::uint64_t>(
      subsample ? static_cast<double>(cfg.quantile_pool_limit) / total_pairs * 18446744073709551615.0 : 0.0);

  std::vector<std::vector<Candidate>> nearest(n);
  std::vector<std::vector<double>> pool_values(n);
  std::vector<std::size_t> pool_counts(n, 0);

  // Row-blocked scan; each row owns its output slots.
  parallel_for(n, cfg.threads, [&](std::size_t begin, std::size_t end) {
    LocalBfs bfs(n);
    std::vector<Candidate> heap;
    for (std::size_t row = begin; row < end; ++row) {
      const auto u = static_cast<NodeId>(row);
      bfs.run(g, u, cfg.delta);
      heap.clear();
      for (NodeId v = 0; v < n; ++v) {
        if (v == u || bfs[v] < cfg.delta) continue;
        const double d = pis.distance(u, v);
        const std::uint32_t lb = bfs[v] == cfg.delta ? cfg.delta : cfg.delta + 1;
        if (exhaustive && v > u) {
          ++pool_counts[row];
          if (want_quantile && (!subsample || mix(cfg.seed ^ mix((std::uint64_t(u) << 32) | v)) < sample_threshold))
            pool_values[row].push_back(d);
        }
        const Candidate c{d, v, lb};
        if (heap.size() < keep) {
          heap.push_back(c);
          std::push_heap(heap.begin(), heap.end());
        } else if (c < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = c;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      std::sort_heap(heap.begin(), heap.end());
      nearest[row] = heap;
    }
  });

  PositivePairSet out;
  std::vector<double> pool;
  if (exhaustive) {
    out.candidate_pool = std::accumulate(pool_counts.begin(), pool_counts.end(), std::size_t{0});
    for (auto& values : pool_values) pool.insert(pool.end(), values.begin(), values.end());
  } else {
    // Pool = distinct pairs appearing in any node's nearest list.
    std::vector<std::pair<Edge, double>> seen;
    for (NodeId u = 0; u < n; ++u)
      for (const auto& c : nearest[u]) seen.push_back({{std::min(u, c.partner), std::max(u, c.partner)}, c.distance});
    std::sort(seen.begin(), seen.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    seen.erase(std::unique(seen.begin(), seen.end(), [](const auto& a, const auto& b) { return a.first == b.first; }),
               seen.end());
    out.candidate_pool = seen.size();
    if (want_quantile)
      for (const auto& s : seen) pool.push_back(s.second);
  }

  if (const auto* q = std::get_if<QuantileEpsilon>(&cfg.epsilon))
    out.epsilon = quantile_of(pool, q->q);
  else
    out.epsilon = std::get<AbsoluteEpsilon>(cfg.epsilon).value;

  for (NodeId u = 0; u < n; ++u) {
    std::size_t taken = 0;
    for (const auto& c : nearest[u]) {
      if (taken == cfg.max_pairs_per_node || c.distance > out.epsilon) break;
      out.pairs.push_back({std::min(u, c.partner), std::max(u, c.partner), c.distance, c.hop_lb});
      ++taken;
    }
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const PositivePair& a, const PositivePair& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
  out.pairs.erase(std::unique(out.pairs.begin(), out.pairs.end(),
                              [](const PositivePair& a, const PositivePair& b) { return a.u == b.u && a.v == b.v; }),
                  out.pairs.end());
  return out;
}

void write_pairs(const std::filesystem::path& path, const PositivePairSet& set, const std::string& header) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path.string());
  out << header;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", set.epsilon);
  out << "# epsilon=" << buf << "\n# candidate_pool=" << set.candidate_pool << "\n# pairs=" << set.pairs.size() << '\n';
  for (const auto& p : set.pairs) {
    std::snprintf(buf, sizeof buf, "%.9g", p.distance);
    out << p.u << '\t' << p.v << '\t' << buf << '\t' << p.hop_lower_bound << '\n';
  }
}

PositivePairSet read_pairs(const std::filesystem::path& path, std::map<std::string, std::string>* header) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path.string());
  PositivePairSet set;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto key = line.substr(2, eq - 2);
      auto value = line.substr(eq + 1);
      if (key == "epsilon") set.epsilon = std::stod(value);
      if (key == "candidate_pool") set.candidate_pool = std::stoull(value);
      if (header) (*header)[key] = value;
      continue;
    }
    std::istringstream ss(line);
    PositivePair p;
    if (!(ss >> p.u >> p.v >> p.distance >> p.hop_lower_bound)) throw data_error(path.string() + ": malformed pair line");
    set.pairs.push_back(p);
  }
  return set;
}

BiasReport neighbor_bias_report(const Graph& g, const PIStore& pis, std::size_t sample_budget, std::uint64_t seed) {
  if (!g.has_labels()) throw data_error("neighbor bias report requires labels");
  if (pis.num_nodes() != g.num_nodes()) throw data_error("PI store does not cover every node");
  const std::size_t n = g.num_nodes();
  const auto& y = g.labels();

  BiasReport r;
  for (std::uint32_t h = 3; h <= 6; ++h) r.positive_at_hop[h];
  if (n < 2) return r;

  const double total = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  r.exact = total <= static_cast<double>(sample_budget);
  std::vector<NodeId> sources(n);
  std::iota(sources.begin(), sources.end(), 0u);
  if (!r.exact) {
    std::mt19937_64 rng(seed);
    std::shuffle(sources.begin(), sources.end(), rng);
    sources.resize(std::clamp<std::size_t>(sample_budget / (n - 1), 1, n));
    std::sort(sources.begin(), sources.end());
  }

  LocalBfs bfs(n);
  for (NodeId u : sources) {
    bfs.run(g, u, kFar - 1);
    for (NodeId v = 0; v < n; ++v) {
      if (v == u || (r.exact && v < u)) continue;
      ++r.pairs_sampled;
      const auto hop = bfs[v];
      if (hop == kFar) {
        ++r.pairs_unreachable;
        continue;
      }
      const double d = pis.distance(u, v);
      r.hops.add(hop);
      r.topo_distance.add(d);
      if (y[u] == y[v]) {
        if (auto it = r.positive_at_hop.find(hop); it != r.positive_at_hop.end()) it->second.add(d);
        if (hop >= r.far_hop) r.positive_far.add(d);
      } else if (hop >= 2) {
        r.negative_nonneighbor.add(d);
      }
    }
  }
  return r;
}

namespace {

std::string fmt_opt(const std::optional<double>& v, const char* spec = "%.4f") {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, spec, *v);
  return buf;
}

}  // namespace

std::string BiasReport::key_values() const {
  std::ostringstream out;
  out << "pairs_sampled=" << pairs_sampled << '\n'
      << "exact=" << (exact ? 1 : 0) << '\n'
      << "unreachable_fraction=" << fmt_opt(unreachable_fraction(), "%.6f") << '\n'
      << "avg_hops=" << fmt_opt(hops.mean(), "%.6f") << '\n'
      << "avg_topo_distance=" << fmt_opt(topo_distance.mean(), "%.6f") << '\n';
  for (const auto& [h, s] : positive_at_hop)
    out << "positive_distance_hop" << h << '=' << fmt_opt(s.mean(), "%.6f") << '\n'
        << "positive_count_hop" << h << '=' << s.count << '\n';
  out << "positive_distance_far=" << fmt_opt(positive_far.mean(), "%.6f") << '\n'
      << "positive_count_far=" << positive_far.count << '\n'
      << "far_hop=" << far_hop << '\n'
      << "negative_nonneighbor_distance=" << fmt_opt(negative_nonneighbor.mean(), "%.6f") << '\n'
      << "negative_nonneighbor_count=" << negative_nonneighbor.count << '\n';
  return out.str();
}

std::string BiasReport::table() const {
  std::ostringstream out;
  out << "avg hops | avg topo dist |";
  for (const auto& [h, s] : positive_at_hop) out << " pos@" << h << " |";
  out << " pos@>=" << far_hop << " | neg (non-neighbor)\n";
  out << fmt_opt(hops.mean(), "%.1f") << " | " << fmt_opt(topo_distance.mean()) << " |";
  for (const auto& [h, s] : positive_at_hop) out << ' ' << fmt_opt(s.mean()) << " |";
  out << ' ' << fmt_opt(positive_far.mean()) << " | " << fmt_opt(negative_nonneighbor.mean()) << '\n';
  return out.str();
}

}  // namespace topo
