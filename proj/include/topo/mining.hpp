#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "topo/graph.hpp"
#include "topo/vectorize.hpp"

namespace topo {

struct AbsoluteEpsilon {
  double value = 0.0;
};
struct QuantileEpsilon {
  double q = 0.1;  // epsilon = q-quantile of candidate-pool distances
};
using EpsilonMode = std::variant<AbsoluteEpsilon, QuantileEpsilon>;

struct ExhaustiveCandidates {};
struct SampledCandidates {
  std::size_t k = 64;  // per-node nearest candidates kept by the blocked scan
};
using CandidateStrategy = std::variant<ExhaustiveCandidates, SampledCandidates>;

struct MiningConfig {
  std::uint32_t delta = 5;
  EpsilonMode epsilon = QuantileEpsilon{0.1};
  std::size_t max_pairs_per_node = 10;
  CandidateStrategy candidates = ExhaustiveCandidates{};
  std::uint64_t seed = 0;
  // Quantiles over pools larger than this are estimated from a hashed subsample.
  std::size_t quantile_pool_limit = 4'000'000;
  unsigned threads = 1;

  void validate() const;
};

struct PositivePair {
  NodeId u = 0;
  NodeId v = 0;
  double distance = 0.0;
  std::uint32_t hop_lower_bound = 0;  // exact when == delta, otherwise delta + 1 means "further"

  friend bool operator==(const PositivePair&, const PositivePair&) = default;
};

struct PositivePairSet {
  std::vector<PositivePair> pairs;  // sorted by (u, v), u < v
  double epsilon = 0.0;             // effective threshold
  std::size_t candidate_pool = 0;   // number of candidate pairs with hop >= delta
};

/// Long-range structurally-equivalent pairs: hop(u, v) >= delta and
/// PI distance <= epsilon, keeping each node's max_pairs_per_node nearest
/// qualifying partners (ties by partner id). The output is the union over nodes.
PositivePairSet mine_positive_pairs(const Graph& g, const PIStore& pis, const MiningConfig& cfg);

/// Pairs file: `# key=value` header lines, then `u<TAB>v<TAB>distance<TAB>hop_lb`.
void write_pairs(const std::filesystem::path& path, const PositivePairSet& set, const std::string& header);
PositivePairSet read_pairs(const std::filesystem::path& path, std::map<std::string, std::string>* header = nullptr);

struct Stratum {
  double sum = 0.0;
  std::size_t count = 0;
  std::optional<double> mean() const { return count ? std::optional(sum / count) : std::nullopt; }
  void add(double x) {
    sum += x;
    ++count;
  }
};

/// Neighbor-bias statistics over sampled connected node pairs.
struct BiasReport {
  Stratum hops;                                 // exact hop count
  Stratum topo_distance;                        // all connected pairs
  std::map<std::uint32_t, Stratum> positive_at_hop;  // same label, hop = 3, 4, 5, 6
  Stratum positive_far;                         // same label, hop >= far_hop
  Stratum negative_nonneighbor;                 // different label, hop >= 2
  std::uint32_t far_hop = 5;
  std::size_t pairs_sampled = 0;
  std::size_t pairs_unreachable = 0;
  bool exact = false;

  double unreachable_fraction() const {
    return pairs_sampled ? static_cast<double>(pairs_unreachable) / pairs_sampled : 0.0;
  }
  std::string key_values() const;
  std::string table() const;
};

/// Exhaustive when the number of pairs is within budget; otherwise BFS from a
/// seeded sample of source nodes, pairing each with every other node.
BiasReport neighbor_bias_report(const Graph& g, const PIStore& pis, std::size_t sample_budget,
                                std::uint64_t seed = 0);

// --- synthetic planted-equivalence graphs ---

enum class MotifType {
  Star,    // center plus motif_size leaves
  Clique,  // motif_size-clique, one member is the center
  Rings,   // motif_size 5-cycles sharing the center
  Mixed,   // alternating star / clique
};

struct PlantedParams {
  std::size_t background_nodes = 100;
  int communities = 3;
  double p_in = 0.08;
  double p_out = 0.004;
  MotifType motif = MotifType::Star;
  std::size_t motif_count = 2;
  std::size_t motif_size = 5;  // star leaves, clique order, or ring count
  std::size_t connector_length = 7;
  std::size_t feature_dim = 8;
  double feature_signal = 1.0;
  double feature_noise = 1.0;
  double motif_signal = 0.0;  // extra mean on feature (motif label mod feature_dim) for motif members

  void validate() const;
};

struct PlantedGraph {
  Graph graph;
  std::vector<Edge> planted_pairs;  // center pairs with identical local structure, u < v
  std::vector<NodeId> centers;      // one per motif
  std::vector<int> motif_kind;      // 0 = star, 1 = clique, 2 = rings
  std::vector<bool> in_motif;       // motif members (center + leaves / clique nodes)
};

/// Homophilous stochastic-block background plus identical motifs hung off it by
/// connector paths. Without background, motifs are chained center to center.
/// Labels: community id for background and connector nodes; motif nodes get the
/// next label (Mixed: one label per kind).
PlantedGraph generate_planted_graph(std::uint64_t seed, const PlantedParams& params);

}  // namespace topo
