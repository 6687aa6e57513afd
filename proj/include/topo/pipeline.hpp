#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "topo/config.hpp"
#include "topo/curvature.hpp"
#include "topo/persistence.hpp"
#include "topo/vectorize.hpp"

namespace topo {

struct TopologyOptions {
  FiltrationKind source = FiltrationKind::Ricci;
  unsigned radius = 2;
  double alpha = 0.5;
  PIConfig pi;
  unsigned threads = 1;
};

struct TopologyResult {
  std::vector<PersistenceDiagram> diagrams;
  NormalizationSpec normalization;
  PIStore store;
  bool curvature_cached = false;
};

/// Filtration values, per-node ego-net diagrams and the PI store. With a cache
/// directory, Ricci curvature is read from / written to a file keyed by graph hash and alpha.
TopologyResult extract_topology(const Graph& g, const TopologyOptions& opt,
                                const std::optional<std::filesystem::path>& cache_dir = std::nullopt,
                                std::ostream* log = nullptr);

TopologyOptions topology_options(const RunConfig& cfg);

/// Artifact names inside the output directory.
namespace artifacts {
inline constexpr const char* kConfig = "config.txt";
inline constexpr const char* kStats = "stats.txt";
inline constexpr const char* kDiagrams = "diagrams.txt";
inline constexpr const char* kStore = "pis.tpis";
inline constexpr const char* kStoreMeta = "pis.tpis.meta";
inline constexpr const char* kPairs = "pairs.tsv";
inline constexpr const char* kMetrics = "metrics.txt";
inline constexpr const char* kCurve = "curve.csv";
inline constexpr const char* kModel = "model.tgcn";
inline constexpr const char* kModelMeta = "model.tgcn.meta";
inline constexpr const char* kReport = "report.md";
}  // namespace artifacts

/// Cache directory: $TOPOGSSL_CACHE_DIR if set, else <output_dir>/cache.
std::filesystem::path cache_directory(const RunConfig& cfg);

/// `key=value` lines (a leading "# " is allowed) into a map.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

Graph load_run_graph(const RunConfig& cfg);

// Stage commands. Each writes into cfg.output_dir and logs progress to `log`.
// Failures surface as topo::Error carrying the exit code.
void cmd_stats(const RunConfig& cfg, std::ostream& log);
void cmd_extract(const RunConfig& cfg, std::ostream& log);
void cmd_mine(const RunConfig& cfg, std::ostream& log);
gcn::Metrics cmd_train(const RunConfig& cfg, std::ostream& log);

struct SweepRow {
  std::string value;  // "original" for the lambda = 0 baseline
  gcn::Metrics metrics;
  std::size_t pairs = 0;
};

/// Runs extract / mine / train per value (reusing extraction when unaffected)
/// plus a lambda = 0 "original" row; writes sweep_<axis>.tsv and a markdown table.
std::vector<SweepRow> cmd_sweep(const RunConfig& cfg, const SweepSpec& sweep, std::ostream& log);

/// Collects whatever artifacts exist into report.md.
void cmd_report(const RunConfig& cfg, std::ostream& log);

}  // namespace topo
