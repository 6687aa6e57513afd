#include "topo/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "topo/io.hpp"

namespace topo {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* spec, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void check_inputs(const RunConfig& cfg) {
  if (cfg.edges.empty()) throw config_error("no edge list configured (edges=...)");
  for (const auto* p : {&cfg.edges, &cfg.labels, &cfg.features})
    if (!p->empty() && !fs::exists(*p)) throw config_error("input file does not exist: " + p->string());
}

/// Inputs are checked first so that a bad invocation leaves no output behind.
void prepare_output(const RunConfig& cfg) {
  check_inputs(cfg);
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw config_error("cannot create output directory " + cfg.output_dir.string() + ": " + ec.message());
  cfg.save(cfg.output_dir / artifacts::kConfig);
}

void write_meta(const fs::path& path, const std::map<std::string, std::string>& kv) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path.string());
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

void require_match(const std::map<std::string, std::string>& meta, const std::string& key, const std::string& expected,
                   const fs::path& artifact, const char* rerun) {
  const auto it = meta.find(key);
  if (it == meta.end() || it->second != expected)
    throw config_error(artifact.string() + " is stale (" + key + " " + (it == meta.end() ? "missing" : it->second) +
                       ", expected " + expected + "); rerun `" + rerun + "`");
}

PositivePairSet mine(const Graph& g, const PIStore& store, const RunConfig& cfg) {
  MiningConfig m = cfg.mining;
  m.seed = cfg.seed;
  m.threads = cfg.threads;
  return mine_positive_pairs(g, store, m);
}

std::string pairs_header(const RunConfig& cfg, const Graph& g) {
  std::ostringstream h;
  h << "# stage=mine\n"
    << "# config_hash=" << cfg.mine_hash() << '\n'
    << "# extract_hash=" << cfg.extract_hash() << '\n'
    << "# graph_hash=" << hex64(g.content_hash()) << '\n'
    << "# delta=" << cfg.get("delta") << '\n'
    << "# epsilon_mode=" << cfg.get("epsilon_mode") << '\n'
    << "# epsilon_param=" << cfg.get("epsilon") << '\n'
    << "# max_pairs_per_node=" << cfg.get("max_pairs_per_node") << '\n'
    << "# candidates=" << cfg.get("candidates") << '\n';
  return h.str();
}

gcn::TrainResult<double> train(const Graph& g, const PositivePairSet& pairs, const RunConfig& cfg) {
  if (!g.has_features()) throw data_error("training requires a feature matrix");
  if (!g.has_labels()) throw data_error("training requires labels");
  const auto split = gcn::make_split(g.labels(), cfg.train_per_class, cfg.val_size, cfg.test_size, cfg.seed);
  gcn::TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  const gcn::Matrix<double> x = g.features().cast<double>();
  return gcn::joint_train<double>(g, x, g.labels(), split, pairs, tc);
}

/// Dataset-wide range; a constant filtration (e.g. an edgeless graph) maps v to
/// [v, v + 1] so that essential classes still reach the image.
NormalizationSpec stage_normalization(std::span<const PersistenceDiagram> diagrams) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& pd : diagrams)
    for (const auto* points : {&pd.h0, &pd.h1})
      for (const auto& p : *points)
        for (double x : {p.birth, p.death})
          if (std::isfinite(x)) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
          }
  if (std::isfinite(lo) && hi == lo) return {lo, lo + 1.0, 1.0};
  return fit_normalization(diagrams);
}

}  // namespace

TopologyOptions topology_options(const RunConfig& cfg) {
  return {cfg.filtration, cfg.ego_radius, cfg.alpha, cfg.pi, cfg.threads};
}

TopologyResult extract_topology(const Graph& g, const TopologyOptions& opt, const std::optional<fs::path>& cache_dir,
                                std::ostream* log) {
  TopologyResult out;
  RawFunction raw;
  if (opt.source == FiltrationKind::Degree) {
    raw = degree_values(g);
  } else {
    std::optional<fs::path> cache_file;
    if (cache_dir) {
      Hasher key;
      key.value(g.content_hash()).value(opt.alpha);
      cache_file = *cache_dir / ("curvature_" + hex64(key.digest()) + ".tsv");
    }
    std::optional<EdgeFunction> kappa;
    if (cache_file && fs::exists(*cache_file)) kappa = read_curvature_cache(*cache_file, g, opt.alpha);
    if (kappa) {
      out.curvature_cached = true;
      if (log) *log << "curvature: cache hit " << cache_file->string() << '\n';
    } else {
      const auto t0 = Clock::now();
      kappa = ricci_curvatures(g, opt.alpha, opt.threads);
      if (log) *log << "curvature: computed " << g.num_edges() << " edges in " << fmt("%.3f", seconds_since(t0)) << " s\n";
      if (cache_file) {
        std::error_code ec;
        fs::create_directories(cache_file->parent_path(), ec);
        if (!ec) write_curvature_cache(*cache_file, g, opt.alpha, *kappa);
      }
    }
    raw = std::move(*kappa);
  }

  const auto t0 = Clock::now();
  out.diagrams = node_diagrams(g, raw, opt.radius, opt.threads);
  out.normalization = stage_normalization(out.diagrams);
  out.store = build_pi_store(out.diagrams, out.normalization, opt.pi, opt.threads);
  if (log) *log << "diagrams + images: " << g.num_nodes() << " nodes in " << fmt("%.3f", seconds_since(t0)) << " s\n";
  return out;
}

fs::path cache_directory(const RunConfig& cfg) {
  if (const char* env = std::getenv("TOPOGSSL_CACHE_DIR"); env && *env) return env;
  return cfg.output_dir / "cache";
}

std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) line = line.substr(2);
    const auto eq = line.find('=');
    if (eq == std::string::npos || line.empty() || line[0] == '#') continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

Graph load_run_graph(const RunConfig& cfg) {
  check_inputs(cfg);
  return io::load_dataset({cfg.edges, cfg.labels, cfg.features}, cfg.lcc);
}

void cmd_stats(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (cfg.labels.empty()) throw config_error("stats requires labels=...");
  prepare_output(cfg);
  const Graph g = load_run_graph(cfg);
  const double h = homophily_index(g);

  // Reuse the extracted store when it is current; otherwise extract in memory.
  PIStore store;
  const fs::path store_path = cfg.output_dir / artifacts::kStore;
  const fs::path meta_path = cfg.output_dir / artifacts::kStoreMeta;
  bool reused = false;
  if (fs::exists(store_path) && fs::exists(meta_path)) {
    const auto meta = read_key_values(meta_path);
    if (meta.contains("config_hash") && meta.at("config_hash") == cfg.extract_hash() && meta.contains("graph_hash") &&
        meta.at("graph_hash") == hex64(g.content_hash())) {
      store = PIStore::load(store_path);
      reused = true;
    }
  }
  if (!reused) store = extract_topology(g, topology_options(cfg), cache_directory(cfg), &log).store;

  const BiasReport report = neighbor_bias_report(g, store, cfg.bias_budget, cfg.seed);
  std::ofstream out(cfg.output_dir / artifacts::kStats);
  if (!out) throw data_error("cannot write stats");
  out << "# config_hash=" << cfg.extract_hash() << '\n'
      << "nodes=" << g.num_nodes() << '\n'
      << "edges=" << g.num_edges() << '\n'
      << "classes=" << g.num_classes() << '\n'
      << "homophily=" << fmt("%.6f", h) << '\n'
      << report.key_values();
  log << "nodes " << g.num_nodes() << ", edges " << g.num_edges() << ", homophily " << fmt("%.4f", h) << '\n'
      << report.table();
  const auto pos = report.positive_far.mean(), neg = report.negative_nonneighbor.mean();
  if (pos && neg) log << "far positive vs negative gap: " << fmt("%.6f", *neg - *pos) << '\n';
}

void cmd_extract(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  prepare_output(cfg);
  const Graph g = load_run_graph(cfg);
  const auto result = extract_topology(g, topology_options(cfg), cache_directory(cfg), &log);
  write_diagrams(cfg.output_dir / artifacts::kDiagrams, result.diagrams);
  result.store.save(cfg.output_dir / artifacts::kStore);
  write_meta(cfg.output_dir / artifacts::kStoreMeta,
             {{"stage", "extract"},
              {"config_hash", cfg.extract_hash()},
              {"graph_hash", hex64(g.content_hash())},
              {"filtration", to_string(cfg.filtration)},
              {"normalization_min", fmt("%.17g", result.normalization.global_min)},
              {"normalization_max", fmt("%.17g", result.normalization.global_max)},
              {"curvature_cached", result.curvature_cached ? "true" : "false"}});
  log << "wrote " << (cfg.output_dir / artifacts::kStore).string() << " (" << result.store.num_nodes() << " x "
      << result.store.vector_length() << ")\n";
}

void cmd_mine(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  prepare_output(cfg);
  const fs::path store_path = cfg.output_dir / artifacts::kStore;
  const fs::path meta_path = cfg.output_dir / artifacts::kStoreMeta;
  if (!fs::exists(store_path) || !fs::exists(meta_path))
    throw data_error("no PI store in " + cfg.output_dir.string() + "; run `extract` first");
  const auto meta = read_key_values(meta_path);
  require_match(meta, "config_hash", cfg.extract_hash(), store_path, "extract");
  const Graph g = load_run_graph(cfg);
  require_match(meta, "graph_hash", hex64(g.content_hash()), store_path, "extract");

  const PIStore store = PIStore::load(store_path);
  const auto t0 = Clock::now();
  const auto pairs = mine(g, store, cfg);
  write_pairs(cfg.output_dir / artifacts::kPairs, pairs, pairs_header(cfg, g));
  log << "mined " << pairs.pairs.size() << " pairs (epsilon " << fmt("%.6g", pairs.epsilon) << ", pool "
      << pairs.candidate_pool << ") in " << fmt("%.3f", seconds_since(t0)) << " s\n";
}

gcn::Metrics cmd_train(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  prepare_output(cfg);
  const Graph g = load_run_graph(cfg);

  PositivePairSet pairs;
  if (cfg.train.lambda != 0.0) {
    const fs::path pairs_path = cfg.output_dir / artifacts::kPairs;
    if (!fs::exists(pairs_path)) throw data_error("no pairs file in " + cfg.output_dir.string() + "; run `mine` first");
    std::map<std::string, std::string> header;
    pairs = read_pairs(pairs_path, &header);
    require_match(header, "config_hash", cfg.mine_hash(), pairs_path, "mine");
    require_match(header, "graph_hash", hex64(g.content_hash()), pairs_path, "mine");
  } else {
    log << "lambda = 0: baseline training, pairs not used\n";
  }

  const auto t0 = Clock::now();
  const auto result = train(g, pairs, cfg);
  std::ofstream out(cfg.output_dir / artifacts::kMetrics);
  if (!out) throw data_error("cannot write metrics");
  out << "# config_hash=" << cfg.train_hash() << '\n'
      << "split_seed=" << cfg.seed << '\n'
      << "lambda=" << cfg.get("lambda") << '\n'
      << "pairs=" << pairs.pairs.size() << '\n'
      << result.metrics.key_values();
  result.metrics.write_curve_csv(cfg.output_dir / artifacts::kCurve);
  gcn::save_checkpoint(cfg.output_dir / artifacts::kModel, result.params);
  write_meta(cfg.output_dir / artifacts::kModelMeta, {{"stage", "train"}, {"config_hash", cfg.train_hash()}});
  log << "test accuracy " << fmt("%.4f", result.metrics.test_accuracy) << " (val " << fmt("%.4f", result.metrics.val_accuracy)
      << ", best epoch " << result.metrics.best_epoch << ", " << result.metrics.epochs_run << " epochs, "
      << fmt("%.2f", seconds_since(t0)) << " s)\n";
  return result.metrics;
}

std::vector<SweepRow> cmd_sweep(const RunConfig& base, const SweepSpec& sweep, std::ostream& log) {
  base.validate();
  if (sweep.values.empty()) throw config_error("sweep has no values");
  prepare_output(base);
  const Graph g = load_run_graph(base);
  const std::string key = sweep.axis_key();

  // Extractions keyed by extract hash so that delta / lambda sweeps extract once.
  std::map<std::string, PIStore> stores;
  auto store_for = [&](const RunConfig& cfg) -> const PIStore& {
    auto it = stores.find(cfg.extract_hash());
    if (it == stores.end())
      it = stores.emplace(cfg.extract_hash(), extract_topology(g, topology_options(cfg), cache_directory(cfg), &log).store)
               .first;
    return it->second;
  };

  std::vector<SweepRow> rows;
  auto run = [&](RunConfig cfg, const std::string& label) {
    SweepRow row;
    row.value = label;
    PositivePairSet pairs;
    if (cfg.train.lambda != 0.0) pairs = mine(g, store_for(cfg), cfg);
    row.pairs = pairs.pairs.size();
    row.metrics = train(g, pairs, cfg).metrics;
    log << key << '=' << label << ": test " << fmt("%.4f", row.metrics.test_accuracy) << ", pairs " << row.pairs << '\n';
    rows.push_back(std::move(row));
  };

  for (const auto& value : sweep.values) {
    RunConfig cfg = base;
    cfg.set(key, value);
    cfg.validate();
    run(cfg, value);
  }
  RunConfig original = base;
  original.train.lambda = 0.0;
  run(original, "original");

  const fs::path tsv = base.output_dir / ("sweep_" + key + ".tsv");
  std::ofstream out(tsv);
  if (!out) throw data_error("cannot write " + tsv.string());
  out << "# config_hash=" << base.train_hash() << '\n'
      << key << "\ttest_accuracy\tval_accuracy\ttrain_accuracy\tbest_epoch\tpairs\n";
  for (const auto& r : rows)
    out << r.value << '\t' << fmt("%.6f", r.metrics.test_accuracy) << '\t' << fmt("%.6f", r.metrics.val_accuracy) << '\t'
        << fmt("%.6f", r.metrics.train_accuracy) << '\t' << r.metrics.best_epoch << '\t' << r.pairs << '\n';

  // Dataset x value grid, test accuracy in percent.
  std::ostringstream md;
  const std::string dataset = base.edges.parent_path().filename().string().empty() ? base.edges.stem().string()
                                                                                    : base.edges.parent_path().filename().string();
  md << "| Dataset |";
  for (const auto& r : rows) md << ' ' << r.value << " |";
  md << "\n|---|";
  for (std::size_t i = 0; i < rows.size(); ++i) md << "---|";
  md << "\n| " << dataset << " |";
  for (const auto& r : rows) md << ' ' << fmt("%.1f", 100.0 * r.metrics.test_accuracy) << " |";
  md << '\n';
  std::ofstream(base.output_dir / ("sweep_" + key + ".md")) << md.str();
  log << md.str();
  return rows;
}

void cmd_report(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = cfg.output_dir;
  if (!fs::is_directory(dir)) throw config_error("output directory " + dir.string() + " does not exist");
  std::ostringstream md;
  md << "# Run report\n\n";
  auto section = [&](const char* title, const fs::path& path, bool fenced) {
    if (!fs::exists(path)) return;
    std::ifstream in(path);
    std::ostringstream body;
    body << in.rdbuf();
    md << "## " << title << "\n\n";
    if (fenced) md << "```\n";
    md << body.str();
    if (fenced) md << "```\n";
    md << '\n';
  };
  section("Configuration", dir / artifacts::kConfig, true);
  section("Dataset statistics and neighbor bias", dir / artifacts::kStats, true);
  section("Extraction", dir / artifacts::kStoreMeta, true);
  if (fs::exists(dir / artifacts::kPairs)) {
    std::map<std::string, std::string> header;
    const auto pairs = read_pairs(dir / artifacts::kPairs, &header);
    md << "## Positive pairs\n\n```\n";
    for (const auto& [k, v] : header) md << k << '=' << v << '\n';
    md << "```\n\n";
  }
  section("Training metrics", dir / artifacts::kMetrics, true);
  for (const char* axis : {"delta", "lambda", "resolution", "filtration"})
    section((std::string("Sweep over ") + axis).c_str(), dir / (std::string("sweep_") + axis + ".md"), false);

  const fs::path out = dir / artifacts::kReport;
  std::ofstream(out) << md.str();
  log << "wrote " << out.string() << '\n';
}

}  // namespace topo
