// Command-line front end: stats / extract / mine / train / sweep / report,
// plus `generate` for planted-equivalence synthetic datasets.
#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "topo/io.hpp"
#include "topo/pipeline.hpp"

namespace {

struct ConfigOptions {
  std::string config_file;
  std::map<std::string, std::string> overrides;
};

// Every RunConfig key doubles as `--key value` (dashes or underscores).
void add_config_options(CLI::App* cmd, ConfigOptions& opts) {
  cmd->add_option("-c,--config", opts.config_file, "key=value config file")->check(CLI::ExistingFile);
  for (const auto& key : topo::RunConfig::keys()) {
    if (key == "reproducible") continue;
    std::string dashed = key;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    std::string names = "--" + dashed;
    if (dashed != key) names += ",--" + key;
    cmd->add_option_function<std::string>(names, [&opts, key](const std::string& v) { opts.overrides[key] = v; },
                                          "override config key `" + key + "`");
  }
  cmd->add_flag_callback("--reproducible", [&opts] { opts.overrides["reproducible"] = "true"; },
                         "single worker, deterministic reductions");
}

topo::RunConfig resolve(const ConfigOptions& opts) {
  topo::RunConfig cfg = opts.config_file.empty() ? topo::RunConfig{} : topo::RunConfig::load(opts.config_file);
  // Mode switches first so that dependent values land in the right variant.
  static const std::vector<std::string> first{"epsilon_mode", "candidates"};
  for (const auto& key : first)
    if (auto it = opts.overrides.find(key); it != opts.overrides.end()) cfg.set(it->first, it->second);
  for (const auto& [k, v] : opts.overrides)
    if (std::find(first.begin(), first.end(), k) == first.end()) cfg.set(k, v);
  if (cfg.reproducible) {
    cfg.threads = 1;
    cfg.mining.threads = 1;
  }
  return cfg;
}

struct GenerateOptions {
  std::string out = "planted";
  std::uint64_t seed = 0;
  std::string motif = "star";
  topo::PlantedParams params;
};

void run_generate(const GenerateOptions& opt) {
  auto params = opt.params;
  if (opt.motif == "star") params.motif = topo::MotifType::Star;
  else if (opt.motif == "clique") params.motif = topo::MotifType::Clique;
  else if (opt.motif == "rings") params.motif = topo::MotifType::Rings;
  else if (opt.motif == "mixed") params.motif = topo::MotifType::Mixed;
  else throw topo::config_error("motif must be star, clique, rings or mixed");

  const auto planted = topo::generate_planted_graph(opt.seed, params);
  const std::filesystem::path dir = opt.out;
  std::filesystem::create_directories(dir);
  topo::io::write_edge_list(dir / "edges.tsv", planted.graph);
  topo::io::write_labels(dir / "labels.tsv", planted.graph.labels());
  topo::io::write_features(dir / "features.tefx", planted.graph.features());
  std::ofstream pairs(dir / "planted_pairs.tsv");
  pairs << "# seed=" << opt.seed << '\n';
  for (const auto& [u, v] : planted.planted_pairs) pairs << u << '\t' << v << '\n';
  std::cout << "wrote " << planted.graph.num_nodes() << " nodes, " << planted.graph.num_edges() << " edges, "
            << planted.planted_pairs.size() << " planted pairs to " << dir.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topology-guided self-supervised node classification"};
  app.require_subcommand(1);

  ConfigOptions stats_o, extract_o, mine_o, train_o, sweep_o, report_o;
  auto* stats = app.add_subcommand("stats", "homophily index and neighbor-bias table");
  auto* extract = app.add_subcommand("extract", "curvature, ego-net diagrams and persistence images");
  auto* mine = app.add_subcommand("mine", "long-range structurally equivalent positive pairs");
  auto* train = app.add_subcommand("train", "joint GCN training on the mined pairs");
  auto* sweep = app.add_subcommand("sweep", "one-axis parameter sweep with an `original` baseline row");
  auto* report = app.add_subcommand("report", "collect artifacts into report.md");
  add_config_options(stats, stats_o);
  add_config_options(extract, extract_o);
  add_config_options(mine, mine_o);
  add_config_options(train, train_o);
  add_config_options(sweep, sweep_o);
  add_config_options(report, report_o);

  std::string axis = "lambda";
  std::vector<std::string> values;
  sweep->add_option("--axis", axis, "delta | lambda | resolution | filtration")->capture_default_str();
  sweep->add_option("--values", values, "values to sweep (default: the standard grid for the axis)")->delimiter(',');

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "write a planted-equivalence synthetic dataset");
  generate->add_option("-o,--out", gen.out, "output directory")->capture_default_str();
  generate->add_option("--seed", gen.seed)->capture_default_str();
  generate->add_option("--motif", gen.motif, "star | clique | rings | mixed")->capture_default_str();
  generate->add_option("--background", gen.params.background_nodes)->capture_default_str();
  generate->add_option("--communities", gen.params.communities)->capture_default_str();
  generate->add_option("--p-in", gen.params.p_in)->capture_default_str();
  generate->add_option("--p-out", gen.params.p_out)->capture_default_str();
  generate->add_option("--motif-count", gen.params.motif_count)->capture_default_str();
  generate->add_option("--motif-size", gen.params.motif_size)->capture_default_str();
  generate->add_option("--connector-length", gen.params.connector_length)->capture_default_str();
  generate->add_option("--feature-dim", gen.params.feature_dim)->capture_default_str();
  generate->add_option("--feature-signal", gen.params.feature_signal)->capture_default_str();
  generate->add_option("--feature-noise", gen.params.feature_noise)->capture_default_str();
  generate->add_option("--motif-signal", gen.params.motif_signal, "extra feature mean marking motif members")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (stats->parsed()) topo::cmd_stats(resolve(stats_o), std::cerr);
    if (extract->parsed()) topo::cmd_extract(resolve(extract_o), std::cerr);
    if (mine->parsed()) topo::cmd_mine(resolve(mine_o), std::cerr);
    if (train->parsed()) topo::cmd_train(resolve(train_o), std::cerr);
    if (sweep->parsed()) {
      auto spec = topo::SweepSpec::defaults(topo::SweepSpec::parse_axis(axis));
      if (!values.empty()) spec.values = values;
      topo::cmd_sweep(resolve(sweep_o), spec, std::cerr);
    }
    if (report->parsed()) topo::cmd_report(resolve(report_o), std::cerr);
    if (generate->parsed()) run_generate(gen);
  } catch (const topo::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
