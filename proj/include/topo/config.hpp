#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "topo/gcn.hpp"
#include "topo/mining.hpp"
#include "topo/vectorize.hpp"

namespace topo {

enum class FiltrationKind { Ricci, Degree };

std::string to_string(FiltrationKind k);

/// Everything a run depends on. Stored as flat `key=value` lines.
struct RunConfig {
  std::filesystem::path edges;
  std::filesystem::path features;
  std::filesystem::path labels;
  bool lcc = false;

  FiltrationKind filtration = FiltrationKind::Ricci;
  unsigned ego_radius = 2;
  double alpha = 0.5;
  PIConfig pi;

  MiningConfig mining;
  gcn::TrainConfig train;
  std::size_t train_per_class = 20;
  std::size_t val_size = 500;
  std::size_t test_size = 1000;
  std::size_t bias_budget = 2'000'000;

  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool reproducible = false;

  /// Sets one key from its text form; unknown keys and bad values are config errors.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::string>& keys();

  std::string to_text() const;
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  void validate() const;

  /// Hashes over the keys each stage's output depends on (upstream keys included).
  std::string extract_hash() const;
  std::string mine_hash() const;
  std::string train_hash() const;
};

enum class SweepAxis { Delta, Lambda, Resolution, Filtration };

struct SweepSpec {
  SweepAxis axis = SweepAxis::Lambda;
  std::vector<std::string> values;

  /// Defaults: delta {3,4,5}, lambda {0.1,0.3,0.5,0.7,0.9,1}, resolution {0.05,0.1}, filtration {ricci,degree}.
  static SweepSpec defaults(SweepAxis axis);
  static SweepAxis parse_axis(const std::string& name);
  std::string axis_key() const;
};

}  // namespace topo
