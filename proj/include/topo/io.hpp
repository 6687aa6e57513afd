#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "topo/graph.hpp"

namespace topo::io {

namespace fs = std::filesystem;

/// Tab-separated `u<TAB>v` lines, 0-based ids, `#` comments ignored.
std::vector<Edge> read_edge_list(const fs::path& path);
void write_edge_list(const fs::path& path, const Graph& g);

/// `node_id<TAB>class_id` lines. Nodes without a line get label -1 (rejected later).
std::vector<int> read_labels(const fs::path& path, std::size_t num_nodes);
void write_labels(const fs::path& path, const std::vector<int>& labels);

/// Binary feature matrix: "TEFX", u64 rows, u64 cols, rows*cols float32 row-major (little-endian).
Eigen::MatrixXf read_features(const fs::path& path);
void write_features(const fs::path& path, const Eigen::MatrixXf& features);

struct DatasetPaths {
  fs::path edges;
  fs::path labels;    // optional
  fs::path features;  // optional
};

/// Loads edges, labels, and features; node count is the max over all three sources.
/// With `lcc`, only the largest connected component is kept and relabelled.
Graph load_dataset(const DatasetPaths& paths, bool lcc);

// Little-endian binary helpers shared by the binary artifact formats.
void write_u64(std::ostream& out, std::uint64_t v);
void write_f32(std::ostream& out, float v);
std::uint64_t read_u64(std::istream& in);
float read_f32(std::istream& in);
void expect_magic(std::istream& in, const char (&magic)[5], const fs::path& path);

}  // namespace topo::io
