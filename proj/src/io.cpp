#include "topo/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace topo::io {
namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw data_error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw data_error("cannot write " + path.string());
  return out;
}

bool skip_line(const std::string& line) {
  auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

template <typename T>
T parse_field(std::string_view tok, const fs::path& path, std::size_t lineno) {
  T v{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw data_error(path.string() + ":" + std::to_string(lineno) + ": bad field '" + std::string(tok) + "'");
  return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == '\t' || line[i] == ' ' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != '\t' && line[j] != ' ' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::vector<Edge> read_edge_list(const fs::path& path) {
  auto in = open_in(path);
  std::vector<Edge> edges;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (skip_line(line)) continue;
    auto tok = split_ws(line);
    if (tok.size() < 2) throw data_error(path.string() + ":" + std::to_string(lineno) + ": expected u<TAB>v");
    edges.emplace_back(parse_field<NodeId>(tok[0], path, lineno), parse_field<NodeId>(tok[1], path, lineno));
  }
  return edges;
}

void write_edge_list(const fs::path& path, const Graph& g) {
  auto out = open_out(path);
  for (const auto& [u, v] : g.edges()) out << u << '\t' << v << '\n';
}

std::vector<int> read_labels(const fs::path& path, std::size_t num_nodes) {
  auto in = open_in(path);
  std::vector<int> labels(num_nodes, -1);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (skip_line(line)) continue;
    auto tok = split_ws(line);
    if (tok.size() < 2) throw data_error(path.string() + ":" + std::to_string(lineno) + ": expected node<TAB>class");
    auto node = parse_field<std::size_t>(tok[0], path, lineno);
    auto cls = parse_field<int>(tok[1], path, lineno);
    if (cls < 0) throw data_error(path.string() + ":" + std::to_string(lineno) + ": negative class id");
    if (node >= labels.size()) labels.resize(node + 1, -1);
    labels[node] = cls;
  }
  return labels;
}

void write_labels(const fs::path& path, const std::vector<int>& labels) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << '\t' << labels[i] << '\n';
}

void write_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }
void write_f32(std::ostream& out, float v) { out.write(reinterpret_cast<const char*>(&v), 4); }

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 8)) throw data_error("truncated binary file");
  return v;
}

float read_f32(std::istream& in) {
  float v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 4)) throw data_error("truncated binary file");
  return v;
}

void expect_magic(std::istream& in, const char (&magic)[5], const fs::path& path) {
  char buf[4];
  if (!in.read(buf, 4) || std::memcmp(buf, magic, 4) != 0)
    throw data_error(path.string() + ": bad magic, expected " + std::string(magic, 4));
}

Eigen::MatrixXf read_features(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  expect_magic(in, "TEFX", path);
  const auto rows = read_u64(in);
  const auto cols = read_u64(in);
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(rows, cols);
  const auto bytes = static_cast<std::streamsize>(rows * cols * sizeof(float));
  if (!in.read(reinterpret_cast<char*>(m.data()), bytes)) throw data_error(path.string() + ": truncated feature data");
  return m;
}

void write_features(const fs::path& path, const Eigen::MatrixXf& features) {
  auto out = open_out(path, std::ios::binary);
  out.write("TEFX", 4);
  write_u64(out, static_cast<std::uint64_t>(features.rows()));
  write_u64(out, static_cast<std::uint64_t>(features.cols()));
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = features;
  out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(float)));
}

Graph load_dataset(const DatasetPaths& paths, bool lcc) {
  auto edges = read_edge_list(paths.edges);
  std::size_t n = 0;
  for (const auto& [u, v] : edges) n = std::max<std::size_t>(n, std::max(u, v) + 1);

  Eigen::MatrixXf features;
  if (!paths.features.empty()) {
    features = read_features(paths.features);
    n = std::max<std::size_t>(n, features.rows());
  }
  std::vector<int> labels;
  if (!paths.labels.empty()) {
    labels = read_labels(paths.labels, n);
    n = std::max(n, labels.size());
    labels.resize(n, -1);
    for (std::size_t i = 0; i < n; ++i)
      if (labels[i] < 0) throw data_error(paths.labels.string() + ": node " + std::to_string(i) + " has no label");
  }

  Graph g = load_graph(edges, n);
  if (features.size() > 0) {
    if (static_cast<std::size_t>(features.rows()) != n)
      throw data_error("feature rows (" + std::to_string(features.rows()) + ") do not cover " + std::to_string(n) + " nodes");
    g.set_features(std::move(features));
  }
  if (!labels.empty()) g.set_labels(std::move(labels));
  return lcc ? largest_connected_component(g) : g;
}

}  // namespace topo::io
