#include <random>

#include "topo/mining.hpp"

namespace topo {

void PlantedParams::validate() const {
  if (connector_length < 1) throw config_error("connector_length must be >= 1");
  if (motif_count > 0 && motif == MotifType::Star && motif_size < 1) throw config_error("star motifs need >= 1 leaf");
  if (motif_count > 0 && motif == MotifType::Clique && motif_size < 3) throw config_error("clique motifs need >= 3 nodes");
  if (motif_count > 0 && motif == MotifType::Rings && motif_size < 1) throw config_error("ring motifs need >= 1 ring");
  if (motif == MotifType::Mixed && motif_size < 3) throw config_error("mixed motifs need motif_size >= 3");
  if (background_nodes > 0 && communities < 1) throw config_error("background needs >= 1 community");
  if (background_nodes > 0 && background_nodes < static_cast<std::size_t>(communities))
    throw config_error("fewer background nodes than communities");
  if (feature_dim < static_cast<std::size_t>(std::max(communities, 1))) throw config_error("feature_dim < communities");
  if (p_in < 0 || p_in > 1 || p_out < 0 || p_out > 1) throw config_error("edge probabilities must lie in [0, 1]");
  if (background_nodes == 0 && motif_count == 0) throw config_error("empty planted graph");
}

PlantedGraph generate_planted_graph(std::uint64_t seed, const PlantedParams& params) {
  params.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  const int classes_bg = params.background_nodes > 0 ? params.communities : 0;
  std::vector<Edge> edges;
  std::vector<int> labels;
  std::vector<int> feature_class;  // community whose centroid a node's features follow
  std::vector<bool> in_motif;

  auto add_node = [&](int label, int fclass, bool motif) {
    labels.push_back(label);
    feature_class.push_back(fclass);
    in_motif.push_back(motif);
    return static_cast<NodeId>(labels.size() - 1);
  };

  for (std::size_t i = 0; i < params.background_nodes; ++i) {
    const int c = static_cast<int>(i % params.communities);
    add_node(c, c, false);
  }
  for (NodeId i = 0; i < params.background_nodes; ++i)
    for (NodeId j = i + 1; j < params.background_nodes; ++j) {
      const double p = labels[i] == labels[j] ? params.p_in : params.p_out;
      if (unit(rng) < p) edges.emplace_back(i, j);
    }

  PlantedGraph out;
  std::uniform_int_distribution<int> any_class(0, std::max(classes_bg, 1) - 1);
  std::uniform_int_distribution<std::size_t> any_bg(0, params.background_nodes ? params.background_nodes - 1 : 0);

  for (std::size_t m = 0; m < params.motif_count; ++m) {
    const int kind = params.motif == MotifType::Star     ? 0
                     : params.motif == MotifType::Clique ? 1
                     : params.motif == MotifType::Rings  ? 2
                                                          : static_cast<int>(m % 2);
    const int label = classes_bg + (params.motif == MotifType::Mixed ? kind : 0);
    // Motif features mimic a random community so they carry no label signal.
    const int disguise = any_class(rng);
    const NodeId center = add_node(label, disguise, true);
    out.centers.push_back(center);
    out.motif_kind.push_back(kind);
    std::vector<NodeId> body{center};
    const std::size_t extra = kind == 0 ? params.motif_size : kind == 1 ? params.motif_size - 1 : 4 * params.motif_size;
    for (std::size_t k = 0; k < extra; ++k) body.push_back(add_node(label, disguise, true));
    if (kind == 0) {
      for (std::size_t k = 1; k < body.size(); ++k) edges.emplace_back(center, body[k]);
    } else if (kind == 2) {
      for (std::size_t r = 0; r < params.motif_size; ++r) {
        const NodeId* ring = &body[1 + 4 * r];
        edges.emplace_back(center, ring[0]);
        for (int k = 0; k < 3; ++k) edges.emplace_back(ring[k], ring[k + 1]);
        edges.emplace_back(ring[3], center);
      }
    } else {
      for (std::size_t a = 0; a < body.size(); ++a)
        for (std::size_t b = a + 1; b < body.size(); ++b) edges.emplace_back(body[a], body[b]);
    }

    // Connector path from the center: to a background node, or to the previous center.
    NodeId anchor;
    int path_label;
    if (params.background_nodes > 0) {
      anchor = static_cast<NodeId>(any_bg(rng));
      path_label = labels[anchor];
    } else if (m > 0) {
      anchor = out.centers[m - 1];
      path_label = labels[anchor];
    } else {
      continue;
    }
    NodeId prev = center;
    for (std::size_t k = 1; k < params.connector_length; ++k) {
      const NodeId p = add_node(path_label, std::max(path_label, 0) % std::max(classes_bg, 1), false);
      edges.emplace_back(prev, p);
      prev = p;
    }
    edges.emplace_back(prev, anchor);
  }

  const std::size_t n = labels.size();
  out.graph = load_graph(edges, n);
  out.in_motif = in_motif;

  Eigen::MatrixXf x(n, params.feature_dim);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t f = 0; f < params.feature_dim; ++f) {
      double centroid = static_cast<int>(f) == feature_class[v] ? params.feature_signal : 0.0;
      if (in_motif[v] && f == static_cast<std::size_t>(labels[v]) % params.feature_dim) centroid += params.motif_signal;
      x(v, f) = static_cast<float>(centroid + params.feature_noise * noise(rng));
    }
  out.graph.set_features(std::move(x));
  out.graph.set_labels(std::move(labels));

  for (std::size_t a = 0; a < out.centers.size(); ++a)
    for (std::size_t b = a + 1; b < out.centers.size(); ++b)
      if (out.motif_kind[a] == out.motif_kind[b])
        out.planted_pairs.emplace_back(std::min(out.centers[a], out.centers[b]), std::max(out.centers[a], out.centers[b]));
  std::sort(out.planted_pairs.begin(), out.planted_pairs.end());
  return out;
}

}  // namespace topo
