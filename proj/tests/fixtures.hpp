// Random instances shared by the unit and acceptance tests.
#pragma once

#include <random>

#include "oracles.hpp"
#include "topo/gcn.hpp"

namespace fixture {

using topo::NodeId;

struct GradientInstance {
  topo::Graph graph;
  Eigen::MatrixXd x;
  std::vector<int> labels;
  std::vector<NodeId> train;
  topo::gcn::SslBatch batch;
  topo::gcn::ModelParams<double> params;
  topo::gcn::TrainConfig cfg;
};

/// 10 nodes, 4 features, 3 positive pairs with fixed negatives.
inline GradientInstance gradient_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GradientInstance in;
  in.graph = oracle::random_graph(rng, 10, 0.3);
  std::normal_distribution<double> z;
  in.x = Eigen::MatrixXd::NullaryExpr(10, 4, [&] { return z(rng); });
  std::uniform_int_distribution<int> cls(0, 2);
  for (int v = 0; v < 10; ++v) in.labels.push_back(v < 3 ? v : cls(rng));
  in.train = {0, 1, 2, 4, 6, 8};
  in.batch.pairs = {{0, 5}, {3, 7}, {2, 9}};
  in.batch.negatives = {{1, 6, 8}, {2, 4}, {0, 3, 5, 7}};
  in.batch.weights = {1.0, 0.5, 2.0};
  in.params = topo::gcn::init_params<double>(4, 5, 3, rng);
  in.cfg.lambda = 0.7;
  in.cfg.weight_decay = 5e-3;
  return in;
}

struct GradientCheck {
  double w1 = 0.0;
  double w2 = 0.0;
  double worst() const { return std::max(w1, w2); }
};

inline GradientCheck check_gradients(const GradientInstance& in) {
  using namespace topo::gcn;
  const auto a = normalize_adjacency<double>(in.graph);
  const Eigen::MatrixXd ax = a * in.x;
  Gradients<double> g;
  joint_objective<double>(in.params, a, ax, in.labels, in.train, in.batch, in.cfg, &g);
  auto loss_w1 = [&](const Eigen::MatrixXd& w1) {
    auto p = in.params;
    p.w1 = w1;
    return joint_objective<double>(p, a, ax, in.labels, in.train, in.batch, in.cfg).total;
  };
  auto loss_w2 = [&](const Eigen::MatrixXd& w2) {
    auto p = in.params;
    p.w2 = w2;
    return joint_objective<double>(p, a, ax, in.labels, in.train, in.batch, in.cfg).total;
  };
  return {oracle::relative_error(g.w1, oracle::central_difference(loss_w1, in.params.w1)),
          oracle::relative_error(g.w2, oracle::central_difference(loss_w2, in.params.w2))};
}

}  // namespace fixture
