#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "topo/graph.hpp"
#include "topo/mining.hpp"

namespace topo::gcn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

/// D^{-1/2} (A + I) D^{-1/2}.
template <typename Scalar>
SparseMatrix<Scalar> normalize_adjacency(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(g.num_nodes() + 2 * g.num_edges());
  std::vector<Scalar> inv_sqrt(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    inv_sqrt[v] = Scalar(1) / std::sqrt(static_cast<Scalar>(g.degree(v) + 1));
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    triplets.emplace_back(v, v, inv_sqrt[v] * inv_sqrt[v]);
    for (NodeId w : g.neighbors(v)) triplets.emplace_back(v, w, inv_sqrt[v] * inv_sqrt[w]);
  }
  SparseMatrix<Scalar> a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

template <typename Scalar>
struct ModelParams {
  Matrix<Scalar> w1;  // feature_dim x hidden_dim
  Matrix<Scalar> w2;  // hidden_dim x num_classes
};

/// Glorot-uniform initialization.
template <typename Scalar>
ModelParams<Scalar> init_params(Eigen::Index features, Eigen::Index hidden, Eigen::Index classes, std::mt19937_64& rng) {
  auto glorot = [&rng](Eigen::Index rows, Eigen::Index cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    Matrix<Scalar> m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = static_cast<Scalar>(u(rng));
    return m;
  };
  ModelParams<Scalar> p;
  p.w1 = glorot(features, hidden);
  p.w2 = glorot(hidden, classes);
  return p;
}

/// Intermediates of one forward pass; kept for backpropagation.
template <typename Scalar>
struct Activations {
  Matrix<Scalar> pre;      // Â X W1
  Matrix<Scalar> hidden;   // relu(pre), the embeddings
  Matrix<Scalar> mixed;    // Â H (after optional dropout mask)
  Matrix<Scalar> logits;   // Â H W2
  Matrix<Scalar> dropout;  // hidden-layer mask (empty when unused)
};

/// Two-layer GCN on a pre-propagated input `ax` = Â X.
template <typename Scalar>
Activations<Scalar> forward_propagated(const ModelParams<Scalar>& p, const SparseMatrix<Scalar>& a,
                                       const Matrix<Scalar>& ax, const Matrix<Scalar>* dropout_mask = nullptr) {
  if (ax.cols() != p.w1.rows() || p.w1.cols() != p.w2.rows() || a.rows() != ax.rows())
    throw std::invalid_argument("gcn forward: shape mismatch");
  Activations<Scalar> act;
  act.pre = ax * p.w1;
  act.hidden = act.pre.cwiseMax(Scalar(0));
  if (dropout_mask) {
    act.dropout = *dropout_mask;
    act.mixed = a * act.hidden.cwiseProduct(act.dropout);
  } else {
    act.mixed = a * act.hidden;
  }
  act.logits = act.mixed * p.w2;
  return act;
}

/// H = relu(Â X W1); logits = Â H W2.
template <typename Scalar>
Activations<Scalar> forward(const ModelParams<Scalar>& p, const SparseMatrix<Scalar>& a, const Matrix<Scalar>& x) {
  if (a.cols() != x.rows()) throw std::invalid_argument("gcn forward: shape mismatch");
  const Matrix<Scalar> ax = a * x;
  return forward_propagated(p, a, ax);
}

enum class SslForm {
  InfoNCE,  // -log(e^{s+/t} / (e^{s+/t} + sum_w e^{s_w/t}))
  Literal,  // -log(e^{s+/t} / e^{s-/t}) with a single negative
};

/// Positive pairs (anchor u, positive v) with their sampled negatives.
struct SslBatch {
  std::vector<Edge> pairs;
  std::vector<std::vector<NodeId>> negatives;  // per pair
  std::vector<double> weights;                 // per pair; empty means 1
};

/// Mean contrastive loss over pairs on row-L2-normalized embeddings. If
/// `grad` is given it receives dLoss/dEmbeddings (same shape as embeddings).
template <typename Scalar>
Scalar ssl_loss(const Matrix<Scalar>& embeddings, const SslBatch& batch, Scalar tau, SslForm form = SslForm::InfoNCE,
                Matrix<Scalar>* grad = nullptr) {
  if (!(tau > Scalar(0))) throw config_error("tau must be > 0");
  if (grad) *grad = Matrix<Scalar>::Zero(embeddings.rows(), embeddings.cols());
  if (batch.pairs.empty()) return Scalar(0);

  const Eigen::Index n = embeddings.rows();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> norms = embeddings.rowwise().norm();
  auto unit = [&](Eigen::Index r) -> Eigen::Matrix<Scalar, 1, Eigen::Dynamic> {
    return norms[r] > Scalar(1e-12) ? Eigen::Matrix<Scalar, 1, Eigen::Dynamic>(embeddings.row(r) / norms[r])
                                    : Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Zero(embeddings.cols());
  };
  Matrix<Scalar> dz;  // gradient w.r.t. normalized rows
  if (grad) dz = Matrix<Scalar>::Zero(n, embeddings.cols());

  const Scalar inv_pairs = Scalar(1) / static_cast<Scalar>(batch.pairs.size());
  Scalar total(0);
  std::vector<Scalar> logits;
  for (std::size_t k = 0; k < batch.pairs.size(); ++k) {
    const auto [u, v] = batch.pairs[k];
    const Scalar weight = batch.weights.empty() ? Scalar(1) : static_cast<Scalar>(batch.weights[k]);
    const auto& negs = batch.negatives[k];
    const auto zu = unit(u);
    const auto zv = unit(v);
    const Scalar s_pos = zu.dot(zv) / tau;

    if (form == SslForm::Literal) {
      if (negs.empty()) continue;
      const auto zw = unit(negs.front());
      const Scalar s_neg = zu.dot(zw) / tau;
      total += weight * (s_neg - s_pos);
      if (grad) {
        const Scalar c = weight * inv_pairs / tau;
        dz.row(u) += c * (zw - zv);
        dz.row(v) -= c * zu;
        dz.row(negs.front()) += c * zu;
      }
      continue;
    }

    // Log-sum-exp over the positive and negatives, shifted for stability.
    logits.assign(1, s_pos);
    for (NodeId w : negs) logits.push_back(zu.dot(unit(w)) / tau);
    const Scalar peak = *std::max_element(logits.begin(), logits.end());
    Scalar denom(0);
    for (Scalar s : logits) denom += std::exp(s - peak);
    total += weight * (std::log(denom) + peak - s_pos);

    if (grad) {
      const Scalar c = weight * inv_pairs / tau;
      // d/ds_pos = p_pos - 1, d/ds_w = p_w
      const Scalar p_pos = std::exp(logits[0] - peak) / denom;
      dz.row(u) += c * (p_pos - Scalar(1)) * zv;
      dz.row(v) += c * (p_pos - Scalar(1)) * zu;
      for (std::size_t j = 0; j < negs.size(); ++j) {
        const Scalar p_w = std::exp(logits[j + 1] - peak) / denom;
        const auto zw = unit(negs[j]);
        dz.row(u) += c * p_w * zw;
        dz.row(negs[j]) += c * p_w * zu;
      }
    }
  }

  if (grad) {
    // Back through z = h / |h|: dh = (dz - z (z . dz)) / |h|.
    for (Eigen::Index r = 0; r < n; ++r) {
      if (norms[r] <= Scalar(1e-12) || dz.row(r).isZero(0)) continue;
      const auto z = unit(r);
      grad->row(r) = (dz.row(r) - z * z.dot(dz.row(r))) / norms[r];
    }
  }
  return total * inv_pairs;
}

struct TrainConfig {
  Eigen::Index hidden_dim = 16;
  double lambda = 0.1;
  double tau = 0.5;
  std::size_t epochs = 1000;
  std::size_t patience = 200;
  double min_improvement = 1e-5;
  double learning_rate = 0.01;
  double weight_decay = 5e-4;  // on W1
  std::size_t negatives_per_pair = 10;
  double dropout = 0.0;        // on the hidden layer
  SslForm ssl_form = SslForm::InfoNCE;
  bool weight_pairs = false;   // weight pairs by (epsilon - d) / epsilon
  std::uint64_t seed = 0;

  void validate() const;
};

struct LossTerms {
  double task = 0.0;
  double ssl = 0.0;
  double decay = 0.0;
  double total = 0.0;
};

template <typename Scalar>
struct Gradients {
  Matrix<Scalar> w1;
  Matrix<Scalar> w2;
};

/// Joint objective: mean cross-entropy on `train` + weight_decay/2 |W1|^2 +
/// lambda * ssl_loss(H). Gradients are analytic.
template <typename Scalar>
LossTerms joint_objective(const ModelParams<Scalar>& p, const SparseMatrix<Scalar>& a, const Matrix<Scalar>& ax,
                          std::span<const int> labels, std::span<const NodeId> train, const SslBatch& batch,
                          const TrainConfig& cfg, Gradients<Scalar>* grads = nullptr,
                          const Matrix<Scalar>* dropout_mask = nullptr, Activations<Scalar>* act_out = nullptr) {
  auto act = forward_propagated(p, a, ax, dropout_mask);
  const Eigen::Index classes = p.w2.cols();
  LossTerms loss;

  Matrix<Scalar> dlogits = Matrix<Scalar>::Zero(act.logits.rows(), classes);
  const Scalar inv_train = Scalar(1) / static_cast<Scalar>(train.size());
  for (NodeId v : train) {
    auto row = act.logits.row(v);
    const Scalar peak = row.maxCoeff();
    Eigen::Matrix<Scalar, 1, Eigen::Dynamic> e = (row.array() - peak).exp();
    const Scalar z = e.sum();
    loss.task += static_cast<double>(std::log(z) + peak - row[labels[v]]) / static_cast<double>(train.size());
    if (grads) {
      dlogits.row(v) = e / z * inv_train;
      dlogits(v, labels[v]) -= inv_train;
    }
  }
  loss.decay = 0.5 * cfg.weight_decay * static_cast<double>(p.w1.squaredNorm());

  Matrix<Scalar> dh_ssl;
  const bool use_ssl = cfg.lambda != 0.0 && !batch.pairs.empty();
  if (use_ssl)
    loss.ssl = static_cast<double>(ssl_loss<Scalar>(act.hidden, batch, static_cast<Scalar>(cfg.tau), cfg.ssl_form,
                                                    grads ? &dh_ssl : nullptr));
  loss.total = loss.task + loss.decay + cfg.lambda * loss.ssl;

  if (grads) {
    grads->w2 = act.mixed.transpose() * dlogits;
    Matrix<Scalar> dmixed = dlogits * p.w2.transpose();
    Matrix<Scalar> dh = a.transpose() * dmixed;
    if (dropout_mask) dh = dh.cwiseProduct(*dropout_mask);
    if (use_ssl) dh += static_cast<Scalar>(cfg.lambda) * dh_ssl;
    const Matrix<Scalar> dpre = dh.cwiseProduct((act.pre.array() > Scalar(0)).template cast<Scalar>().matrix());
    grads->w1 = ax.transpose() * dpre + static_cast<Scalar>(cfg.weight_decay) * p.w1;
  }
  if (act_out) *act_out = std::move(act);
  return loss;
}

struct Split {
  std::vector<NodeId> train, val, test;
};

/// Per-class train sample, then val / test drawn from the remainder (seeded).
/// Nodes with a negative label are left out of every mask.
/// When fewer nodes remain than requested, val takes half and test the rest.
Split make_split(std::span<const int> labels, std::size_t train_per_class, std::size_t val_size, std::size_t test_size,
                 std::uint64_t seed);

struct EpochRecord {
  double task_loss = 0.0;
  double ssl_loss = 0.0;
  double total_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

struct Metrics {
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  std::vector<EpochRecord> curve;

  std::string key_values() const;
  void write_curve_csv(const std::filesystem::path& path) const;
};

template <typename Scalar>
double accuracy(const Matrix<Scalar>& logits, std::span<const int> labels, std::span<const NodeId> nodes) {
  if (nodes.empty()) return 0.0;
  std::size_t hits = 0;
  for (NodeId v : nodes) {
    Eigen::Index arg;
    logits.row(v).maxCoeff(&arg);
    hits += (arg == labels[v]);
  }
  return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

template <typename Scalar>
struct TrainResult {
  ModelParams<Scalar> params;
  Metrics metrics;
};

/// Full-batch Adam on the joint objective; negatives are resampled each epoch.
/// Stops once the total loss fails to improve by min_improvement for `patience`
/// epochs and returns the parameters with the best validation accuracy (latest on ties).
template <typename Scalar>
TrainResult<Scalar> joint_train(const Graph& g, const Matrix<Scalar>& x, std::span<const int> labels,
                                const Split& split, const PositivePairSet& pairs, const TrainConfig& cfg);

extern template TrainResult<double> joint_train<double>(const Graph&, const Matrix<double>&, std::span<const int>,
                                                        const Split&, const PositivePairSet&, const TrainConfig&);
extern template TrainResult<float> joint_train<float>(const Graph&, const Matrix<float>&, std::span<const int>,
                                                      const Split&, const PositivePairSet&, const TrainConfig&);

/// Negatives for anchor u: uniform over nodes other than u, v and u's neighbors.
std::vector<NodeId> sample_negatives(const Graph& g, NodeId u, NodeId v, std::size_t count, std::mt19937_64& rng);

/// Checkpoint: "TGCN", u64 w1 rows, u64 w1 cols, u64 w2 rows, u64 w2 cols, float32 W1 then W2 (row-major).
void save_checkpoint(const std::filesystem::path& path, const ModelParams<double>& p);
ModelParams<double> load_checkpoint(const std::filesystem::path& path);

}  // namespace topo::gcn
