#include "topo/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "topo/io.hpp"

namespace topo::gcn {

void TrainConfig::validate() const {
  if (hidden_dim <= 0) throw config_error("hidden_dim must be > 0");
  if (lambda < 0) throw config_error("lambda must be >= 0");
  if (!(tau > 0)) throw config_error("tau must be > 0");
  if (epochs == 0 || patience == 0) throw config_error("epochs and patience must be > 0");
  if (!(learning_rate > 0)) throw config_error("learning_rate must be > 0");
  if (weight_decay < 0) throw config_error("weight_decay must be >= 0");
  if (dropout < 0 || dropout >= 1) throw config_error("dropout must lie in [0, 1)");
}

Split make_split(std::span<const int> labels, std::size_t train_per_class, std::size_t val_size, std::size_t test_size,
                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<NodeId> order(labels.size());
  std::iota(order.begin(), order.end(), 0u);
  std::shuffle(order.begin(), order.end(), rng);

  Split s;
  std::map<int, std::size_t> taken;
  std::vector<NodeId> rest;
  for (NodeId v : order) {
    if (labels[v] < 0) continue;  // unlabeled nodes are never scored
    if (taken[labels[v]] < train_per_class) {
      ++taken[labels[v]];
      s.train.push_back(v);
    } else {
      rest.push_back(v);
    }
  }
  std::size_t n_val = val_size, n_test = test_size;
  if (n_val + n_test > rest.size()) {
    n_val = std::min(val_size, rest.size() / 2);
    n_test = std::min(test_size, rest.size() - n_val);
  }
  s.val.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_val));
  s.test.assign(rest.begin() + static_cast<std::ptrdiff_t>(n_val),
                rest.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::vector<NodeId> sample_negatives(const Graph& g, NodeId u, NodeId v, std::size_t count, std::mt19937_64& rng) {
  std::vector<NodeId> out;
  const std::size_t n = g.num_nodes();
  if (n <= 2 + g.degree(u)) return out;
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  const std::size_t max_tries = 50 * count + 100;
  for (std::size_t tries = 0; out.size() < count && tries < max_tries; ++tries) {
    const NodeId w = pick(rng);
    if (w == u || w == v || g.has_edge(u, w)) continue;
    out.push_back(w);
  }
  return out;
}

std::string Metrics::key_values() const {
  std::ostringstream out;
  char buf[64];
  auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%.6f", v);
    out << key << '=' << buf << '\n';
  };
  put("train_accuracy", train_accuracy);
  put("val_accuracy", val_accuracy);
  put("test_accuracy", test_accuracy);
  out << "best_epoch=" << best_epoch << '\n' << "epochs_run=" << epochs_run << '\n';
  if (!curve.empty()) {
    put("final_task_loss", curve.back().task_loss);
    put("final_ssl_loss", curve.back().ssl_loss);
  }
  return out.str();
}

void Metrics::write_curve_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path.string());
  out << "epoch,task_loss,ssl_loss,total_loss,train_accuracy,val_accuracy\n";
  char buf[160];
  for (std::size_t e = 0; e < curve.size(); ++e) {
    const auto& r = curve[e];
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g,%.6f,%.6f\n", e, r.task_loss, r.ssl_loss, r.total_loss,
                  r.train_accuracy, r.val_accuracy);
    out << buf;
  }
}

namespace {

template <typename Scalar>
struct Adam {
  Matrix<Scalar> m, v;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  void step(Matrix<Scalar>& w, const Matrix<Scalar>& g, double lr, std::size_t t) {
    if (m.size() == 0) {
      m = Matrix<Scalar>::Zero(w.rows(), w.cols());
      v = Matrix<Scalar>::Zero(w.rows(), w.cols());
    }
    m = Scalar(beta1) * m + Scalar(1 - beta1) * g;
    v = Scalar(beta2) * v + Scalar(1 - beta2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    w.array() -= Scalar(lr) * (m.array() / Scalar(c1)) / ((v.array() / Scalar(c2)).sqrt() + Scalar(eps));
  }
};

}  // namespace

template <typename Scalar>
TrainResult<Scalar> joint_train(const Graph& g, const Matrix<Scalar>& x, std::span<const int> labels,
                                const Split& split, const PositivePairSet& pairs, const TrainConfig& cfg) {
  cfg.validate();
  if (split.train.empty()) throw data_error("empty train mask");
  if (static_cast<std::size_t>(x.rows()) != g.num_nodes() || labels.size() != g.num_nodes())
    throw data_error("features / labels do not match the graph");
  {
    std::vector<NodeId> all;
    for (const auto* part : {&split.train, &split.val, &split.test}) all.insert(all.end(), part->begin(), part->end());
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) throw data_error("train/val/test masks overlap");
  }

  const int classes = *std::max_element(labels.begin(), labels.end()) + 1;
  const auto a = normalize_adjacency<Scalar>(g);
  const Matrix<Scalar> ax = a * x;

  std::mt19937_64 rng(cfg.seed);
  TrainResult<Scalar> result;
  auto params = init_params<Scalar>(x.cols(), cfg.hidden_dim, classes, rng);
  result.params = params;
  // Separate stream so that lambda = 0 leaves the initialization stream untouched.
  std::mt19937_64 ssl_rng(cfg.seed ^ 0x5eed5eed5eedULL);
  std::bernoulli_distribution keep(1.0 - cfg.dropout);

  const bool use_ssl = cfg.lambda != 0.0 && !pairs.pairs.empty();
  if (cfg.lambda != 0.0 && pairs.pairs.empty()) std::fprintf(stderr, "warning: no positive pairs; SSL term is zero\n");
  SslBatch batch;
  if (use_ssl) {
    for (const auto& p : pairs.pairs) {
      batch.pairs.emplace_back(p.u, p.v);
      if (cfg.weight_pairs)
        batch.weights.push_back(pairs.epsilon > 0 ? (pairs.epsilon - p.distance) / pairs.epsilon : 1.0);
    }
    batch.negatives.resize(batch.pairs.size());
  }

  Adam<Scalar> adam1, adam2;
  double best_val = -1.0, best_loss = std::numeric_limits<double>::infinity();
  std::size_t stall = 0;
  Matrix<Scalar> mask;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (use_ssl)
      for (std::size_t k = 0; k < batch.pairs.size(); ++k)
        batch.negatives[k] =
            sample_negatives(g, batch.pairs[k].first, batch.pairs[k].second, cfg.negatives_per_pair, ssl_rng);
    const Matrix<Scalar>* mask_ptr = nullptr;
    if (cfg.dropout > 0) {
      mask.resize(static_cast<Eigen::Index>(g.num_nodes()), cfg.hidden_dim);
      const Scalar scale = Scalar(1.0 / (1.0 - cfg.dropout));
      for (Eigen::Index j = 0; j < mask.cols(); ++j)
        for (Eigen::Index i = 0; i < mask.rows(); ++i) mask(i, j) = keep(ssl_rng) ? scale : Scalar(0);
      mask_ptr = &mask;
    }

    Gradients<Scalar> grads;
    Activations<Scalar> act;
    const LossTerms loss = joint_objective<Scalar>(params, a, ax, labels, split.train, batch, cfg, &grads, mask_ptr, &act);
    if (!std::isfinite(loss.total)) throw numeric_error("non-finite loss at epoch " + std::to_string(epoch));

    const Matrix<Scalar> eval_logits = mask_ptr ? forward_propagated<Scalar>(params, a, ax).logits : act.logits;
    EpochRecord rec{loss.task, loss.ssl, loss.total, accuracy<Scalar>(eval_logits, labels, split.train),
                    accuracy<Scalar>(eval_logits, labels, split.val)};
    result.metrics.curve.push_back(rec);
    // Ties go to the later epoch, which has the lower training loss.
    if (rec.val_accuracy >= best_val) {
      best_val = rec.val_accuracy;
      result.params = params;
      result.metrics.best_epoch = epoch;
    }
    result.metrics.epochs_run = epoch + 1;

    if (loss.total < best_loss - cfg.min_improvement) {
      best_loss = loss.total;
      stall = 0;
    } else if (++stall >= cfg.patience) {
      break;
    }
    adam1.step(params.w1, grads.w1, cfg.learning_rate, epoch + 1);
    adam2.step(params.w2, grads.w2, cfg.learning_rate, epoch + 1);
  }

  const auto final_logits = forward_propagated<Scalar>(result.params, a, ax).logits;
  result.metrics.train_accuracy = accuracy<Scalar>(final_logits, labels, split.train);
  result.metrics.val_accuracy = accuracy<Scalar>(final_logits, labels, split.val);
  result.metrics.test_accuracy = accuracy<Scalar>(final_logits, labels, split.test);
  return result;
}

template TrainResult<double> joint_train<double>(const Graph&, const Matrix<double>&, std::span<const int>,
                                                 const Split&, const PositivePairSet&, const TrainConfig&);
template TrainResult<float> joint_train<float>(const Graph&, const Matrix<float>&, std::span<const int>, const Split&,
                                               const PositivePairSet&, const TrainConfig&);

void save_checkpoint(const std::filesystem::path& path, const ModelParams<double>& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write " + path.string());
  out.write("TGCN", 4);
  io::write_u64(out, static_cast<std::uint64_t>(p.w1.rows()));
  io::write_u64(out, static_cast<std::uint64_t>(p.w1.cols()));
  io::write_u64(out, static_cast<std::uint64_t>(p.w2.rows()));
  io::write_u64(out, static_cast<std::uint64_t>(p.w2.cols()));
  for (const auto* w : {&p.w1, &p.w2})
    for (Eigen::Index i = 0; i < w->rows(); ++i)
      for (Eigen::Index j = 0; j < w->cols(); ++j) io::write_f32(out, static_cast<float>((*w)(i, j)));
}

ModelParams<double> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path.string());
  io::expect_magic(in, "TGCN", path);
  const auto r1 = io::read_u64(in), c1 = io::read_u64(in), r2 = io::read_u64(in), c2 = io::read_u64(in);
  if (c1 != r2) throw data_error(path.string() + ": inconsistent layer shapes");
  ModelParams<double> p;
  p.w1.resize(static_cast<Eigen::Index>(r1), static_cast<Eigen::Index>(c1));
  p.w2.resize(static_cast<Eigen::Index>(r2), static_cast<Eigen::Index>(c2));
  for (auto* w : {&p.w1, &p.w2})
    for (Eigen::Index i = 0; i < w->rows(); ++i)
      for (Eigen::Index j = 0; j < w->cols(); ++j) (*w)(i, j) = io::read_f32(in);
  return p;
}

}  // namespace topo::gcn
