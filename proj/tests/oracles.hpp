// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the algorithms it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "topo/graph.hpp"
#include "topo/persistence.hpp"

namespace oracle {

using topo::Edge;
using topo::NodeId;

inline topo::Graph random_graph(std::mt19937_64& rng, std::size_t n, double p) {
  std::bernoulli_distribution coin(p);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (coin(rng)) edges.emplace_back(u, v);
  return topo::load_graph(edges, n);
}

/// All-pairs hop distances by Floyd-Warshall; unreachable = +inf.
inline Eigen::MatrixXd floyd_warshall(const topo::Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(n, n, inf);
  for (Eigen::Index i = 0; i < n; ++i) d(i, i) = 0;
  for (const auto& [u, v] : g.edges()) d(u, v) = d(v, u) = 1;
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
  return d;
}

/// min c.x s.t. A x = b, x >= 0 (b >= 0) by a two-phase dense tableau simplex
/// with Bland's rule. Returns +inf if infeasible.
inline double simplex_min(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const Eigen::Index m = A.rows(), n = A.cols();
  const double eps = 1e-12;
  // Columns: n structural, m artificial, rhs.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  T.block(0, 0, m, n) = A;
  T.block(0, n, m, m) = Eigen::MatrixXd::Identity(m, m);
  T.col(n + m).head(m) = b;
  std::vector<Eigen::Index> basis(m);
  for (Eigen::Index i = 0; i < m; ++i) basis[i] = n + i;

  auto pivot = [&](Eigen::Index r, Eigen::Index col) {
    T.row(r) /= T(r, col);
    for (Eigen::Index i = 0; i <= m; ++i)
      if (i != r && T(i, col) != 0) T.row(i) -= T(i, col) * T.row(r);
    basis[r] = col;
  };
  auto run = [&](Eigen::Index allowed_cols) {
    for (int iter = 0; iter < 100000; ++iter) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed_cols; ++j)
        if (T(m, j) < -eps) {
          enter = j;
          break;
        }
      if (enter < 0) return;
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m; ++i)
        if (T(i, enter) > eps) {
          const double ratio = T(i, n + m) / T(i, enter);
          if (leave < 0 || ratio < best - eps || (std::abs(ratio - best) <= eps && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      if (leave < 0) return;  // unbounded (cannot happen for transport)
      pivot(leave, enter);
    }
  };

  // Phase I objective: sum of artificials, expressed in non-basic terms.
  for (Eigen::Index i = 0; i < m; ++i) T.row(m) -= T.row(i);
  for (Eigen::Index i = 0; i < m; ++i) T(m, n + i) = 0;
  run(n + m);
  if (-T(m, n + m) > 1e-9) return std::numeric_limits<double>::infinity();

  // Phase II: reset objective row to c, eliminate basic columns.
  T.row(m).setZero();
  T.row(m).head(n) = c.transpose();
  for (Eigen::Index i = 0; i < m; ++i)
    if (basis[i] < n && T(m, basis[i]) != 0) T.row(m) -= T(m, basis[i]) * T.row(i);
  run(n);
  return -T(m, n + m);
}

/// Earth mover's distance between two discrete measures via the transport LP.
inline double transport_lp(const Eigen::MatrixXd& cost, const std::vector<double>& a, const std::vector<double>& b) {
  const Eigen::Index m = cost.rows(), k = cost.cols();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + k, m * k);
  Eigen::VectorXd rhs(m + k), c(m * k);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      A(i, i * k + j) = 1;
      A(m + j, i * k + j) = 1;
      c[i * k + j] = cost(i, j);
    }
  for (Eigen::Index i = 0; i < m; ++i) rhs[i] = a[i];
  for (Eigen::Index j = 0; j < k; ++j) rhs[m + j] = b[j];
  return simplex_min(A, rhs, c);
}

/// Ollivier-Ricci curvature of edge (u, v) from first principles: lazy walk
/// measures, Floyd-Warshall ground metric, LP transport.
inline double ricci_oracle(const topo::Graph& g, NodeId u, NodeId v, double alpha) {
  const auto dist = floyd_warshall(g);
  auto measure = [&](NodeId x) {
    std::vector<std::pair<NodeId, double>> m{{x, g.degree(x) ? alpha : 1.0}};
    for (NodeId w : g.neighbors(x)) m.emplace_back(w, (1.0 - alpha) / g.degree(x));
    return m;
  };
  const auto mu = measure(u), mv = measure(v);
  Eigen::MatrixXd cost(mu.size(), mv.size());
  std::vector<double> a, b;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    a.push_back(mu[i].second);
    for (std::size_t j = 0; j < mv.size(); ++j) cost(i, j) = dist(mu[i].first, mv[j].first);
  }
  for (const auto& [node, mass] : mv) b.push_back(mass);
  return 1.0 - transport_lp(cost, a, b) / dist(u, v);
}

/// Connected components of the subgraph (vertices, edges) by repeated DFS.
inline std::size_t component_count(std::size_t n, const std::vector<bool>& present,
                                   const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(n, false);
  std::size_t count = 0;
  for (std::uint32_t s = 0; s < n; ++s) {
    if (!present[s] || seen[s]) continue;
    ++count;
    std::vector<std::uint32_t> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      auto x = stack.back();
      stack.pop_back();
      for (auto y : adj[x])
        if (!seen[y]) {
          seen[y] = true;
          stack.push_back(y);
        }
    }
  }
  return count;
}

struct BettiMismatch {
  double threshold;
  long expected_b0, got_b0, expected_b1, got_b1;
};

/// Compares a diagram against brute-force Betti numbers of G_{<=a} at every
/// distinct filtration value a. Returns the first mismatch, if any.
inline std::optional<BettiMismatch> check_betti_sweep(const topo::FiltrationAssignment& fa,
                                                      const topo::PersistenceDiagram& pd) {
  std::set<double> thresholds(fa.node_values.begin(), fa.node_values.end());
  thresholds.insert(fa.edge_values.begin(), fa.edge_values.end());
  const std::size_t n = fa.node_values.size();
  for (double a : thresholds) {
    std::vector<bool> present(n);
    long v_count = 0;
    for (std::size_t i = 0; i < n; ++i) v_count += (present[i] = fa.node_values[i] <= a);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> sub;
    for (std::size_t e = 0; e < fa.edges.size(); ++e)
      if (fa.edge_values[e] <= a) sub.push_back(fa.edges[e]);
    const long c = static_cast<long>(component_count(n, present, sub));
    const long b0 = c;
    const long b1 = static_cast<long>(sub.size()) - v_count + c;

    long alive0 = 0, born1 = 0;
    for (const auto& p : pd.h0) alive0 += (p.birth <= a && a < p.death);
    for (const auto& p : pd.h1) born1 += (p.birth <= a);
    if (alive0 != b0 || born1 != b1) return BettiMismatch{a, b0, alive0, b1, born1};
  }
  return std::nullopt;
}

/// Single diagram point image by 2-D composite Simpson quadrature of the
/// normalized Gaussian over each cell (grid x grid cells on [0,1]^2).
inline Eigen::VectorXd quadrature_image(double b, double p, double weight, double sigma, int grid, int sub = 40) {
  Eigen::VectorXd img = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid) * grid);
  const double h = 1.0 / grid, step = h / sub;
  const double norm = 1.0 / (2.0 * std::numbers::pi * sigma * sigma);
  auto simpson_w = [sub](int k) { return (k == 0 || k == sub) ? 1.0 : (k % 2 ? 4.0 : 2.0); };
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      double acc = 0;
      for (int s = 0; s <= sub; ++s) {
        const double x = i * h + s * step;
        for (int t = 0; t <= sub; ++t) {
          const double y = j * h + t * step;
          acc += simpson_w(s) * simpson_w(t) * std::exp(-((x - b) * (x - b) + (y - p) * (y - p)) / (2 * sigma * sigma));
        }
      }
      img[i * grid + j] = weight * norm * acc * step * step / 9.0;
    }
  return img;
}

/// Central finite differences of a scalar function of one matrix argument.
template <typename F>
Eigen::MatrixXd central_difference(F&& f, Eigen::MatrixXd w, double step = 1e-5) {
  Eigen::MatrixXd grad(w.rows(), w.cols());
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const double keep = w(i, j);
      w(i, j) = keep + step;
      const double up = f(w);
      w(i, j) = keep - step;
      const double down = f(w);
      w(i, j) = keep;
      grad(i, j) = (up - down) / (2 * step);
    }
  return grad;
}

/// |a - n| / max(|a|, |n|) in the Frobenius norm; 0 when both vanish.
inline double relative_error(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric) {
  const double scale = std::max(analytic.norm(), numeric.norm());
  return scale == 0.0 ? 0.0 : (analytic - numeric).norm() / scale;
}

}  // namespace oracle
