#include "topo/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "topo/io.hpp"

namespace topo {

int PIConfig::grid() const {
  if (!(resolution > 0.0) || resolution > 1.0) throw config_error("PI resolution must lie in (0, 1]");
  const double cells = 1.0 / resolution;
  const double rounded = std::round(cells);
  if (std::abs(cells - rounded) > 1e-9) throw config_error("1 / resolution must be an integer");
  return static_cast<int>(rounded);
}

NormalizationSpec fit_normalization(std::span<const PersistenceDiagram> diagrams) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto take = [&](double x) {
    if (std::isfinite(x)) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  };
  for (const auto& pd : diagrams) {
    for (const auto& p : pd.h0) {
      take(p.birth);
      take(p.death);
    }
    for (const auto& p : pd.h1) {
      take(p.birth);
      take(p.death);
    }
  }
  if (!std::isfinite(lo)) throw data_error("cannot fit normalization: no finite diagram values");
  if (!(hi > lo)) throw data_error("cannot fit normalization: zero range");
  return {lo, hi, 1.0};
}

namespace {

// Mass of a 1-D normal(mu, sigma) inside [a, b].
double interval_mass(double a, double b, double mu, double sigma) {
  const double s = std::numbers::sqrt2 * sigma;
  return 0.5 * (std::erf((b - mu) / s) - std::erf((a - mu) / s));
}

void splat(Eigen::Ref<Eigen::VectorXd> grid_pixels, int n, double b, double p, double weight, const PIConfig& cfg) {
  const double h = 1.0 / n;
  const double sigma = cfg.bandwidth();
  if (cfg.quadrature == PixelQuadrature::CellIntegral) {
    Eigen::VectorXd mb(n), mp(n);
    for (int i = 0; i < n; ++i) {
      mb[i] = interval_mass(i * h, (i + 1) * h, b, sigma);
      mp[i] = interval_mass(i * h, (i + 1) * h, p, sigma);
    }
    for (int i = 0; i < n; ++i)
      grid_pixels.segment(static_cast<Eigen::Index>(i) * n, n) += weight * mb[i] * mp;
    return;
  }
  const double norm = h * h / (2.0 * std::numbers::pi * sigma * sigma);
  for (int i = 0; i < n; ++i) {
    const double dx = (i + 0.5) * h - b;
    for (int j = 0; j < n; ++j) {
      const double dy = (j + 0.5) * h - p;
      grid_pixels[static_cast<Eigen::Index>(i) * n + j] +=
          weight * norm * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    }
  }
}

}  // namespace

PersistenceImage persistence_image(const PersistenceDiagram& pd, const NormalizationSpec& spec, const PIConfig& cfg) {
  const int n = cfg.grid();
  PersistenceImage img{n, Eigen::VectorXd::Zero(cfg.vector_length())};
  const Eigen::Index cells = static_cast<Eigen::Index>(n) * n;

  // Sorted so the floating-point sum does not depend on input order.
  auto add_points = [&](std::vector<PersistencePair> points, Eigen::Index offset) {
    std::sort(points.begin(), points.end());
    for (const auto& pt : points) {
      const double b = spec.normalize(pt.birth);
      const double d = pt.essential() ? spec.inf_cap : spec.normalize(pt.death);
      const double pers = d - b;
      if (pers <= 0.0) continue;  // zero weight
      splat(img.pixels.segment(offset, cells), n, b, pers, pers, cfg);
    }
  };
  add_points(pd.h0, 0);
  add_points(pd.h1, cells);
  return img;
}

double topo_distance(const PersistenceImage& a, const PersistenceImage& b) {
  if (a.pixels.size() != b.pixels.size() || a.grid != b.grid)
    throw std::invalid_argument("persistence images have different shapes");
  return (a.pixels - b.pixels).norm();
}

double PIStore::distance(std::size_t u, std::size_t v) const {
  const float* a = pixels_.data() + u * vector_length();
  const float* b = pixels_.data() + v * vector_length();
  double acc = 0.0;
  for (std::size_t k = 0; k < vector_length(); ++k) {
    const double d = static_cast<double>(a[k]) - static_cast<double>(b[k]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

void PIStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write " + path.string());
  out.write("TPIS", 4);
  io::write_u64(out, num_nodes());
  io::write_u64(out, vector_length());
  io::write_f32(out, static_cast<float>(cfg_.resolution));
  io::write_f32(out, static_cast<float>(cfg_.bandwidth()));
  out.write(reinterpret_cast<const char*>(pixels_.data()), static_cast<std::streamsize>(pixels_.size() * sizeof(float)));
}

PIStore PIStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path.string());
  io::expect_magic(in, "TPIS", path);
  const auto rows = io::read_u64(in);
  const auto cols = io::read_u64(in);
  PIConfig cfg;
  // Stored as float32; snap back to the exact 1 / cells value.
  cfg.resolution = 1.0 / std::round(1.0 / io::read_f32(in));
  cfg.sigma = io::read_f32(in);
  Matrix m(rows, cols);
  if (!in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float))))
    throw data_error(path.string() + ": truncated PI data");
  return {cfg, std::move(m)};
}

PIStore build_pi_store(std::span<const PersistenceDiagram> diagrams, const NormalizationSpec& spec,
                       const PIConfig& cfg, unsigned threads) {
  PIStore::Matrix m(diagrams.size(), cfg.vector_length());
  parallel_for(diagrams.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v)
      m.row(static_cast<Eigen::Index>(v)) = persistence_image(diagrams[v], spec, cfg).pixels.cast<float>().transpose();
  });
  return {cfg, std::move(m)};
}

}  // namespace topo
