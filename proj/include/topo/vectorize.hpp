#pragma once

#include <filesystem>
#include <span>

#include <Eigen/Dense>

#include "topo/persistence.hpp"

namespace topo {

/// Maps raw filtration values onto [0, 1] with one dataset-wide range.
struct NormalizationSpec {
  double global_min = 0.0;
  double global_max = 1.0;
  double inf_cap = 1.0;  // normalized coordinate that replaces infinite deaths

  double normalize(double x) const { return (x - global_min) / (global_max - global_min); }
};

enum class PixelQuadrature {
  CellIntegral,  // exact integral of the Gaussian over each cell (erf products)
  CellCenter,    // Gaussian density at the cell center times cell area
};

struct PIConfig {
  double resolution = 0.1;  // cell size on [0, 1]; 1 / resolution must be an integer
  double sigma = 0.0;       // Gaussian bandwidth; <= 0 means "one cell"
  PixelQuadrature quadrature = PixelQuadrature::CellIntegral;

  int grid() const;  // cells per axis; throws if 1 / resolution is not integral
  double bandwidth() const { return sigma > 0.0 ? sigma : resolution; }
  std::size_t vector_length() const { return 2 * static_cast<std::size_t>(grid()) * grid(); }
};

/// H0 grid followed by the H1 grid; each row-major over (birth, persistence).
struct PersistenceImage {
  int grid = 0;
  Eigen::VectorXd pixels;
};

/// Range over all finite births and deaths. Throws if nothing is finite or the range is empty.
NormalizationSpec fit_normalization(std::span<const PersistenceDiagram> diagrams);

/// Persistence-weighted Gaussian image of a diagram (weight = normalized persistence).
PersistenceImage persistence_image(const PersistenceDiagram& pd, const NormalizationSpec& spec, const PIConfig& cfg);

/// Euclidean distance between pixel vectors.
double topo_distance(const PersistenceImage& a, const PersistenceImage& b);

/// Images for a whole graph, one row per node id.
class PIStore {
 public:
  using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  PIStore() = default;
  PIStore(PIConfig cfg, Matrix pixels) : cfg_(cfg), pixels_(std::move(pixels)) {}

  std::size_t num_nodes() const noexcept { return static_cast<std::size_t>(pixels_.rows()); }
  std::size_t vector_length() const noexcept { return static_cast<std::size_t>(pixels_.cols()); }
  const PIConfig& config() const noexcept { return cfg_; }
  const Matrix& pixels() const noexcept { return pixels_; }
  auto row(std::size_t v) const { return pixels_.row(static_cast<Eigen::Index>(v)); }

  /// Euclidean distance between two stored images, accumulated in double.
  double distance(std::size_t u, std::size_t v) const;

  /// Binary: "TPIS", u64 num_nodes, u64 vec_len, f32 resolution, f32 sigma, float32 rows.
  void save(const std::filesystem::path& path) const;
  static PIStore load(const std::filesystem::path& path);

 private:
  PIConfig cfg_;
  Matrix pixels_;
};

PIStore build_pi_store(std::span<const PersistenceDiagram> diagrams, const NormalizationSpec& spec,
                       const PIConfig& cfg, unsigned threads = 1);

}  // namespace topo
