#ifndef BIFBM_CIRCULANT_HPP
#define BIFBM_CIRCULANT_HPP

#include <cstdint>
#include <memory>
#include <span>

#include "bifbm/grid.hpp"

namespace bifbm {

class CholeskySampler;

/// Relative eigenvalue floor of the circulant embedding; anything more
/// negative than -kCirculantFloor * max eigenvalue triggers the Cholesky fallback.
inline constexpr double kCirculantFloor = 1e-9;

/// Fractional Brownian motion on {i T / n : i = 0..n} by circulant embedding
/// of the fractional Gaussian noise covariance (Davies-Harte). The embedding
/// and its spectrum are computed once per (n, T, h).
class FbmCirculant {
 public:
  FbmCirculant(std::size_t n, double T, double h, double floor = kCirculantFloor);

  const Grid& grid() const { return grid_; }
  /// True when the embedding had an eigenvalue below the floor and sampling
  /// goes through the exact Cholesky factor instead.
  bool uses_fallback() const { return fallback_ != nullptr; }
  double min_relative_eigenvalue() const { return min_relative_eigenvalue_; }

  Path sample(std::uint64_t seed) const;
  Ensemble sample_ensemble(std::span<const std::uint64_t> seeds, unsigned workers = 1) const;

 private:
  void fill(std::uint64_t seed, Eigen::Ref<Eigen::VectorXd> out) const;

  std::size_t n_;
  double T_;
  double h_;
  Grid grid_;
  Eigen::VectorXd sqrt_eigen_;  // sqrt(lambda_k / m), clipped at 0
  std::shared_ptr<const CholeskySampler> fallback_;
  double min_relative_eigenvalue_ = 0.0;
};

Path fbm_circulant(std::size_t n, double T, double h, std::uint64_t seed);

}  // namespace bifbm

#endif  // BIFBM_CIRCULANT_HPP
