#ifndef BIFBM_CHOLESKY_SAMPLER_HPP
#define BIFBM_CHOLESKY_SAMPLER_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bifbm/covariance.hpp"
#include "bifbm/grid.hpp"

namespace bifbm {

class NonPsdKernelError : public std::runtime_error {
 public:
  NonPsdKernelError(std::size_t grid_size, double min_eigenvalue);

  std::size_t grid_size() const { return grid_size_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  std::size_t grid_size_;
  double min_eigenvalue_;
};

/// Jitter multipliers tried in order; lambda * trace / n is added to the diagonal.
inline constexpr std::array<double, 4> kJitterLadder{0.0, 1e-14, 1e-12, 1e-10};

/// Exact sampler for a centered Gaussian vector with the kernel's covariance
/// on a grid. The factorization is done once and reused for every replicate.
///
/// A grid point at t = 0 with kernel(0,0) = 0 is pinned: it is excluded from
/// the factorization and always sampled as exactly 0.
class CholeskySampler {
 public:
  using GramBuilder = std::function<Eigen::MatrixXd(std::span<const double>)>;

  CholeskySampler(const CovKernel& kernel, Grid grid);
  /// Uses `build` for the Gram matrix of the unpinned points (e.g. bifbm_gram).
  CholeskySampler(const CovKernel& kernel, Grid grid, const GramBuilder& build);

  const Grid& grid() const { return grid_; }
  /// Multiplier lambda from kJitterLadder that made the factorization succeed.
  double jitter() const { return jitter_; }
  std::size_t free_dimension() const { return free_.size(); }

  Path sample(std::uint64_t seed) const;
  Ensemble sample_ensemble(std::span<const std::uint64_t> seeds, unsigned workers = 1) const;

 private:
  void factorize(Eigen::MatrixXd gram);
  void fill(std::span<const std::uint64_t> seeds, Eigen::Ref<Eigen::MatrixXd> out) const;

  Grid grid_;
  std::vector<Eigen::Index> free_;
  Eigen::MatrixXd factor_;  // row i of L in column i, entries 0..i
  double jitter_ = 0.0;
};

Path cholesky_sample(const CovKernel& kernel, const Grid& grid, std::uint64_t seed);

}  // namespace bifbm

#endif  // BIFBM_CHOLESKY_SAMPLER_HPP
