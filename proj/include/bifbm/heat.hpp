// One-dimensional stochastic heat equation du = 1/2 u'' dt + dW(t,x) with
// u(0,.) = 0, observed at a fixed point x0. Its mild solution is
//   u(t,x0) = int_0^t int_R p_{t-s}(x0-y) W(ds,dy),   p_tau(x) = (2 pi tau)^{-1/2} e^{-x^2/(2 tau)},
// a bifBm with H = K = 1/2 up to a constant factor.
#ifndef BIFBM_HEAT_HPP
#define BIFBM_HEAT_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "bifbm/detail/kernels.hpp"
#include "bifbm/grid.hpp"
#include "bifbm/report.hpp"

namespace bifbm {

double heat_kernel(double tau, double x);

/// E[u(t,x) u(s,x)] = (2 pi)^{-1/2} (sqrt(t+s) - sqrt|t-s|).
double heat_cov_exact(double t, double s);

/// heat_cov_exact / R^{1/2,1/2} = pi^{-1/2} for every t != s; the fitted
/// scale c of u = c B^{1/2,1/2} is its square root, pi^{-1/4}.
double heat_bifbm_scale();

struct SpaceTimeGrid {
  double dt;
  double dx;
  double L;  // space window [-L, L]
  double T;

  /// dt = T/512, L = 8 sqrt(T), dx = L/256.
  static SpaceTimeGrid standard(double T);
  /// Halves both steps.
  SpaceTimeGrid refined() const;

  std::size_t time_cells() const;
  std::size_t space_cells() const;
  /// Mass of p_T(x0 - .) outside [-L, L].
  double tail_mass(double x0 = 0.0) const;
  /// Throws when the steps do not tile [0,T] x [-L,L] or the tail mass is >= 1e-6.
  void validate(double x0 = 0.0) const;
};

using HeatPath = Path;

/// Deterministic weights of u(t_a, x0) on the space-time noise cells.
/// Cells strictly before t use the kernel at the cell midpoint; the cell
/// ending at t (where p_{t-s} is singular) uses the cell-averaged kernel.
class HeatScheme {
 public:
  HeatScheme(Grid times, double x0, SpaceTimeGrid stg);

  const Grid& times() const { return times_; }
  const SpaceTimeGrid& space_time() const { return stg_; }
  double x0() const { return x0_; }
  /// Time cells that influence some grid time.
  std::size_t active_time_cells() const { return active_cells_; }

  /// Weights (grid times x space cells) of time cell j.
  Eigen::MatrixXd cell_weights(std::size_t j) const;

  /// Covariance of the discretized field: sum_j W_j W_j^T dt dx.
  Eigen::MatrixXd discretized_cov() const;

 private:
  Grid times_;
  double x0_;
  SpaceTimeGrid stg_;
  std::size_t active_cells_;
};

/// Full space-time white-noise simulation: one N(0, dt dx) increment per cell.
HeatPath simulate_heat(const Grid& grid, double x0, const SpaceTimeGrid& stg, std::uint64_t seed);

/// Exact-in-law ensemble sampler for a HeatScheme. Per time cell j the vector
/// of contributions to (u(t_a))_a is Gaussian with covariance dt dx W_j W_j^T;
/// sampling it from a square root of that matrix replaces the space_cells
/// independent increments of the cell by grid-size many.
class HeatEnsembleSampler {
 public:
  explicit HeatEnsembleSampler(const HeatScheme& scheme);

  Ensemble sample_ensemble(std::span<const std::uint64_t> seeds, unsigned workers = 1) const;
  const Eigen::MatrixXd& covariance() const { return covariance_; }

 private:
  Grid times_;
  detail::RowMatrix factors_;  // [F_0 ... F_{J-1}]
  Eigen::MatrixXd covariance_;
};

/// Coarse scheme and its 2x refinement driven by the same white noise (each
/// coarse cell's increment is the sum of its four fine increments).
class CoupledHeatSampler {
 public:
  CoupledHeatSampler(const Grid& times, double x0, const SpaceTimeGrid& coarse);

  struct Pair {
    Ensemble coarse;
    Ensemble fine;
  };
  Pair sample_ensemble(std::span<const std::uint64_t> seeds, unsigned workers = 1) const;

  const Eigen::MatrixXd& coarse_covariance() const { return coarse_cov_; }
  const Eigen::MatrixXd& fine_covariance() const { return fine_cov_; }

 private:
  Grid times_;
  detail::RowMatrix factors_;
  Eigen::MatrixXd coarse_cov_;
  Eigen::MatrixXd fine_cov_;
};

struct HeatCheckOptions {
  unsigned workers = 1;
  double x0 = 0.0;
  double scale_tolerance = 0.02;  // relative, on c_hat
  double residual_tolerance = 4.0;  // standard errors
};

/// Fits u = c B^{1/2,1/2} on all grid pairs and compares c_hat with pi^{-1/4}.
CheckReport bifbm_proportionality(std::size_t n_rep, const Grid& grid, std::uint64_t seed,
                                  const HeatCheckOptions& options = {});

/// One 2x refinement of the standard space-time grid: the discretization error
/// against heat_cov_exact must shrink at every probe pair, and the coupled
/// Monte Carlo estimate of the refinement shift must agree with the
/// deterministic one.
CheckReport heat_refinement_check(std::size_t n_rep, const Grid& grid, std::uint64_t seed,
                                  const HeatCheckOptions& options = {});

}  // namespace bifbm

#endif  // BIFBM_HEAT_HPP
