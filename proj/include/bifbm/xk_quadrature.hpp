// Simulation of X^K_t = int_0^inf (1 - e^{-theta t}) theta^{-(1+K)/2} dW_theta
// by a midpoint rule on log-uniform cells in theta, and of its time
// derivatives on the same Brownian increments.
#ifndef BIFBM_XK_QUADRATURE_HPP
#define BIFBM_XK_QUADRATURE_HPP

#include <cstdint>
#include <span>
#include <utility>

#include "bifbm/grid.hpp"

namespace bifbm {

struct QuadratureScheme {
  double theta_min = 1e-6;
  double theta_max = 1e6;
  std::size_t cells = 4096;

  /// [1e-6, 1e6] with 4096 log-uniform cells.
  static QuadratureScheme standard() { return {}; }

  /// Widens the standard range until the truncation estimate on [t_min, t_max]
  /// is at most tolerance / 4, keeping the standard density of cells per decade.
  static QuadratureScheme covering(double t_min, double t_max, double K, double tolerance = 1e-3);

  void validate() const;

  /// Cell edges theta_min * r^i, i = 0..cells.
  Eigen::VectorXd edges() const;
  /// Arithmetic midpoints of the cells.
  Eigen::VectorXd midpoints() const;
  Eigen::VectorXd widths() const;
};

/// Closed-form bounds on the two neglected tails of
/// int (1 - e^{-theta t})^2 theta^{-1-K} d theta, relative to gamma^K(t,t):
///   lower tail <= t^2 theta_min^{2-K} / (2-K),   upper tail <= theta_max^{-K} / K.
struct TruncationEstimate {
  double lower_tail;
  double upper_tail;
  double relative;  // worst (lower + upper) / (C3 t^K) over the extreme times
};

TruncationEstimate truncation_error(const QuadratureScheme& scheme, double t_min, double t_max, double K);

class QuadratureRejected : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Brownian increments over the cells of a scheme: increments[c] ~ N(0, width_c).
struct BrownianDriver {
  QuadratureScheme scheme;
  Eigen::VectorXd increments;
  std::uint64_t seed = 0;

  static BrownianDriver draw(const QuadratureScheme& scheme, std::uint64_t seed);
};

/// Derivative grids must stay at or above t_floor = kDerivativeFloorFraction * T.
inline constexpr double kDerivativeFloorFraction = 0.05;

/// X^K and its derivatives for one K and one scheme.
class XkQuadrature {
 public:
  XkQuadrature(double K, QuadratureScheme scheme, double tolerance = 1e-3);

  double K() const { return K_; }
  const QuadratureScheme& scheme() const { return scheme_; }
  const Eigen::VectorXd& nodes() const { return nodes_; }

  /// Throws QuadratureRejected when the truncation estimate over the grid's
  /// positive times exceeds the tolerance.
  void check_grid(const Grid& grid) const;

  BrownianDriver driver(std::uint64_t seed) const { return BrownianDriver::draw(scheme_, seed); }

  /// X_t = sum_c (1 - e^{-theta_c t}) theta_c^{-(1+K)/2} dW_c; X_0 = 0 exactly.
  Path evaluate(const BrownianDriver& driver, const Grid& grid) const;

  /// Order-n derivative sum_c (-1)^{n-1} theta_c^{n-(1+K)/2} e^{-theta_c t} dW_c.
  /// Every grid time must be >= t_floor (default kDerivativeFloorFraction * grid.back()).
  Path derivative(const BrownianDriver& driver, const Grid& grid, int order, double t_floor = -1.0) const;

  /// Ensemble of X paths, replicate r driven by seeds[r].
  Ensemble sample_ensemble(const Grid& grid, std::span<const std::uint64_t> seeds, unsigned workers = 1) const;

  /// Covariance of the discretized process: sum_c (1-e^{-theta t})(1-e^{-theta s}) theta^{-1-K} width.
  double discretized_cov(double t, double s) const;
  /// Variance of the discretized first derivative: sum_c theta^{1-K} e^{-2 theta t} width.
  double discretized_derivative_variance(double t) const;

 private:
  enum class Kind { value, derivative };
  Eigen::MatrixXd apply(Kind kind, int order, const Grid& grid, const Eigen::MatrixXd& increments) const;

  double K_;
  QuadratureScheme scheme_;
  double tolerance_;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd widths_;
};

/// One X^K path and the driver that produced it, so derivatives can be built
/// on the same noise.
std::pair<Path, BrownianDriver> xk_quadrature(const Grid& grid, double K, const QuadratureScheme& scheme,
                                              std::uint64_t seed, double tolerance = 1e-3);

Path xk_derivative(const BrownianDriver& driver, const Grid& grid, double K, int order, double t_floor = -1.0);

}  // namespace bifbm

#endif  // BIFBM_XK_QUADRATURE_HPP
