#ifndef BIFBM_GRID_HPP
#define BIFBM_GRID_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bifbm {

/// Strictly increasing, nonnegative, nonempty set of sampling times.
class Grid {
 public:
  explicit Grid(std::vector<double> points);

  /// {i T / steps : i = first..steps}, first = 0 with the origin, 1 without.
  static Grid uniform(std::size_t steps, double T, bool include_origin = true);

  std::span<const double> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }
  bool includes_origin() const { return points_.front() == 0.0; }

  /// Equal spacing and a lattice anchored at 0 (t_i = i * step).
  bool is_uniform(double rtol = 1e-9) const;
  /// Spacing of a uniform grid; throws std::invalid_argument otherwise.
  double step() const;

  /// Index of the grid point closest to t.
  std::size_t nearest(double t) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::vector<double> points_;
};

/// {t^exponent : t in grid}, the grid on which X^K must be sampled for
/// X^{H,K}_t = X^K_{t^{2H}} (exponent = 2H).
Grid power_grid(const Grid& target, double exponent);

/// One sampled trajectory.
struct Path {
  Grid grid;
  Eigen::VectorXd values;
  std::string note;
};

/// Replicates on one shared grid. values(i, r) is replicate r at grid point i.
struct Ensemble {
  Grid grid;
  Eigen::MatrixXd values;
  std::vector<std::uint64_t> seeds;

  std::size_t replicates() const { return static_cast<std::size_t>(values.cols()); }
  Path path(std::size_t r) const;
};

/// Re-indexes a path sampled on power_grid(target, exponent) onto target.
/// The input grid must be exactly that image; values are unchanged.
Path time_change(const Path& path, const Grid& target, double exponent);

}  // namespace bifbm

#endif  // BIFBM_GRID_HPP
