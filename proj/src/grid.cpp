#include "bifbm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bifbm {

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("Grid: no points");
  if (!(points_.front() >= 0.0)) throw std::invalid_argument("Grid: negative time");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1]))
      throw std::invalid_argument("Grid: points must be strictly increasing");
  }
  if (!std::isfinite(points_.back())) throw std::invalid_argument("Grid: non-finite time");
}

Grid Grid::uniform(std::size_t steps, double T, bool include_origin) {
  if (steps == 0) throw std::invalid_argument("Grid::uniform: steps must be positive");
  if (!(T > 0.0)) throw std::invalid_argument("Grid::uniform: horizon must be positive");
  std::vector<double> pts;
  pts.reserve(steps + 1);
  for (std::size_t i = include_origin ? 0 : 1; i <= steps; ++i)
    pts.push_back(T * static_cast<double>(i) / static_cast<double>(steps));
  return Grid(std::move(pts));
}

bool Grid::is_uniform(double rtol) const {
  if (points_.size() < 2) return false;
  const double h = points_[1] - points_[0];
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (std::abs(points_[i] - points_[i - 1] - h) > rtol * h) return false;
  }
  const double offset = points_[0] / h;
  return std::abs(offset - std::round(offset)) <= 1e-6;
}

double Grid::step() const {
  if (!is_uniform()) throw std::invalid_argument("Grid: not a uniform lattice");
  return (points_.back() - points_.front()) / static_cast<double>(points_.size() - 1);
}

std::size_t Grid::nearest(double t) const {
  auto it = std::lower_bound(points_.begin(), points_.end(), t);
  if (it == points_.end()) return points_.size() - 1;
  const auto i = static_cast<std::size_t>(it - points_.begin());
  if (i > 0 && std::abs(points_[i - 1] - t) <= std::abs(points_[i] - t)) return i - 1;
  return i;
}

Grid power_grid(const Grid& target, double exponent) {
  if (!(exponent > 0.0)) throw std::invalid_argument("power_grid: exponent must be positive");
  std::vector<double> pts(target.size());
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = std::pow(target[i], exponent);
  return Grid(std::move(pts));
}

Path Ensemble::path(std::size_t r) const {
  if (r >= replicates()) throw std::out_of_range("Ensemble::path: replicate index");
  return {grid, values.col(static_cast<Eigen::Index>(r)), {}};
}

Path time_change(const Path& path, const Grid& target, double exponent) {
  if (path.grid.size() != target.size())
    throw std::invalid_argument("time_change: grid sizes differ");
  const Grid expected = power_grid(target, exponent);
  if (!(expected == path.grid))
    throw std::invalid_argument("time_change: path grid is not the image t^exponent of the target grid");
  return {target, path.values, path.note};
}

}  // namespace bifbm
