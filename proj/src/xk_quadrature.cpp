#include "bifbm/xk_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bifbm/covariance.hpp"
#include "bifbm/detail/kernels.hpp"
#include "bifbm/random.hpp"

namespace bifbm {

namespace {

constexpr double kStandardDecades = 12.0;
constexpr double kCellsPerDecade = 4096.0 / kStandardDecades;
constexpr Eigen::Index kRowBlock = 256;

void require_fractional_k(double K) {
  if (!(K > 0.0 && K < 1.0)) throw std::domain_error("X^K requires K in (0,1)");
}

std::pair<double, double> positive_extremes(const Grid& grid) {
  const auto pts = grid.points();
  auto it = std::find_if(pts.begin(), pts.end(), [](double t) { return t > 0.0; });
  if (it == pts.end()) return {0.0, 0.0};
  return {*it, pts.back()};
}

}  // namespace

void QuadratureScheme::validate() const {
  if (!(theta_min > 0.0)) throw std::invalid_argument("QuadratureScheme: theta_min must be positive");
  if (!(theta_max > theta_min)) throw std::invalid_argument("QuadratureScheme: theta_min must be below theta_max");
  if (cells < 2) throw std::invalid_argument("QuadratureScheme: at least 2 cells required");
}

Eigen::VectorXd QuadratureScheme::edges() const {
  validate();
  const double log_ratio = std::log(theta_max / theta_min) / static_cast<double>(cells);
  Eigen::VectorXd e(static_cast<Eigen::Index>(cells + 1));
  for (std::size_t i = 0; i <= cells; ++i)
    e[static_cast<Eigen::Index>(i)] = theta_min * std::exp(log_ratio * static_cast<double>(i));
  e[static_cast<Eigen::Index>(cells)] = theta_max;
  return e;
}

Eigen::VectorXd QuadratureScheme::midpoints() const {
  const Eigen::VectorXd e = edges();
  const auto n = static_cast<Eigen::Index>(cells);
  return 0.5 * (e.head(n) + e.tail(n));
}

Eigen::VectorXd QuadratureScheme::widths() const {
  const Eigen::VectorXd e = edges();
  const auto n = static_cast<Eigen::Index>(cells);
  return e.tail(n) - e.head(n);
}

QuadratureScheme QuadratureScheme::covering(double t_min, double t_max, double K, double tolerance) {
  require_fractional_k(K);
  if (!(t_min > 0.0 && t_max >= t_min)) throw std::invalid_argument("QuadratureScheme::covering: bad time range");
  QuadratureScheme s = standard();
  const double target = 0.25 * tolerance;
  const double var_min = c3(K) * std::pow(t_min, K);
  const double var_max = c3(K) * std::pow(t_max, K);
  while (std::pow(s.theta_max, -K) / K > target * var_min) s.theta_max *= 10.0;
  while (t_max * t_max * std::pow(s.theta_min, 2.0 - K) / (2.0 - K) > target * var_max) s.theta_min /= 10.0;
  const double decades = std::log10(s.theta_max / s.theta_min);
  s.cells = std::max<std::size_t>(4096, static_cast<std::size_t>(std::ceil(decades * kCellsPerDecade)));
  return s;
}

TruncationEstimate truncation_error(const QuadratureScheme& scheme, double t_min, double t_max, double K) {
  require_fractional_k(K);
  scheme.validate();
  TruncationEstimate est{0.0, 0.0, 0.0};
  const double upper = std::pow(scheme.theta_max, -K) / K;
  for (double t : {t_min, t_max}) {
    if (!(t > 0.0)) continue;
    const double lower = t * t * std::pow(scheme.theta_min, 2.0 - K) / (2.0 - K);
    const double rel = (lower + upper) / (c3(K) * std::pow(t, K));
    if (rel >= est.relative) est = {lower, upper, rel};
  }
  return est;
}

BrownianDriver BrownianDriver::draw(const QuadratureScheme& scheme, std::uint64_t seed) {
  BrownianDriver d{scheme, standard_normals(seed, static_cast<Eigen::Index>(scheme.cells)), seed};
  d.increments.array() *= scheme.widths().array().sqrt();
  return d;
}

XkQuadrature::XkQuadrature(double K, QuadratureScheme scheme, double tolerance)
    : K_(K), scheme_(scheme), tolerance_(tolerance) {
  require_fractional_k(K);
  scheme_.validate();
  nodes_ = scheme_.midpoints();
  widths_ = scheme_.widths();
}

void XkQuadrature::check_grid(const Grid& grid) const {
  const auto [t_min, t_max] = positive_extremes(grid);
  if (t_min == 0.0) return;
  const TruncationEstimate est = truncation_error(scheme_, t_min, t_max, K_);
  if (est.relative > tolerance_) {
    throw QuadratureRejected("quadrature scheme rejected: truncation estimate " + std::to_string(est.relative) +
                             " exceeds tolerance " + std::to_string(tolerance_) + " on [" +
                             std::to_string(t_min) + ", " + std::to_string(t_max) + "]");
  }
}

Eigen::MatrixXd XkQuadrature::apply(Kind kind, int order, const Grid& grid, const Eigen::MatrixXd& increments) const {
  const auto cells = nodes_.size();
  const auto rows = static_cast<Eigen::Index>(grid.size());
  const double power = kind == Kind::value ? -0.5 * (1.0 + K_) : static_cast<double>(order) - 0.5 * (1.0 + K_);
  const double sign = (kind == Kind::derivative && order % 2 == 0) ? -1.0 : 1.0;
  Eigen::VectorXd scale(cells);
  for (Eigen::Index c = 0; c < cells; ++c) scale[c] = sign * std::pow(nodes_[c], power);

  Eigen::MatrixXd out(rows, increments.cols());
  detail::RowMatrix block;
  for (Eigen::Index r0 = 0; r0 < rows; r0 += kRowBlock) {
    const Eigen::Index nr = std::min(kRowBlock, rows - r0);
    block.resize(nr, cells);
    for (Eigen::Index i = 0; i < nr; ++i) {
      const double t = grid[static_cast<std::size_t>(r0 + i)];
      for (Eigen::Index c = 0; c < cells; ++c) {
        const double decay = kind == Kind::value ? -std::expm1(-nodes_[c] * t) : std::exp(-nodes_[c] * t);
        block(i, c) = decay * scale[c];
      }
    }
    detail::multiply_rows(block, increments, out.middleRows(r0, nr));
  }
  return out;
}

Path XkQuadrature::evaluate(const BrownianDriver& driver, const Grid& grid) const {
  if (driver.increments.size() != nodes_.size())
    throw std::invalid_argument("XkQuadrature: driver does not match the scheme");
  check_grid(grid);
  Path p{grid, apply(Kind::value, 0, grid, driver.increments), {}};
  return p;
}

Path XkQuadrature::derivative(const BrownianDriver& driver, const Grid& grid, int order, double t_floor) const {
  if (order < 1) throw std::invalid_argument("XkQuadrature::derivative: order must be >= 1");
  if (driver.increments.size() != nodes_.size())
    throw std::invalid_argument("XkQuadrature: driver does not match the scheme");
  const double floor = t_floor >= 0.0 ? t_floor : kDerivativeFloorFraction * grid.back();
  if (grid.front() < floor || !(grid.front() > 0.0))
    throw std::domain_error("X^K derivative requested below t_floor = " + std::to_string(floor));
  check_grid(grid);
  return {grid, apply(Kind::derivative, order, grid, driver.increments), {}};
}

Ensemble XkQuadrature::sample_ensemble(const Grid& grid, std::span<const std::uint64_t> seeds, unsigned workers) const {
  check_grid(grid);
  Ensemble e{grid, Eigen::MatrixXd(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(seeds.size())),
             {seeds.begin(), seeds.end()}};
  const Eigen::ArrayXd root_width = widths_.array().sqrt();
  detail::for_each_chunk(seeds.size(), workers, [&](std::size_t begin, std::size_t end) {
    Eigen::MatrixXd inc(nodes_.size(), static_cast<Eigen::Index>(end - begin));
    for (std::size_t r = begin; r < end; ++r) {
      auto col = inc.col(static_cast<Eigen::Index>(r - begin));
      NormalSource src(seeds[r]);
      src.fill(col);
      col.array() *= root_width;
    }
    e.values.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)) =
        apply(Kind::value, 0, grid, inc);
  });
  return e;
}

double XkQuadrature::discretized_cov(double t, double s) const {
  double acc = 0.0;
  for (Eigen::Index c = 0; c < nodes_.size(); ++c) {
    const double th = nodes_[c];
    acc += std::expm1(-th * t) * std::expm1(-th * s) * std::pow(th, -1.0 - K_) * widths_[c];
  }
  return acc;
}

double XkQuadrature::discretized_derivative_variance(double t) const {
  double acc = 0.0;
  for (Eigen::Index c = 0; c < nodes_.size(); ++c) {
    const double th = nodes_[c];
    acc += std::pow(th, 1.0 - K_) * std::exp(-2.0 * th * t) * widths_[c];
  }
  return acc;
}

std::pair<Path, BrownianDriver> xk_quadrature(const Grid& grid, double K, const QuadratureScheme& scheme,
                                              std::uint64_t seed, double tolerance) {
  XkQuadrature q(K, scheme, tolerance);
  q.check_grid(grid);
  BrownianDriver d = q.driver(seed);
  Path p = q.evaluate(d, grid);
  return {std::move(p), std::move(d)};
}

Path xk_derivative(const BrownianDriver& driver, const Grid& grid, double K, int order, double t_floor) {
  return XkQuadrature(K, driver.scheme).derivative(driver, grid, order, t_floor);
}

}  // namespace bifbm
