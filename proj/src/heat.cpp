#include "bifbm/heat.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bifbm/covariance.hpp"
#include "bifbm/decomposition.hpp"
#include "bifbm/random.hpp"
#include "bifbm/statistics.hpp"

namespace bifbm {

namespace {

constexpr std::size_t kGaussPoints = 32;

struct GaussLegendre {
  std::array<double, kGaussPoints> nodes{};
  std::array<double, kGaussPoints> weights{};
};

// Nodes and weights on [-1, 1] by Newton iteration on P_n.
GaussLegendre make_gauss_legendre() {
  GaussLegendre gl;
  const int n = static_cast<int>(kGaussPoints);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    gl.nodes[static_cast<std::size_t>(i)] = x;
    gl.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return gl;
}

const GaussLegendre& gauss_legendre() {
  static const GaussLegendre gl = make_gauss_legendre();
  return gl;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

std::size_t tile_count(double extent, double step) {
  const double q = extent / step;
  const double r = std::round(q);
  if (std::abs(q - r) > 1e-9 * std::max(1.0, q) || r < 1.0)
    throw std::invalid_argument("SpaceTimeGrid: step does not tile its interval");
  return static_cast<std::size_t>(r);
}

Eigen::MatrixXd square_root(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

Ensemble draw_stacked(const Grid& times, const detail::RowMatrix& factors, Eigen::Index rows,
                      std::span<const std::uint64_t> seeds, unsigned workers) {
  Ensemble e{times, Eigen::MatrixXd(rows, static_cast<Eigen::Index>(seeds.size())), {seeds.begin(), seeds.end()}};
  detail::for_each_chunk(seeds.size(), workers, [&](std::size_t begin, std::size_t end) {
    Eigen::MatrixXd z(factors.cols(), static_cast<Eigen::Index>(end - begin));
    for (std::size_t r = begin; r < end; ++r) {
      NormalSource src(seeds[r]);
      src.fill(z.col(static_cast<Eigen::Index>(r - begin)));
    }
    detail::multiply_rows(factors, z,
                          e.values.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)));
  });
  return e;
}

double require_horizon(const Grid& grid, const SpaceTimeGrid& stg) {
  if (grid.back() > stg.T * (1.0 + 1e-12)) throw std::invalid_argument("heat: grid extends beyond the horizon T");
  return grid.back();
}

}  // namespace

double heat_kernel(double tau, double x) {
  if (!(tau > 0.0)) throw std::domain_error("heat_kernel: tau must be positive");
  return std::exp(-x * x / (2.0 * tau)) / std::sqrt(2.0 * std::numbers::pi * tau);
}

double heat_cov_exact(double t, double s) {
  if (!(t >= 0.0 && s >= 0.0)) throw std::domain_error("heat_cov_exact: times must be nonnegative");
  const double lag = t == s ? 0.0 : std::sqrt(std::abs(t - s));
  return (std::sqrt(t + s) - lag) / std::sqrt(2.0 * std::numbers::pi);
}

double heat_bifbm_scale() { return std::pow(std::numbers::pi, -0.25); }

SpaceTimeGrid SpaceTimeGrid::standard(double T) {
  if (!(T > 0.0)) throw std::invalid_argument("SpaceTimeGrid: horizon must be positive");
  const double L = 8.0 * std::sqrt(T);
  return {T / 512.0, L / 256.0, L, T};
}

SpaceTimeGrid SpaceTimeGrid::refined() const { return {dt / 2.0, dx / 2.0, L, T}; }

std::size_t SpaceTimeGrid::time_cells() const { return tile_count(T, dt); }
std::size_t SpaceTimeGrid::space_cells() const { return tile_count(2.0 * L, dx); }

double SpaceTimeGrid::tail_mass(double x0) const {
  const double z = (L - std::abs(x0)) / std::sqrt(T);
  return 2.0 * normal_cdf(-z);
}

void SpaceTimeGrid::validate(double x0) const {
  if (!(dt > 0.0 && dx > 0.0 && L > 0.0 && T > 0.0)) throw std::invalid_argument("SpaceTimeGrid: nonpositive entry");
  (void)time_cells();
  (void)space_cells();
  if (!(tail_mass(x0) < 1e-6))
    throw std::invalid_argument("SpaceTimeGrid: heat-kernel mass outside [-L, L] is not below 1e-6");
}

HeatScheme::HeatScheme(Grid times, double x0, SpaceTimeGrid stg) : times_(std::move(times)), x0_(x0), stg_(stg) {
  stg_.validate(x0_);
  const double top = require_horizon(times_, stg_);
  active_cells_ = std::min(stg_.time_cells(), static_cast<std::size_t>(std::ceil(top / stg_.dt - 1e-9)));
}

Eigen::MatrixXd HeatScheme::cell_weights(std::size_t j) const {
  const auto m = static_cast<Eigen::Index>(times_.size());
  const auto nx = static_cast<Eigen::Index>(stg_.space_cells());
  const double dt = stg_.dt;
  const double dx = stg_.dx;
  const double s0 = static_cast<double>(j) * dt;
  const auto& gl = gauss_legendre();

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, nx);
  for (Eigen::Index a = 0; a < m; ++a) {
    const double t = times_[static_cast<std::size_t>(a)];
    if (t <= s0) continue;
    const double gap = t - s0;
    if (gap <= dt * (1.0 + 1e-9)) {
      // Cell average of p over [s0, t] x [y_k, y_k + dx], integrated in u = sqrt(tau).
      const double umax = std::sqrt(gap);
      for (Eigen::Index k = 0; k < nx; ++k) {
        const double y = -stg_.L + static_cast<double>(k) * dx;
        const double hi = x0_ - y;
        const double lo = x0_ - y - dx;
        double acc = 0.0;
        for (std::size_t q = 0; q < kGaussPoints; ++q) {
          const double u = 0.5 * umax * (gl.nodes[q] + 1.0);
          acc += gl.weights[q] * 0.5 * umax * 2.0 * u * (normal_cdf(hi / u) - normal_cdf(lo / u));
        }
        w(a, k) = acc / (dt * dx);
      }
    } else {
      const double tau = gap - 0.5 * dt;
      for (Eigen::Index k = 0; k < nx; ++k) {
        const double y = -stg_.L + (static_cast<double>(k) + 0.5) * dx;
        w(a, k) = heat_kernel(tau, x0_ - y);
      }
    }
  }
  return w;
}

Eigen::MatrixXd HeatScheme::discretized_cov() const {
  const auto m = static_cast<Eigen::Index>(times_.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t j = 0; j < active_cells_; ++j) {
    const Eigen::MatrixXd w = cell_weights(j);
    cov.noalias() += w * w.transpose();
  }
  return cov * (stg_.dt * stg_.dx);
}

HeatPath simulate_heat(const Grid& grid, double x0, const SpaceTimeGrid& stg, std::uint64_t seed) {
  const HeatScheme scheme(grid, x0, stg);
  const double cell_sd = std::sqrt(stg.dt * stg.dx);
  NormalSource src(seed);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  Eigen::VectorXd dw(static_cast<Eigen::Index>(stg.space_cells()));
  for (std::size_t j = 0; j < scheme.active_time_cells(); ++j) {
    src.fill(dw);
    dw *= cell_sd;
    u.noalias() += scheme.cell_weights(j) * dw;
  }
  return {grid, u, "full space-time white noise"};
}

HeatEnsembleSampler::HeatEnsembleSampler(const HeatScheme& scheme) : times_(scheme.times()) {
  const auto m = static_cast<Eigen::Index>(times_.size());
  const auto cells = static_cast<Eigen::Index>(scheme.active_time_cells());
  const double area = scheme.space_time().dt * scheme.space_time().dx;
  factors_.resize(m, cells * m);
  covariance_ = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < cells; ++j) {
    const Eigen::MatrixXd w = scheme.cell_weights(static_cast<std::size_t>(j));
    const Eigen::MatrixXd g = area * (w * w.transpose());
    covariance_ += g;
    factors_.middleCols(j * m, m) = square_root(g);
  }
}

Ensemble HeatEnsembleSampler::sample_ensemble(std::span<const std::uint64_t> seeds, unsigned workers) const {
  return draw_stacked(times_, factors_, static_cast<Eigen::Index>(times_.size()), seeds, workers);
}

CoupledHeatSampler::CoupledHeatSampler(const Grid& times, double x0, const SpaceTimeGrid& coarse) : times_(times) {
  const SpaceTimeGrid fine = coarse.refined();
  const HeatScheme sc(times, x0, coarse);
  const HeatScheme sf(times, x0, fine);
  const auto m = static_cast<Eigen::Index>(times.size());
  const auto nxc = static_cast<Eigen::Index>(coarse.space_cells());
  const auto nxf = static_cast<Eigen::Index>(fine.space_cells());
  const auto cells = static_cast<Eigen::Index>(sc.active_time_cells());
  const double fine_area = fine.dt * fine.dx;

  factors_.resize(2 * m, cells * 2 * m);
  coarse_cov_ = Eigen::MatrixXd::Zero(m, m);
  fine_cov_ = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd omega(2 * m, 2 * nxf);
  for (Eigen::Index j = 0; j < cells; ++j) {
    const Eigen::MatrixXd wc = sc.cell_weights(static_cast<std::size_t>(j));
    for (Eigen::Index q = 0; q < 2; ++q) {
      const Eigen::MatrixXd wf = sf.cell_weights(static_cast<std::size_t>(2 * j + q));
      for (Eigen::Index k = 0; k < nxf; ++k) {
        omega.block(0, q * nxf + k, m, 1) = wc.col(k / 2);
        omega.block(m, q * nxf + k, m, 1) = wf.col(k);
      }
    }
    (void)nxc;
    const Eigen::MatrixXd g = fine_area * (omega * omega.transpose());
    coarse_cov_ += g.topLeftCorner(m, m);
    fine_cov_ += g.bottomRightCorner(m, m);
    factors_.middleCols(j * 2 * m, 2 * m) = square_root(g);
  }
}

CoupledHeatSampler::Pair CoupledHeatSampler::sample_ensemble(std::span<const std::uint64_t> seeds,
                                                             unsigned workers) const {
  const auto m = static_cast<Eigen::Index>(times_.size());
  Ensemble joint = draw_stacked(times_, factors_, 2 * m, seeds, workers);
  Pair p{{times_, joint.values.topRows(m), joint.seeds}, {times_, joint.values.bottomRows(m), joint.seeds}};
  return p;
}

CheckReport bifbm_proportionality(std::size_t n_rep, const Grid& grid, std::uint64_t seed,
                                  const HeatCheckOptions& options) {
  if (n_rep < 1000) throw std::invalid_argument("bifbm_proportionality: n_rep must be at least 1000");
  const double T = grid.back();
  const SpaceTimeGrid stg = SpaceTimeGrid::standard(T);
  const HeatScheme scheme(grid, options.x0, stg);
  const HeatEnsembleSampler sampler(scheme);
  const auto seeds = derive_seeds(seed, Stream::heat, n_rep);
  const Ensemble e = sampler.sample_ensemble(seeds, options.workers);
  const BifbmParams half(0.5, 0.5);

  struct Cell {
    Eigen::Index i, j;
    Estimate est;
    double r;
    double offset;  // discretized minus exact covariance
  };
  std::vector<Cell> cells;
  double num = 0.0, num_corr = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(grid.size()); ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double t = grid[static_cast<std::size_t>(i)];
      const double s = grid[static_cast<std::size_t>(j)];
      if (t == 0.0 || s == 0.0) continue;
      const Estimate est = product_moment(e.values, i, j);
      const double r = bifbm_cov(t, s, half);
      const double offset = sampler.covariance()(i, j) - heat_cov_exact(t, s);
      cells.push_back({i, j, est, r, offset});
      num += est.value * r;
      num_corr += (est.value - offset) * r;
      den += r * r;
    }
  }
  const double c_hat = std::sqrt(num / den);
  const double c_hat_corrected = std::sqrt(num_corr / den);
  const double c_exact = heat_bifbm_scale();
  const double scale_error = std::abs(c_hat / c_exact - 1.0);

  double worst_residual = 0.0;
  for (const auto& c : cells) {
    const double z = std::abs(c.est.value - c.offset - c_hat_corrected * c_hat_corrected * c.r) / c.est.se;
    worst_residual = std::max(worst_residual, z);
  }

  CheckReport r;
  r.check = "heat_bifbm_proportionality";
  r.params = {0.5, 0.5, T, stg.time_cells(), grid.size()};
  r.statistic = scale_error;
  r.tolerance = options.scale_tolerance;
  r.pass = scale_error <= options.scale_tolerance && worst_residual <= options.residual_tolerance;
  r.n_rep = n_rep;
  r.master_seed = seed;
  r.details = {{"c_hat", c_hat},
               {"c_hat_discretization_corrected", c_hat_corrected},
               {"c_closed_form", c_exact},
               {"max_residual_in_se", worst_residual},
               {"residual_tolerance", options.residual_tolerance},
               {"pairs", cells.size()},
               {"dt", stg.dt},
               {"dx", stg.dx},
               {"L", stg.L}};
  return r;
}

CheckReport heat_refinement_check(std::size_t n_rep, const Grid& grid, std::uint64_t seed,
                                  const HeatCheckOptions& options) {
  const double T = grid.back();
  const SpaceTimeGrid coarse = SpaceTimeGrid::standard(T);
  const CoupledHeatSampler sampler(grid, options.x0, coarse);
  const auto seeds = derive_seeds(seed, Stream::heat, n_rep);
  const auto ens = sampler.sample_ensemble(seeds, options.workers);

  bool deterministic_ok = true;
  double worst_ratio = 0.0;
  double worst_shift_z = 0.0;
  double sum_coarse = 0.0, sum_fine = 0.0;
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [t, s] : probe_pairs(T)) {
    const auto i = static_cast<Eigen::Index>(grid.nearest(t));
    const auto j = static_cast<Eigen::Index>(grid.nearest(s));
    const double exact = heat_cov_exact(grid[static_cast<std::size_t>(i)], grid[static_cast<std::size_t>(j)]);
    const double err_c = std::abs(sampler.coarse_covariance()(i, j) - exact);
    const double err_f = std::abs(sampler.fine_covariance()(i, j) - exact);
    deterministic_ok = deterministic_ok && err_f <= err_c;
    sum_coarse += err_c;
    sum_fine += err_f;
    worst_ratio = std::max(worst_ratio, err_c > 0.0 ? err_f / err_c : 0.0);

    std::vector<double> diff(n_rep);
    for (std::size_t r = 0; r < n_rep; ++r) {
      const auto rr = static_cast<Eigen::Index>(r);
      diff[r] = ens.fine.values(i, rr) * ens.fine.values(j, rr) - ens.coarse.values(i, rr) * ens.coarse.values(j, rr);
    }
    const Estimate shift = mean_estimate(diff);
    const double expected_shift = sampler.fine_covariance()(i, j) - sampler.coarse_covariance()(i, j);
    const double z = std::abs(shift.value - expected_shift) / shift.se;
    worst_shift_z = std::max(worst_shift_z, z);
    const Estimate mc_c = product_moment(ens.coarse.values, i, j);
    const Estimate mc_f = product_moment(ens.fine.values, i, j);
    pairs.push_back({{"t", grid[static_cast<std::size_t>(i)]},
                     {"s", grid[static_cast<std::size_t>(j)]},
                     {"exact", exact},
                     {"coarse_error", err_c},
                     {"fine_error", err_f},
                     {"mc_coarse_error", std::abs(mc_c.value - exact)},
                     {"mc_fine_error", std::abs(mc_f.value - exact)},
                     {"mc_stderr", mc_c.se},
                     {"shift_expected", expected_shift},
                     {"shift_mc", shift.value},
                     {"shift_gap_in_se", z}});
  }
  deterministic_ok = deterministic_ok && sum_fine < sum_coarse;

  CheckReport r;
  r.check = "heat_refinement";
  r.params = {0.5, 0.5, T, coarse.time_cells(), grid.size()};
  r.statistic = worst_ratio;
  r.tolerance = 1.0;
  r.pass = deterministic_ok && worst_shift_z <= options.residual_tolerance;
  r.n_rep = n_rep;
  r.master_seed = seed;
  r.details = {{"pairs", pairs},
               {"total_coarse_error", sum_coarse},
               {"total_fine_error", sum_fine},
               {"max_shift_gap_in_se", worst_shift_z}};
  return r;
}

}  // namespace bifbm
