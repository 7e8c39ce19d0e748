#include "bifbm/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bifbm/circulant.hpp"
#include "bifbm/random.hpp"
#include "bifbm/statistics.hpp"

namespace bifbm {

namespace {

CholeskySampler make_bifbm_sampler(const Grid& grid, const BifbmParams& p) {
  return CholeskySampler(bifbm_kernel(p), grid, [&p](std::span<const double> pts) { return bifbm_gram(pts, p); });
}

std::pair<double, double> positive_range(const Grid& g) {
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g[i] > 0.0) return {g[i], g.back()};
  return {0.0, 0.0};
}

}  // namespace

DecompositionSampler::DecompositionSampler(Grid grid, BifbmParams params, XMethod method,
                                           std::optional<QuadratureScheme> scheme)
    : grid_(std::move(grid)),
      params_(params),
      method_(method),
      x_grid_(power_grid(grid_, 2.0 * params.H)),
      bifbm_(make_bifbm_sampler(grid_, params_)) {
  if (params_.K >= 1.0) return;
  c1_ = bifbm::c1(params_.K);
  if (method_ == XMethod::quadrature) {
    if (!scheme) {
      const auto [lo, hi] = positive_range(x_grid_);
      scheme = lo > 0.0 ? QuadratureScheme::covering(lo, hi, params_.K) : QuadratureScheme::standard();
    }
    x_quadrature_.emplace(params_.K, *scheme);
    x_quadrature_->check_grid(x_grid_);
  } else {
    x_cholesky_.emplace(xk_kernel(params_.K), x_grid_);
  }
}

DecompositionSample DecompositionSampler::sample(SeedPair seeds) const {
  const double exponent = 2.0 * params_.H;
  Path x{grid_, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid_.size())), "K = 1: X component vanishes"};
  if (x_quadrature_) {
    x = time_change(x_quadrature_->evaluate(x_quadrature_->driver(seeds.x), x_grid_), grid_, exponent);
  } else if (x_cholesky_) {
    x = time_change(x_cholesky_->sample(seeds.x), grid_, exponent);
  }
  Path b = bifbm_.sample(seeds.bifbm);
  Path sum{grid_, c1_ * x.values + b.values, {}};
  return {std::move(x), std::move(b), std::move(sum)};
}

DecompositionEnsemble DecompositionSampler::sample_ensemble(std::uint64_t master_seed, std::size_t n_rep,
                                                            unsigned workers) const {
  const auto x_seeds = derive_seeds(master_seed, Stream::x_component, n_rep);
  const auto b_seeds = derive_seeds(master_seed, Stream::bifbm_component, n_rep);
  Ensemble x{grid_, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid_.size()), static_cast<Eigen::Index>(n_rep)),
             x_seeds};
  if (x_quadrature_) {
    x.values = x_quadrature_->sample_ensemble(x_grid_, x_seeds, workers).values;
  } else if (x_cholesky_) {
    x.values = x_cholesky_->sample_ensemble(x_seeds, workers).values;
  }
  Ensemble b = bifbm_.sample_ensemble(b_seeds, workers);
  Ensemble sum{grid_, c1_ * x.values + b.values, {}};
  return {std::move(x), std::move(b), std::move(sum)};
}

DecompositionSample sample_decomposition(const Grid& grid, const BifbmParams& p, SeedPair seeds, XMethod method) {
  return DecompositionSampler(grid, p, method).sample(seeds);
}

std::array<double, 3> probe_times(double T) { return {T / 8.0, T / 2.0, T}; }

std::array<std::pair<double, double>, 6> probe_pairs(double T) {
  const auto p = probe_times(T);
  return {{{p[0], p[0]}, {p[1], p[1]}, {p[2], p[2]}, {p[0], p[1]}, {p[1], p[2]}, {p[0], p[2]}}};
}

CheckReport verify_law_equality(std::size_t n_rep, const Grid& grid, const BifbmParams& p, std::uint64_t master_seed,
                                const LawEqualityOptions& options) {
  if (n_rep < 1000) throw std::invalid_argument("verify_law_equality: n_rep must be at least 1000");
  const double step = grid.step();
  const double T = grid.back();
  const auto steps = static_cast<std::size_t>(std::llround(T / step));

  const DecompositionSampler sampler(grid, p, options.method);
  const DecompositionEnsemble dec = sampler.sample_ensemble(master_seed, n_rep, options.workers);

  const double scale = std::isnan(options.reference_scale) ? c2(p.K) : options.reference_scale;
  const FbmCirculant reference(steps, T, p.HK);
  const auto ref_seeds = derive_seeds(master_seed, Stream::reference, n_rep);
  const Ensemble ref_full = reference.sample_ensemble(ref_seeds, options.workers);
  Eigen::MatrixXd ref(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(n_rep));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(std::llround(grid[i] / step));
    ref.row(static_cast<Eigen::Index>(i)) = scale * ref_full.values.row(k);
  }

  const double c2sq = c2(p.K) * c2(p.K);
  double worst_gap = 0.0;
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [t, s] : probe_pairs(T)) {
    const auto i = static_cast<Eigen::Index>(grid.nearest(t));
    const auto j = static_cast<Eigen::Index>(grid.nearest(s));
    const Estimate a = product_moment(dec.sum.values, i, j);
    const Estimate b = product_moment(ref, i, j);
    const double z = std::abs(a.value - b.value) / std::sqrt(a.se * a.se + b.se * b.se);
    worst_gap = std::max(worst_gap, z);
    pairs.push_back({{"t", grid[static_cast<std::size_t>(i)]},
                     {"s", grid[static_cast<std::size_t>(j)]},
                     {"sum_cov", a.value},
                     {"reference_cov", b.value},
                     {"closed_form", c2sq * fbm_cov(grid[static_cast<std::size_t>(i)], grid[static_cast<std::size_t>(j)], p.HK)},
                     {"gap_in_se", z}});
  }

  double min_p = 1.0;
  nlohmann::json marginals = nlohmann::json::array();
  for (double t : probe_times(T)) {
    const auto i = static_cast<Eigen::Index>(grid.nearest(t));
    std::vector<double> a(dec.sum.values.row(i).begin(), dec.sum.values.row(i).end());
    std::vector<double> b(ref.row(i).begin(), ref.row(i).end());
    const KsResult ks = ks_two_sample(std::move(a), std::move(b));
    min_p = std::min(min_p, ks.p_value);
    marginals.push_back({{"t", grid[static_cast<std::size_t>(i)]}, {"ks_statistic", ks.statistic}, {"p_value", ks.p_value}});
  }

  CheckReport r;
  r.check = "law_equality";
  r.params = {p.H, p.K, T, steps, grid.size()};
  r.statistic = worst_gap;
  r.tolerance = options.gap_tolerance;
  r.pass = worst_gap < options.gap_tolerance && min_p > options.ks_significance;
  r.n_rep = n_rep;
  r.master_seed = master_seed;
  r.details = {{"reference_scale", scale},
               {"c1", sampler.c1()},
               {"c2", c2(p.K)},
               {"x_method", options.method == XMethod::quadrature ? "quadrature" : "cholesky"},
               {"covariance_pairs", pairs},
               {"marginal_tests", marginals},
               {"min_ks_p_value", min_p},
               {"ks_significance", options.ks_significance}};
  return r;
}

}  // namespace bifbm
