#include "bifbm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bifbm/random.hpp"
#include "bifbm/statistics.hpp"
#include "bifbm/xk_quadrature.hpp"

namespace bifbm {

namespace {

void require_uniform(const Grid& g, const char* who) {
  if (g.size() < 2 || !g.is_uniform()) throw std::invalid_argument(std::string(who) + ": grid must be uniform");
}

// Integer multiple of step, or throw.
std::size_t grid_multiple(double x, double step, const char* what) {
  const double q = x / step;
  const double r = std::round(q);
  if (r < 0.0 || std::abs(q - r) > 1e-9 * std::max(1.0, q))
    throw std::invalid_argument(std::string("strong_variation: ") + what + " is not a multiple of the grid step");
  return static_cast<std::size_t>(r);
}

double column_variation(const Eigen::MatrixXd& v, Eigen::Index col, double alpha, Eigen::Index stride) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i + stride < v.rows(); i += stride) acc += std::pow(std::abs(v(i + stride, col) - v(i, col)), alpha);
  return acc;
}

}  // namespace

void StepFunction::validate() const {
  if (levels.empty() || breakpoints.size() != levels.size() + 1)
    throw std::invalid_argument("StepFunction: need one more breakpoint than levels");
  if (!(breakpoints.front() >= 0.0)) throw std::invalid_argument("StepFunction: breakpoints must be nonnegative");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw std::invalid_argument("StepFunction: breakpoints must be strictly increasing");
}

StepFunction StepFunction::indicator(double a, double b) { return {{a, b}, {1.0}}; }

StepFunction random_step_function(std::mt19937_64& rng, double T, std::size_t max_pieces, double level_bound) {
  std::uniform_int_distribution<std::size_t> pieces_dist(1, max_pieces);
  std::uniform_real_distribution<double> time_dist(0.0, T);
  std::uniform_real_distribution<double> level_dist(-level_bound, level_bound);
  const std::size_t pieces = pieces_dist(rng);
  std::vector<double> cuts{0.0, T};
  while (cuts.size() < pieces + 1) {
    const double c = time_dist(rng);
    if (std::find(cuts.begin(), cuts.end(), c) == cuts.end() && c > 0.0) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  StepFunction phi{cuts, std::vector<double>(pieces)};
  for (auto& l : phi.levels) l = level_dist(rng);
  return phi;
}

double variation(const Path& path, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("variation: alpha must be positive");
  require_uniform(path.grid, "variation");
  double acc = 0.0;
  for (Eigen::Index i = 0; i + 1 < path.values.size(); ++i)
    acc += std::pow(std::abs(path.values[i + 1] - path.values[i]), alpha);
  return acc;
}

std::vector<double> variation(const Ensemble& e, double alpha, std::size_t stride) {
  if (!(alpha > 0.0)) throw std::invalid_argument("variation: alpha must be positive");
  require_uniform(e.grid, "variation");
  if (stride == 0 || (e.grid.size() - 1) % stride != 0)
    throw std::invalid_argument("variation: stride must divide the number of grid steps");
  std::vector<double> out(e.replicates());
  for (std::size_t r = 0; r < out.size(); ++r)
    out[r] = column_variation(e.values, static_cast<Eigen::Index>(r), alpha, static_cast<Eigen::Index>(stride));
  return out;
}

double strong_variation(const Path& path, double alpha, double eps, double t) {
  if (!(alpha > 0.0)) throw std::invalid_argument("strong_variation: alpha must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("strong_variation: eps must be positive");
  require_uniform(path.grid, "strong_variation");
  if (!path.grid.includes_origin()) throw std::invalid_argument("strong_variation: grid must start at 0");
  const double h = path.grid.step();
  const std::size_t lag = grid_multiple(eps, h, "eps");
  const std::size_t last = path.grid.size() - 1;
  if (lag == 0 || lag > last) throw std::invalid_argument("strong_variation: eps outside the path's domain");
  const std::size_t m = std::isnan(t) ? last - lag : grid_multiple(t, h, "t");
  if (m + lag > last) throw std::invalid_argument("strong_variation: t + eps beyond the path's domain");
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto a = static_cast<Eigen::Index>(i);
    acc += std::pow(std::abs(path.values[a + static_cast<Eigen::Index>(lag)] - path.values[a]), alpha);
  }
  return acc * h / eps;
}

CheckReport x_variation_vanishes(double K, double H, std::span<const std::size_t> n_sweep, std::uint64_t seed,
                                 const XVariationOptions& options) {
  const BifbmParams p(H, K);
  if (!(K < 1.0)) throw std::domain_error("x_variation_vanishes: requires K < 1");
  if (n_sweep.empty()) throw std::invalid_argument("x_variation_vanishes: empty sweep");
  const std::size_t finest = *std::max_element(n_sweep.begin(), n_sweep.end());
  for (std::size_t n : n_sweep)
    if (n == 0 || finest % n != 0) throw std::invalid_argument("x_variation_vanishes: sweep sizes must divide the largest");

  const double alpha = 1.0 / p.HK;
  const double reference =
      std::isnan(options.reference) ? std::pow(c2(K), alpha) * abs_moment(p.HK) : options.reference;

  const Grid grid = Grid::uniform(finest, options.T);
  const Grid x_grid = power_grid(grid, 2.0 * H);
  const QuadratureScheme scheme = QuadratureScheme::covering(x_grid[1], x_grid.back(), K);
  const XkQuadrature quad(K, scheme);
  quad.check_grid(x_grid);
  const auto seeds = derive_seeds(seed, Stream::x_component, options.n_rep);
  Ensemble e = quad.sample_ensemble(x_grid, seeds, options.workers);
  e.grid = grid;  // X^{H,K}_t = X^K_{t^{2H}}: same values, target grid

  std::vector<std::size_t> sizes(n_sweep.begin(), n_sweep.end());
  std::sort(sizes.begin(), sizes.end());
  nlohmann::json rows = nlohmann::json::array();
  std::vector<double> means;
  for (std::size_t n : sizes) {
    const Estimate v = mean_estimate(variation(e, alpha, finest / n));
    const Estimate v1 = mean_estimate(variation(e, 1.0, finest / n));
    means.push_back(v.value);
    rows.push_back({{"n", n}, {"alpha", alpha}, {"mean", v.value}, {"stderr", v.se},
                    {"total_variation_mean", v1.value}, {"total_variation_stderr", v1.se}});
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < means.size(); ++i) decreasing = decreasing && means[i] < means[i - 1];
  const double ratio = means.back() / reference;

  CheckReport r;
  r.check = "x_variation_vanishes";
  r.params = {H, K, options.T, finest, grid.size()};
  r.statistic = ratio;
  r.tolerance = options.threshold;
  r.pass = decreasing && ratio < options.threshold;
  r.n_rep = options.n_rep;
  r.master_seed = seed;
  r.details = {{"alpha", alpha},
               {"reference_limit", reference},
               {"strictly_decreasing", decreasing},
               {"sweep", rows},
               {"theta_max", scheme.theta_max},
               {"cells", scheme.cells}};
  return r;
}

CheckReport origin_growth_probe(double K, std::size_t n_rep, std::uint64_t seed, const OriginProbeOptions& options) {
  if (!(K > 0.0 && K < 1.0)) throw std::domain_error("origin_growth_probe: requires K in (0,1)");
  if (!(options.k_min >= 2 && options.k_min <= options.k_split && options.k_split <= options.k_max))
    throw std::invalid_argument("origin_growth_probe: need 2 <= k_min <= k_split <= k_max");

  // Ascending times 2^{-k_max}, ..., 2^{-k_min}; row of 2^{-k} is k_max - k.
  std::vector<double> times;
  for (int k = options.k_max; k >= options.k_min; --k) times.push_back(std::ldexp(1.0, -k));
  const Grid grid(times);
  const QuadratureScheme scheme = QuadratureScheme::covering(grid.front(), grid.back(), K);
  const XkQuadrature quad(K, scheme);
  quad.check_grid(grid);
  const auto seeds = derive_seeds(seed, Stream::probe, n_rep);
  const Ensemble e = quad.sample_ensemble(grid, seeds, options.workers);

  std::vector<double> norm(times.size());
  nlohmann::json scale = nlohmann::json::array();
  bool scale_decreasing = true;
  double previous_scale = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    const double loglog = std::log(std::log(1.0 / t));
    norm[i] = std::sqrt(std::pow(t, K) * loglog);
    // sd of X_t / norm: sqrt(C3 / log log(1/t)), shrinking as t -> 0.
    const double s = std::sqrt(c3(K) / loglog);
    if (i > 0) scale_decreasing = scale_decreasing && previous_scale < s;
    previous_scale = s;
    scale.push_back({{"t", t}, {"ratio_sd", s}});
  }

  const auto n_times = static_cast<Eigen::Index>(times.size());
  const auto split_row = static_cast<Eigen::Index>(options.k_max - options.k_split);
  std::vector<double> g_shallow(n_rep), g_deep(n_rep);
  for (std::size_t r = 0; r < n_rep; ++r) {
    double shallow = 0.0, deep = 0.0;
    for (Eigen::Index i = 0; i < n_times; ++i) {
      const double g = std::abs(e.values(i, static_cast<Eigen::Index>(r))) / norm[static_cast<std::size_t>(i)];
      deep = std::max(deep, g);
      if (i >= split_row) shallow = std::max(shallow, g);
    }
    g_shallow[r] = shallow;
    g_deep[r] = deep;
  }
  const double q_shallow = quantile(g_shallow, options.quantile);
  const double q_deep = quantile(g_deep, options.quantile);
  const double ratio = q_deep / q_shallow;

  CheckReport r;
  r.check = "origin_growth_probe";
  r.params = {std::nullopt, K, grid.back(), times.size(), times.size()};
  r.statistic = ratio;
  r.tolerance = options.stability_factor;
  r.pass = std::isfinite(q_shallow) && std::isfinite(q_deep) && q_shallow > 0.0 && ratio <= options.stability_factor &&
           ratio >= 1.0 / options.stability_factor;
  r.n_rep = n_rep;
  r.master_seed = seed;
  r.details = {{"quantile", options.quantile},
               {"k_range", {options.k_min, options.k_max}},
               {"k_split", options.k_split},
               {"quantile_shallow", q_shallow},
               {"quantile_deep", q_deep},
               {"ratio_sd_decreasing_toward_origin", scale_decreasing},
               {"ratio_sd", scale},
               {"theta_max", scheme.theta_max},
               {"cells", scheme.cells}};
  return r;
}

double step_quadratic_form(const StepFunction& phi, const CovKernel& kernel) {
  phi.validate();
  // Coefficient of X at each breakpoint: w_j = phi_{j-1} - phi_j.
  const std::size_t m = phi.breakpoints.size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < phi.levels.size(); ++i) {
    w[static_cast<Eigen::Index>(i)] -= phi.levels[i];
    w[static_cast<Eigen::Index>(i + 1)] += phi.levels[i];
  }
  const Eigen::MatrixXd g = gram_matrix(kernel, phi.breakpoints);
  return w.dot(g * w);
}

CheckReport l1_weight_bound_check(const StepFunction& phi, const BifbmParams& p) {
  if (!(p.K < 1.0)) throw std::domain_error("l1_weight_bound_check: requires K < 1");
  const double lhs = step_quadratic_form(phi, xhk_kernel(p));
  double l1 = 0.0;
  for (std::size_t i = 0; i < phi.levels.size(); ++i)
    l1 += std::abs(phi.levels[i]) * (std::pow(phi.breakpoints[i + 1], p.HK) - std::pow(phi.breakpoints[i], p.HK)) / p.HK;
  const double rhs = c_bound(p.H, p.K) * l1 * l1;

  CheckReport r;
  r.check = "l1_weight_bound";
  r.params = {p.H, p.K, phi.breakpoints.back(), phi.levels.size(), phi.breakpoints.size()};
  r.statistic = rhs > 0.0 ? lhs / rhs : 0.0;
  r.tolerance = 1.0 + 1e-9;
  r.pass = lhs <= rhs * (1.0 + 1e-9);
  r.details = {{"lhs", lhs}, {"rhs", rhs}, {"c_bound", c_bound(p.H, p.K)}, {"l1_weight", l1}};
  return r;
}

double c_bound_finite_difference(double H, double K, double s, double t, double h) {
  using L = long double;
  const BasicBifbmParams<L> p(H, K);
  const L ls = s, lt = t, lh = h;
  auto f = [&](L a, L b) { return xhk_cov<L>(a, b, p); };
  const L mixed = (f(ls + lh, lt + lh) - f(ls + lh, lt - lh) - f(ls - lh, lt + lh) + f(ls - lh, lt - lh)) / (4 * lh * lh);
  const L two_h = 2 * p.H;
  const L shape = std::pow(std::pow(ls, two_h) + std::pow(lt, two_h), p.K - 2) * std::pow(ls * lt, two_h - 1);
  return static_cast<double>(mixed / shape);
}

double holder_exponent_estimate(const Ensemble& paths) {
  require_uniform(paths.grid, "holder_exponent_estimate");
  if (paths.grid.size() < 4096) throw std::invalid_argument("holder_exponent_estimate: need at least 4096 grid points");
  const Eigen::Index rows = paths.values.rows();
  std::vector<double> log_lag, log_median;
  std::vector<double> inc;
  for (Eigen::Index lag = 1; lag <= 64; lag *= 2) {
    inc.clear();
    inc.reserve(static_cast<std::size_t>((rows - lag) * paths.values.cols()));
    for (Eigen::Index r = 0; r < paths.values.cols(); ++r)
      for (Eigen::Index i = 0; i + lag < rows; ++i) inc.push_back(std::abs(paths.values(i + lag, r) - paths.values(i, r)));
    log_lag.push_back(std::log(static_cast<double>(lag) * paths.grid.step()));
    log_median.push_back(std::log(median(std::move(inc))));
    inc = {};
  }
  return ols_slope(log_lag, log_median);
}

}  // namespace bifbm
