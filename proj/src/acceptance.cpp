#include "bifbm/acceptance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <tuple>

#include "bifbm/analysis.hpp"
#include "bifbm/cholesky_sampler.hpp"
#include "bifbm/circulant.hpp"
#include "bifbm/covariance.hpp"
#include "bifbm/decomposition.hpp"
#include "bifbm/heat.hpp"
#include "bifbm/random.hpp"
#include "bifbm/statistics.hpp"
#include "bifbm/xk_quadrature.hpp"

namespace bifbm {

namespace {

constexpr std::array<double, 9> kSweep{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

double relative_gap(double value, double target) { return std::abs(value / target - 1.0); }

// bifBm ensembles are expensive on 2^14-step grids; criteria 7 and 9 share one.
const Ensemble& bifbm_ensemble(const BifbmParams& p, std::size_t steps, std::size_t n_rep,
                               const AcceptanceOptions& o) {
  using Key = std::tuple<double, double, std::size_t, std::size_t, std::uint64_t>;
  static std::map<Key, Ensemble> cache;
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  const Key key{p.H, p.K, steps, n_rep, o.seed};
  auto it = cache.find(key);
  if (it == cache.end()) {
    const CholeskySampler sampler(bifbm_kernel(p), Grid::uniform(steps, 1.0),
                                  [&p](std::span<const double> pts) { return bifbm_gram(pts, p); });
    it = cache.emplace(key, sampler.sample_ensemble(derive_seeds(o.seed, Stream::primary, n_rep), o.workers)).first;
  }
  return it->second;
}

CheckReport decomposition_identity(const AcceptanceOptions&) {
  const Grid grid = Grid::uniform(63, 2.0);
  double worst = 0.0;
  for (double H : kSweep)
    for (double K : kSweep) worst = std::max(worst, decomposition_residual(grid.points(), BifbmParams(H, K)));
  CheckReport r;
  r.params = {std::nullopt, std::nullopt, 2.0, 63, grid.size()};
  r.statistic = worst;
  r.tolerance = 1e-12;
  r.pass = worst <= 1e-12;
  r.details = {{"H_values", kSweep}, {"K_values", kSweep}};
  return r;
}

CheckReport quasi_helix(const AcceptanceOptions&) {
  const Grid grid = Grid::uniform(127, 1.0);
  // Worst of lower/d and d/upper over all pairs; <= 1 when both bounds hold.
  double worst = 0.0;
  std::size_t violations = 0;
  for (double H : kSweep) {
    for (double K : kSweep) {
      const BifbmParams p(H, K);
      const Eigen::MatrixXd g = bifbm_gram(grid.points(), p);
      for (Eigen::Index i = 0; i < g.rows(); ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
          const double lag = std::pow(std::abs(grid[static_cast<std::size_t>(i)] - grid[static_cast<std::size_t>(j)]), 2.0 * p.HK);
          const double d = g(i, i) + g(j, j) - 2.0 * g(i, j);
          const double lower = std::pow(2.0, -K) * lag;
          const double upper = std::pow(2.0, 1.0 - K) * lag;
          const double stat = std::max(lower / d, d / upper);
          worst = std::max(worst, stat);
          if (stat > 1.0 + 1e-12) ++violations;
        }
      }
    }
  }
  CheckReport r;
  r.params = {std::nullopt, std::nullopt, 1.0, 127, grid.size()};
  r.statistic = worst;
  r.tolerance = 1.0 + 1e-12;
  r.pass = violations == 0;
  r.details = {{"violations", violations}, {"statistic_meaning", "max over pairs of max(lower/d, d/upper)"}};
  return r;
}

CheckReport self_similarity(const AcceptanceOptions&) {
  const Grid grid = Grid::uniform(32, 1.0, false);
  double worst = 0.0;
  for (double H : kSweep) {
    for (double K : kSweep) {
      const BifbmParams p(H, K);
      for (double a : {0.1, 2.0, 7.3}) {
        const double factor = std::pow(a, 2.0 * p.HK);
        for (double t : grid.points())
          for (double s : grid.points()) {
            const double base = factor * bifbm_cov(t, s, p);
            worst = std::max(worst, std::abs(bifbm_cov(a * t, a * s, p) - base) / std::abs(base));
          }
      }
    }
  }
  CheckReport r;
  r.params = {std::nullopt, std::nullopt, 1.0, 32, grid.size()};
  r.statistic = worst;
  r.tolerance = 1e-12;
  r.pass = worst <= 1e-12;
  r.details = {{"scale_factors", {0.1, 2.0, 7.3}}};
  return r;
}

CheckReport law_equality(const AcceptanceOptions& o) {
  const Grid grid = Grid::uniform(63, 2.0);
  LawEqualityOptions opts;
  opts.workers = o.workers;
  nlohmann::json runs = nlohmann::json::array();
  bool pass = true;
  double worst = 0.0;
  for (auto [H, K] : {std::pair{0.6, 0.75}, std::pair{0.3, 0.5}}) {
    const CheckReport rep = verify_law_equality(10000, grid, BifbmParams(H, K), o.seed, opts);
    pass = pass && rep.pass;
    worst = std::max(worst, rep.statistic);
    runs.push_back(to_json(rep));
  }
  LawEqualityOptions control = opts;
  control.reference_scale = 1.0;
  const CheckReport neg = verify_law_equality(10000, grid, BifbmParams(0.3, 0.5), o.seed, control);

  CheckReport r;
  r.params = {std::nullopt, std::nullopt, 2.0, 63, grid.size()};
  r.statistic = worst;
  r.tolerance = opts.gap_tolerance;
  r.pass = pass && !neg.pass;
  r.n_rep = 10000;
  r.master_seed = o.seed;
  r.details = {{"runs", runs}, {"negative_control_without_c2", to_json(neg)}, {"negative_control_failed", !neg.pass}};
  return r;
}

CheckReport quadrature_fidelity(const AcceptanceOptions& o) {
  std::vector<double> pts;
  for (int i = 0; i < 20; ++i) pts.push_back(0.1 * std::pow(20.0, i / 19.0));
  pts.back() = 2.0;
  const Grid probe{std::vector<double>{1.0}};
  const std::size_t n_rep = 10000;
  double worst_rel = 0.0, worst_z = 0.0;
  nlohmann::json per_k = nlohmann::json::array();
  for (double K : {0.3, 0.5, 0.8}) {
    const QuadratureScheme scheme = QuadratureScheme::covering(0.1, 2.0, K);
    const XkQuadrature q(K, scheme);
    double rel = 0.0;
    for (double t : pts)
      for (double s : pts) rel = std::max(rel, relative_gap(q.discretized_cov(t, s), xk_cov(t, s, K)));
    const Ensemble e = q.sample_ensemble(probe, derive_seeds(o.seed, Stream::x_component, n_rep), o.workers);
    const Estimate var = product_moment(e.values, 0, 0);
    const double z = std::abs(var.value - c3(K)) / var.se;
    worst_rel = std::max(worst_rel, rel);
    worst_z = std::max(worst_z, z);
    per_k.push_back({{"K", K}, {"max_relative_error", rel}, {"theta_min", scheme.theta_min},
                     {"theta_max", scheme.theta_max}, {"cells", scheme.cells}, {"variance_at_1", var.value},
                     {"variance_stderr", var.se}, {"c3", c3(K)}, {"gap_in_se", z}});
  }
  CheckReport r;
  r.params = {std::nullopt, std::nullopt, 2.0, 0, pts.size()};
  r.statistic = worst_rel;
  r.tolerance = 1e-3;
  r.pass = worst_rel <= 1e-3 && worst_z <= 4.0;
  r.n_rep = n_rep;
  r.master_seed = o.seed;
  r.details = {{"per_K", per_k}, {"max_gap_in_se", worst_z}, {"gap_tolerance", 4.0}};
  return r;
}

CheckReport fubini_identity(const AcceptanceOptions& o) {
  const double K = 0.5, t0 = 0.05, T = 2.0;
  const std::size_t steps = 4096;
  std::vector<double> pts(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) pts[i] = t0 + (T - t0) * static_cast<double>(i) / steps;
  pts.back() = T;
  const Grid grid(pts);
  const XkQuadrature q(K, QuadratureScheme::covering(t0, T, K));
  const auto seeds = derive_seeds(o.seed, Stream::x_component, 100);
  std::vector<double> rel(seeds.size());
  detail::parallel_for(seeds.size(), o.workers, [&](std::size_t r) {
    const BrownianDriver d = q.driver(seeds[r]);
    const Path x = q.evaluate(d, grid);
    const Path y = q.derivative(d, grid, 1, t0);
    double integral = 0.0, worst = 0.0, scale = 0.0;
    for (Eigen::Index i = 1; i < x.values.size(); ++i) {
      integral += 0.5 * (pts[static_cast<std::size_t>(i)] - pts[static_cast<std::size_t>(i - 1)]) * (y.values[i] + y.values[i - 1]);
      worst = std::max(worst, std::abs(x.values[i] - x.values[0] - integral));
    }
    scale = x.values.cwiseAbs().maxCoeff();
    rel[r] = worst / scale;
  });
  const double worst = *std::max_element(rel.begin(), rel.end());
  CheckReport r;
  r.params = {std::nullopt, K, T, steps, grid.size()};
  r.statistic = worst;
  r.tolerance = 1e-3;
  r.pass = worst <= 1e-3;
  r.n_rep = seeds.size();
  r.master_seed = o.seed;
  r.details = {{"t0", t0}, {"median_relative_error", median(rel)}};
  return r;
}

// The closed-form 1/(HK)-variation limit of c B^{HK} is |c|^{1/(HK)} E|xi|^{1/(HK)};
// the stated constant uses E|xi|^{HK}. Both are reported, the stated one gates.
CheckReport variation_limit(const AcceptanceOptions& o) {
  const BifbmParams p(0.6, 0.8);
  const std::size_t steps = std::size_t{1} << 14, n_rep = 100;
  const double alpha = 1.0 / p.HK;
  const Estimate bif = mean_estimate(variation(bifbm_ensemble(p, steps, n_rep, o), alpha));
  const FbmCirculant fbm(steps, 1.0, p.HK);
  const Estimate ctl =
      mean_estimate(variation(fbm.sample_ensemble(derive_seeds(o.seed, Stream::reference, n_rep), o.workers), alpha));

  const double c2a = std::pow(c2(p.K), alpha);
  const double stated_fbm = abs_moment(p.HK);
  const double closed_fbm = abs_moment(alpha);
  const double gap_bif = relative_gap(bif.value, c2a * stated_fbm);
  const double gap_fbm = relative_gap(ctl.value, stated_fbm);

  CheckReport r;
  r.params = {p.H, p.K, 1.0, steps, steps + 1};
  r.statistic = std::max(gap_bif, gap_fbm);
  r.tolerance = 0.05;
  r.pass = r.statistic <= 0.05;
  r.n_rep = n_rep;
  r.master_seed = o.seed;
  r.details = {{"alpha", alpha},
               {"bifbm_mean", bif.value},
               {"bifbm_stderr", bif.se},
               {"fbm_mean", ctl.value},
               {"fbm_stderr", ctl.se},
               {"stated_bifbm_limit", c2a * stated_fbm},
               {"stated_fbm_limit", stated_fbm},
               {"closed_form_bifbm_limit", c2a * closed_fbm},
               {"closed_form_fbm_limit", closed_fbm},
               {"closed_form_bifbm_gap", relative_gap(bif.value, c2a * closed_fbm)},
               {"closed_form_fbm_gap", relative_gap(ctl.value, closed_fbm)},
               {"ratio_bifbm_over_fbm", bif.value / ctl.value},
               {"c2_power", c2a},
               {"ratio_gap", relative_gap(bif.value / ctl.value, c2a)}};
  return r;
}

CheckReport x_variation(const AcceptanceOptions& o) {
  const std::array<std::size_t, 7> sweep{256, 512, 1024, 2048, 4096, 8192, 16384};
  XVariationOptions opts;
  opts.workers = o.workers;
  CheckReport r = x_variation_vanishes(0.8, 0.6, sweep, o.seed, opts);
  const BifbmParams p(0.6, 0.8);
  r.details["closed_form_bifbm_limit"] = std::pow(c2(p.K), 1.0 / p.HK) * abs_moment(1.0 / p.HK);
  return r;
}

CheckReport strong_variation_limit(const AcceptanceOptions& o) {
  const BifbmParams p(0.6, 0.8);
  const std::size_t steps = std::size_t{1} << 14, n_rep = 100;
  const double alpha = 1.0 / p.HK, eps = std::ldexp(1.0, -10);
  const Ensemble& e = bifbm_ensemble(p, steps, n_rep, o);
  std::vector<double> values(n_rep);
  for (std::size_t i = 0; i < n_rep; ++i) values[i] = strong_variation(e.path(i), alpha, eps);
  const Estimate sv = mean_estimate(values);
  const double t = 1.0 - eps;
  const double c2a = std::pow(c2(p.K), alpha);
  const double stated = c2a * abs_moment(p.HK) * t;
  const double closed = c2a * abs_moment(alpha) * t;

  CheckReport r;
  r.params = {p.H, p.K, 1.0, steps, steps + 1};
  r.statistic = relative_gap(sv.value, stated);
  r.tolerance = 0.05;
  r.pass = r.statistic <= 0.05;
  r.n_rep = n_rep;
  r.master_seed = o.seed;
  r.details = {{"eps", eps},
               {"t", t},
               {"mean", sv.value},
               {"stderr", sv.se},
               {"stated_limit", stated},
               {"closed_form_limit", closed},
               {"closed_form_gap", relative_gap(sv.value, closed)}};
  return r;
}

CheckReport heat_equation(const AcceptanceOptions& o) {
  const BifbmParams half(0.5, 0.5);
  double ratio_spread = 0.0;
  const double target = 1.0 / std::sqrt(std::numbers::pi);
  for (int i = 0; i < 20; ++i) {
    const double t = 0.1 + 1.9 * std::fmod(0.6180339887498949 * (i + 1), 1.0);
    const double s = 0.05 + 1.5 * std::fmod(0.7548776662466927 * (i + 1), 1.0);
    ratio_spread = std::max(ratio_spread, relative_gap(heat_cov_exact(t, s) / bifbm_cov(t, s, half), target));
  }
  const Grid grid = Grid::uniform(16, 1.0, false);
  HeatCheckOptions opts;
  opts.workers = o.workers;
  const CheckReport prop = bifbm_proportionality(10000, grid, o.seed, opts);
  const CheckReport refine = heat_refinement_check(10000, grid, o.seed, opts);

  CheckReport r;
  r.params = {0.5, 0.5, 1.0, 512, grid.size()};
  r.statistic = prop.statistic;
  r.tolerance = prop.tolerance;
  r.pass = ratio_spread <= 1e-12 && prop.pass && refine.pass;
  r.n_rep = 10000;
  r.master_seed = o.seed;
  r.details = {{"closed_form_ratio_max_relative_spread", ratio_spread},
               {"proportionality", to_json(prop)},
               {"refinement", to_json(refine)}};
  return r;
}

CheckReport l1_bound(const AcceptanceOptions& o) {
  std::mt19937_64 rng(derive_seed(o.seed, Stream::primary, 11));
  std::size_t failures = 0, total = 0;
  double worst = 0.0;
  double fd_error = 0.0;
  for (double H : {0.3, 0.6}) {
    for (double K : {0.4, 0.9}) {
      const BifbmParams p(H, K);
      for (int i = 0; i < 50; ++i) {
        const CheckReport c = l1_weight_bound_check(random_step_function(rng, 2.0), p);
        worst = std::max(worst, c.statistic);
        failures += c.pass ? 0 : 1;
        ++total;
      }
    }
  }
  {
    const double H = 0.6, K = 0.75;
    fd_error = relative_gap(c_bound_finite_difference(H, K, 0.7, 1.3), c_bound(H, K));
  }
  CheckReport r;
  r.params = {std::nullopt, std::nullopt, 2.0, 8, 9};
  r.statistic = worst;
  r.tolerance = 1.0 + 1e-9;
  r.pass = failures == 0 && fd_error <= 1e-4;
  r.master_seed = o.seed;
  r.details = {{"step_functions", total},
               {"failures", failures},
               {"c_bound_finite_difference_relative_error", fd_error},
               {"finite_difference_tolerance", 1e-4}};
  return r;
}

CheckReport origin_growth(const AcceptanceOptions& o) {
  OriginProbeOptions opts;
  opts.workers = o.workers;
  return origin_growth_probe(0.5, 1000, o.seed, opts);
}

CheckReport holder_estimate(const AcceptanceOptions& o) {
  const BifbmParams p(0.6, 0.75);
  const std::size_t points = std::size_t{1} << 14;
  const CholeskySampler sampler(bifbm_kernel(p), Grid::uniform(points - 1, 1.0),
                                [&p](std::span<const double> pts) { return bifbm_gram(pts, p); });
  const Ensemble e = sampler.sample_ensemble(derive_seeds(o.seed, Stream::primary, 50), o.workers);
  const double est = holder_exponent_estimate(e);
  CheckReport r;
  r.params = {p.H, p.K, 1.0, points - 1, points};
  r.statistic = std::abs(est - p.HK);
  r.tolerance = 0.05;
  r.pass = r.statistic <= 0.05;
  r.n_rep = 50;
  r.master_seed = o.seed;
  r.details = {{"estimate", est}, {"HK", p.HK}};
  return r;
}

constexpr std::array<Criterion, 13> kCriteria{{
    {1, "decomposition_identity", false, decomposition_identity},
    {2, "quasi_helix", false, quasi_helix},
    {3, "self_similarity", false, self_similarity},
    {4, "law_equality", false, law_equality},
    {5, "quadrature_fidelity", false, quadrature_fidelity},
    {6, "fubini_identity", false, fubini_identity},
    {7, "variation_limit", false, variation_limit},
    {8, "x_variation_vanishing", false, x_variation},
    {9, "strong_variation", false, strong_variation_limit},
    {10, "heat_equation", false, heat_equation},
    {11, "l1_weight_bound", false, l1_bound},
    {12, "origin_growth", true, origin_growth},
    {13, "holder_estimate", false, holder_estimate},
}};

}  // namespace

std::span<const Criterion> acceptance_criteria() { return kCriteria; }

const Criterion& find_criterion(int id) {
  for (const auto& c : kCriteria)
    if (c.id == id) return c;
  throw std::out_of_range("no acceptance criterion " + std::to_string(id));
}

CheckReport run_criterion(const Criterion& c, const AcceptanceOptions& options) {
  CheckReport r = c.run(options);
  r.details["underlying_check"] = r.check;
  r.details["soft"] = c.soft;
  r.check = "criterion_" + std::to_string(c.id) + "_" + c.name;
  return r;
}

}  // namespace bifbm
