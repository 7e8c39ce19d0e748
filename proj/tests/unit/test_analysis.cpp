#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bifbm/analysis.hpp"
#include "bifbm/cholesky_sampler.hpp"
#include "bifbm/circulant.hpp"
#include "bifbm/decomposition.hpp"
#include "bifbm/random.hpp"
#include "bifbm/statistics.hpp"

using namespace bifbm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Path linear_path(std::size_t n, double T) {
  const Grid g = Grid::uniform(n, T);
  return {g, Eigen::Map<const Eigen::VectorXd>(g.points().data(), static_cast<Eigen::Index>(g.size())), {}};
}

}  // namespace

TEST_CASE("variation on deterministic paths") {
  for (std::size_t n : {1u, 7u, 64u}) CHECK_THAT(variation(linear_path(n, 2.5), 1.0), WithinRel(2.5, 1e-13));
  // V^{n,2}(t) = n (t/n)^2
  for (std::size_t n : {16u, 256u}) CHECK_THAT(variation(linear_path(n, 1.0), 2.0), WithinRel(1.0 / n, 1e-12));
  const Path irregular{Grid(std::vector<double>{0.0, 0.1, 0.5}), Eigen::Vector3d(0.0, 1.0, 2.0), {}};
  CHECK_THROWS_AS(variation(irregular, 1.0), std::invalid_argument);
}

TEST_CASE("variation is homogeneous of degree alpha") {
  const Path p = FbmCirculant(256, 1.0, 0.3).sample(4);
  for (double alpha : {1.0, 2.0, 3.3}) {
    Path q = p;
    q.values *= -2.5;
    CHECK_THAT(variation(q, alpha), WithinRel(std::pow(2.5, alpha) * variation(p, alpha), 1e-12));
  }
}

TEST_CASE("Brownian quadratic variation") {
  const FbmCirculant bm(std::size_t{1} << 14, 1.0, 0.5);
  const Ensemble e = bm.sample_ensemble(derive_seeds(3, Stream::primary, 100));
  const Estimate qv = mean_estimate(variation(e, 2.0));
  CHECK_THAT(qv.value, WithinRel(1.0, 0.01));
}

TEST_CASE("ensemble variation with a stride matches subsampled paths") {
  const FbmCirculant c(64, 1.0, 0.6);
  const Ensemble e = c.sample_ensemble(derive_seeds(5, Stream::primary, 3));
  const auto v = variation(e, 1.7, 4);
  const Path p = e.path(1);
  double acc = 0.0;
  for (Eigen::Index i = 0; i + 4 < p.values.size(); i += 4) acc += std::pow(std::abs(p.values[i + 4] - p.values[i]), 1.7);
  CHECK(v[1] == acc);
  CHECK_THROWS(variation(e, 1.0, 5));
}

TEST_CASE("Minkowski sandwich on coupled decomposition paths") {
  const BifbmParams p(0.6, 0.75);
  const Grid g = Grid::uniform(512, 1.0);
  const DecompositionEnsemble d = DecompositionSampler(g, p).sample_ensemble(17, 20);
  const double alpha = 1.0 / p.HK;
  for (std::size_t r = 0; r < 20; ++r) {
    Path x = d.x.path(r);
    x.values *= c1(p.K);
    const double sum = std::pow(variation(d.sum.path(r), alpha), 1.0 / alpha);
    const double b = std::pow(variation(d.bifbm.path(r), alpha), 1.0 / alpha);
    const double xv = std::pow(variation(x, alpha), 1.0 / alpha);
    CHECK(std::abs(sum - b) <= xv * (1.0 + 1e-12));
  }
}

TEST_CASE("strong variation") {
  const Path lin = linear_path(1024, 1.0);
  const double eps = std::ldexp(1.0, -6);
  CHECK_THAT(strong_variation(lin, 1.0, eps), WithinRel(1.0 - eps, 1e-12));
  CHECK_THAT(strong_variation(lin, 1.0, eps, 0.5), WithinRel(0.5, 1e-12));
  Path flat = lin;
  flat.values.setConstant(3.0);
  CHECK(strong_variation(flat, 1.5, eps) == 0.0);
  CHECK_THROWS(strong_variation(lin, 1.0, 1.5e-3));
  CHECK_THROWS(strong_variation(lin, 1.0, eps, 1.0));
}

TEST_CASE("X^{H,K} variation vanishes") {
  const std::size_t sweep[] = {256, 1024, 4096};
  XVariationOptions o;
  o.n_rep = 20;
  const CheckReport r = x_variation_vanishes(0.75, 0.6, sweep, 8, o);
  CHECK(r.pass);
  CHECK(r.details["strictly_decreasing"].get<bool>());
  // alpha = 1 stays bounded
  const auto& rows = r.details["sweep"];
  const double tv_coarse = rows[0]["total_variation_mean"].get<double>();
  const double tv_fine = rows[2]["total_variation_mean"].get<double>();
  CHECK(tv_fine / tv_coarse < 1.2);
  CHECK_THROWS(x_variation_vanishes(1.0, 0.6, sweep, 8, o));
}

TEST_CASE("origin growth probe") {
  const CheckReport r = origin_growth_probe(0.5, 300, 9);
  CHECK(std::isfinite(r.details["quantile_deep"].get<double>()));
  CHECK(r.details["ratio_sd_decreasing_toward_origin"].get<bool>());
  CHECK(r.statistic >= 1.0);
}

TEST_CASE("step-function quadratic forms") {
  const BifbmParams p(0.6, 0.75);
  CHECK_THAT(step_quadratic_form(StepFunction::indicator(0.0, 1.7), bifbm_kernel(p)),
             WithinRel(std::pow(1.7, 2.0 * p.HK), 1e-13));
  CHECK(step_quadratic_form({{0.0, 1.0}, {0.0}}, bifbm_kernel(p)) == 0.0);
  CHECK_THAT(step_quadratic_form({{0.0, 1.0, 2.0}, {1.0, -1.0}}, fbm_kernel(0.5)), WithinRel(2.0, 1e-14));
  CHECK_THROWS(step_quadratic_form({{0.0, 1.0}, {1.0, 2.0}}, fbm_kernel(0.5)));
  CHECK_THROWS(step_quadratic_form({{1.0, 0.5}, {1.0}}, fbm_kernel(0.5)));
}

TEST_CASE("quadratic forms are PSD and bilinear") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const auto kernel = bifbm_kernel(BifbmParams(0.35, 0.55));
  for (int trial = 0; trial < 50; ++trial) {
    StepFunction phi = random_step_function(rng, 2.0);
    CHECK(step_quadratic_form(phi, kernel) >= -1e-10);
    StepFunction psi = phi;
    for (auto& l : psi.levels) l = u(rng);
    StepFunction plus = phi, minus = phi;
    for (std::size_t i = 0; i < phi.levels.size(); ++i) {
      plus.levels[i] = phi.levels[i] + psi.levels[i];
      minus.levels[i] = phi.levels[i] - psi.levels[i];
    }
    // polarization: Q(f+g) + Q(f-g) = 2 Q(f) + 2 Q(g)
    const double lhs = step_quadratic_form(plus, kernel) + step_quadratic_form(minus, kernel);
    const double rhs = 2.0 * step_quadratic_form(phi, kernel) + 2.0 * step_quadratic_form(psi, kernel);
    CHECK_THAT(lhs, WithinAbs(rhs, 1e-12 * std::max(1.0, std::abs(rhs))));
  }
}

TEST_CASE("L1 weight bound") {
  const BifbmParams p(0.6, 0.75);
  const CheckReport zero = l1_weight_bound_check({{0.0, 1.0}, {0.0}}, p);
  CHECK(zero.pass);
  const CheckReport ind = l1_weight_bound_check(StepFunction::indicator(0.0, 1.0), p);
  CHECK_THAT(ind.details["lhs"].get<double>(), WithinRel(c3(p.K), 1e-13));
  CHECK_THAT(ind.details["rhs"].get<double>(), WithinRel(c_bound(p.H, p.K) / (p.HK * p.HK), 1e-13));
  CHECK(ind.pass);

  std::mt19937_64 rng(2);
  for (double H : {0.3, 0.6})
    for (double K : {0.4, 0.9})
      for (int i = 0; i < 50; ++i) CHECK(l1_weight_bound_check(random_step_function(rng, 2.0), BifbmParams(H, K)).pass);
  CHECK_THROWS(l1_weight_bound_check(StepFunction::indicator(0.0, 1.0), BifbmParams(0.5, 1.0)));
}

TEST_CASE("random step functions are valid") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const StepFunction f = random_step_function(rng, 2.0);
    CHECK_NOTHROW(f.validate());
    CHECK(f.levels.size() <= 8);
    CHECK(f.breakpoints.front() == 0.0);
    CHECK(f.breakpoints.back() == 2.0);
  }
}

TEST_CASE("Hoelder exponent estimates") {
  const Path lin = linear_path(4096, 1.0);
  Ensemble e{lin.grid, lin.values, {}};
  CHECK_THAT(holder_exponent_estimate(e), WithinAbs(1.0, 0.01));

  const FbmCirculant bm(4096, 1.0, 0.5);
  const double h = holder_exponent_estimate(bm.sample_ensemble(derive_seeds(6, Stream::primary, 20)));
  CHECK(h >= 0.45);
  CHECK(h <= 0.55);

  const FbmCirculant small(1024, 1.0, 0.5);
  CHECK_THROWS(holder_exponent_estimate(small.sample_ensemble(derive_seeds(6, Stream::primary, 2))));
}

TEST_CASE("bifBm roughness is HK") {
  const BifbmParams p(0.6, 0.75);
  const CholeskySampler s(bifbm_kernel(p), Grid::uniform(4096, 1.0),
                          [&p](std::span<const double> pts) { return bifbm_gram(pts, p); });
  const double h = holder_exponent_estimate(s.sample_ensemble(derive_seeds(10, Stream::primary, 10)));
  CHECK(h >= 0.40);
  CHECK(h <= 0.50);
}
