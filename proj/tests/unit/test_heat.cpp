#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "bifbm/covariance.hpp"
#include "bifbm/heat.hpp"
#include "bifbm/random.hpp"
#include "bifbm/statistics.hpp"

using namespace bifbm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("closed-form heat covariance") {
  CHECK(heat_cov_exact(1.3, 0.0) == 0.0);
  for (double t : {0.2, 1.0, 4.0}) CHECK_THAT(heat_cov_exact(t, t), WithinRel(std::sqrt(t / std::numbers::pi), 1e-15));
  // mpmath: (2 pi)^{-1/2} (sqrt 3 - 1)
  CHECK_THAT(heat_cov_exact(2.0, 1.0), WithinRel(0.29204601854123828059, 1e-15));
  CHECK_THAT(heat_bifbm_scale(), WithinRel(0.75112554446494248286, 1e-15));
}

TEST_CASE("ratio to R^{1/2,1/2} is pi^{-1/2} everywhere") {
  const BifbmParams half(0.5, 0.5);
  for (double t : {0.1, 0.5, 1.0, 1.7, 2.0})
    for (double s : {0.05, 0.3, 1.0, 3.0})
      CHECK_THAT(heat_cov_exact(t, s) / bifbm_cov(t, s, half), WithinRel(1.0 / std::sqrt(std::numbers::pi), 1e-12));
}

TEST_CASE("heat kernel integrates to one and scales with tau") {
  for (double tau : {0.01, 1.0}) {
    double acc = 0.0;
    const double dx = 1e-3;
    for (double x = -10.0; x <= 10.0; x += dx) acc += heat_kernel(tau, x) * dx;
    CHECK_THAT(acc, WithinRel(1.0, 1e-6));
  }
  CHECK_THAT(heat_kernel(4.0, 0.0), WithinRel(0.5 * heat_kernel(1.0, 0.0), 1e-15));
  CHECK_THROWS(heat_kernel(0.0, 1.0));
}

TEST_CASE("space-time grid") {
  const SpaceTimeGrid g = SpaceTimeGrid::standard(1.0);
  CHECK(g.time_cells() == 512);
  CHECK(g.space_cells() == 512);
  CHECK(g.tail_mass() < 1e-6);
  CHECK_NOTHROW(g.validate());
  const SpaceTimeGrid narrow{g.dt, 0.01, 2.0, 1.0};
  CHECK_THROWS(narrow.validate());
  const SpaceTimeGrid r = g.refined();
  CHECK(r.time_cells() == 1024);
  CHECK(r.space_cells() == 1024);
}

TEST_CASE("discretized covariance is close to the closed form") {
  const Grid g(std::vector<double>{0.25, 0.5, 1.0});
  const HeatScheme scheme(g, 0.0, SpaceTimeGrid::standard(1.0));
  const Eigen::MatrixXd c = scheme.discretized_cov();
  const Eigen::MatrixXd f = HeatScheme(g, 0.0, SpaceTimeGrid::standard(1.0).refined()).discretized_cov();
  // the diagonal loses O(sqrt(dt)) to the projection of the last time cell
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double exact = heat_cov_exact(g[static_cast<std::size_t>(i)], g[static_cast<std::size_t>(j)]);
      CHECK(std::abs(c(i, j) - exact) < 1e-2);
      CHECK(std::abs(f(i, j) - exact) <= std::abs(c(i, j) - exact));
    }
}

TEST_CASE("u(0, x0) = 0 and simulation matches the projected sampler in law") {
  const Grid g = Grid::uniform(4, 1.0);
  const SpaceTimeGrid stg = SpaceTimeGrid::standard(1.0);
  const HeatPath u = simulate_heat(g, 0.0, stg, 3);
  CHECK(u.values[0] == 0.0);
  CHECK(std::isfinite(u.values[4]));

  const HeatScheme scheme(g, 0.0, stg);
  const HeatEnsembleSampler sampler(scheme);
  CHECK((sampler.covariance() - scheme.discretized_cov()).cwiseAbs().maxCoeff() < 1e-12);
  const Ensemble e = sampler.sample_ensemble(derive_seeds(17, Stream::heat, 10000));
  CHECK(e.values.row(0).isZero(0.0));
  const Estimate v = product_moment(e.values, 4, 4);
  CHECK(std::abs(v.value - sampler.covariance()(4, 4)) < 4.0 * v.se);
  CHECK(std::abs(v.value - std::sqrt(1.0 / std::numbers::pi)) < 4.0 * v.se + 5e-3);

  // a few full space-time simulations agree with the same variance
  std::vector<double> full(400);
  for (std::size_t r = 0; r < full.size(); ++r) full[r] = simulate_heat(g, 0.0, stg, 1000 + r).values[4];
  const Eigen::Map<Eigen::RowVectorXd> row(full.data(), static_cast<Eigen::Index>(full.size()));
  const Eigen::MatrixXd m = row;
  const Estimate fv = product_moment(m, 0, 0);
  CHECK(std::abs(fv.value - sampler.covariance()(4, 4)) < 4.0 * fv.se);
}

TEST_CASE("covariance at (2, 1)") {
  const Grid g(std::vector<double>{1.0, 2.0});
  const HeatEnsembleSampler sampler(HeatScheme(g, 0.0, SpaceTimeGrid::standard(2.0)));
  const Ensemble e = sampler.sample_ensemble(derive_seeds(23, Stream::heat, 10000));
  const Estimate c = product_moment(e.values, 1, 0);
  CHECK(std::abs(c.value - 0.29204601854123828059) < 4.0 * c.se + std::abs(sampler.covariance()(1, 0) - 0.29204601854123828059));
}

TEST_CASE("coupled sampler marginals reproduce both schemes") {
  const Grid g(std::vector<double>{0.5, 1.0});
  const SpaceTimeGrid coarse = SpaceTimeGrid::standard(1.0);
  const CoupledHeatSampler cs(g, 0.0, coarse);
  CHECK((cs.coarse_covariance() - HeatScheme(g, 0.0, coarse).discretized_cov()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((cs.fine_covariance() - HeatScheme(g, 0.0, coarse.refined()).discretized_cov()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("proportionality and refinement checks") {
  const Grid g = Grid::uniform(16, 1.0, false);
  const CheckReport prop = bifbm_proportionality(10000, g, 42);
  CHECK(prop.pass);
  CHECK(prop.statistic <= 0.02);
  const CheckReport refine = heat_refinement_check(4000, g, 42);
  CHECK(refine.pass);
}
