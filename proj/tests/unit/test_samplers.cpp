#include <catch_amalgamated.hpp>

#include <cmath>

#include "bifbm/cholesky_sampler.hpp"
#include "bifbm/circulant.hpp"
#include "bifbm/covariance.hpp"
#include "bifbm/random.hpp"
#include "bifbm/statistics.hpp"
#include "bifbm/xk_quadrature.hpp"

using namespace bifbm;
using Catch::Matchers::WithinRel;

namespace {

std::vector<std::uint64_t> seeds(std::size_t n, std::uint64_t master = 1234) {
  return derive_seeds(master, Stream::primary, n);
}

// Max gap, in standard errors, between E[X_i X_j] and the kernel over probe indices.
double covariance_gap(const Ensemble& e, const CovKernel& k, const std::vector<Eigen::Index>& probe) {
  double worst = 0.0;
  for (auto i : probe)
    for (auto j : probe) {
      if (j > i) continue;
      const Estimate est = product_moment(e.values, i, j);
      const double exact = k(e.grid[static_cast<std::size_t>(i)], e.grid[static_cast<std::size_t>(j)]);
      worst = std::max(worst, std::abs(est.value - exact) / est.se);
    }
  return worst;
}

}  // namespace

TEST_CASE("seed derivation is fixed") {
  CHECK(derive_seed(0, Stream::primary, 0) == mix64(mix64(0 ^ mix64(0)) + 0));
  CHECK(derive_seed(42, Stream::x_component, 3) != derive_seed(42, Stream::bifbm_component, 3));
  const auto s = derive_seeds(5, Stream::heat, 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(s[i] == derive_seed(5, Stream::heat, i));
}

TEST_CASE("grid construction and time change") {
  CHECK_THROWS(Grid(std::vector<double>{}));
  CHECK_THROWS(Grid(std::vector<double>{0.0, 0.0}));
  CHECK_THROWS(Grid(std::vector<double>{-1.0, 0.5}));
  const Grid g = Grid::uniform(4, 2.0);
  CHECK(g.size() == 5);
  CHECK(g.is_uniform());
  CHECK(g.step() == 0.5);
  CHECK(g.nearest(1.3) == 3);
  CHECK_FALSE(Grid(std::vector<double>{0.0, 0.1, 0.3}).is_uniform());

  const Grid target(std::vector<double>{0.25, 1.0, 4.0});
  CHECK(power_grid(target, 1.0) == target);
  const Grid squared = power_grid(target, 2.0);
  CHECK(squared[0] == 0.0625);
  CHECK(squared[2] == 16.0);
  Path p{squared, Eigen::Vector3d(1.0, 2.0, 3.0), {}};
  const Path back = time_change(p, target, 2.0);
  CHECK(back.grid == target);
  CHECK(back.values == p.values);
  CHECK_THROWS(time_change(p, target, 1.0));
  const Grid fixed(std::vector<double>{0.0, 1.0});
  CHECK(power_grid(fixed, 1.37) == fixed);
}

TEST_CASE("Cholesky sampler") {
  SECTION("one point with unit variance") {
    const CholeskySampler s(brownian_kernel(), Grid(std::vector<double>{1.0}));
    const Ensemble e = s.sample_ensemble(seeds(10000));
    const Estimate v = product_moment(e.values, 0, 0);
    CHECK(std::abs(v.value - 1.0) < 4.0 * v.se);
    std::vector<double> xs(e.values.data(), e.values.data() + e.values.size());
    CHECK(jarque_bera(xs).p_value > 1e-3);
  }
  SECTION("origin is pinned") {
    const BifbmParams p(0.6, 0.75);
    const CholeskySampler s(bifbm_kernel(p), Grid::uniform(16, 1.0));
    CHECK(s.free_dimension() == 16);
    const Path path = s.sample(99);
    CHECK(path.values[0] == 0.0);
  }
  SECTION("Brownian increments have variance dt") {
    const Grid g = Grid::uniform(256, 1.0);
    const CholeskySampler s(fbm_kernel(0.5), g);
    const Ensemble e = s.sample_ensemble(seeds(10000));
    for (Eigen::Index i : {0, 100, 255}) {
      std::vector<double> inc(e.replicates());
      for (std::size_t r = 0; r < inc.size(); ++r)
        inc[r] = e.values(i + 1, static_cast<Eigen::Index>(r)) - e.values(i, static_cast<Eigen::Index>(r));
      Eigen::Map<Eigen::RowVectorXd> row(inc.data(), static_cast<Eigen::Index>(inc.size()));
      const Eigen::MatrixXd m = row;
      const Estimate v = product_moment(m, 0, 0);
      CHECK(std::abs(v.value - g.step()) < 4.0 * v.se);
    }
  }
  SECTION("bifBm ensemble: zero mean and covariance at 8 probe points") {
    const BifbmParams p(0.3, 0.6);
    const Grid g = Grid::uniform(64, 2.0);
    const CholeskySampler s(bifbm_kernel(p), g, [&p](std::span<const double> pts) { return bifbm_gram(pts, p); });
    const Ensemble e = s.sample_ensemble(seeds(10000));
    for (Eigen::Index i = 1; i < e.values.rows(); ++i) {
      std::vector<double> row(e.values.row(i).begin(), e.values.row(i).end());
      const Estimate m = mean_estimate(row);
      CHECK(std::abs(m.value) < 4.5 * m.se);
    }
    CHECK(covariance_gap(e, bifbm_kernel(p), {4, 12, 20, 28, 36, 44, 52, 64}) < 4.5);
  }
  SECTION("non-PSD kernel is reported") {
    const CovKernel bad{"bad", [](double t, double s) { return t == s ? 1.0 : -0.9; }};
    try {
      CholeskySampler(bad, Grid(std::vector<double>{1.0, 2.0, 3.0}));
      FAIL("expected NonPsdKernelError");
    } catch (const NonPsdKernelError& e) {
      CHECK(e.grid_size() == 3);
      CHECK(e.min_eigenvalue() < 0.0);
      CHECK(std::string(e.what()).find('3') != std::string::npos);
    }
  }
  SECTION("jitter is recorded for a singular Gram matrix") {
    const CovKernel rank_one{"rank one", [](double t, double s) { return t * s; }};
    const CholeskySampler s(rank_one, Grid(std::vector<double>{1.0, 2.0, 3.0}));
    CHECK(s.jitter() > 0.0);
    CHECK(s.sample(3).note.find("jitter") != std::string::npos);
  }
}

TEST_CASE("sampling is deterministic across worker counts and batch sizes") {
  const BifbmParams p(0.55, 0.8);
  const Grid g = Grid::uniform(300, 1.0);
  const CholeskySampler s(bifbm_kernel(p), g, [&p](std::span<const double> pts) { return bifbm_gram(pts, p); });
  const auto sd = seeds(150);
  const Ensemble serial = s.sample_ensemble(sd, 1);
  const Ensemble parallel = s.sample_ensemble(sd, 4);
  CHECK(serial.values == parallel.values);
  CHECK(s.sample(sd[77]).values == serial.values.col(77));

  const FbmCirculant c(256, 1.0, 0.7);
  CHECK(c.sample_ensemble(sd, 1).values == c.sample_ensemble(sd, 3).values);

  const XkQuadrature q(0.5, QuadratureScheme::covering(0.1, 2.0, 0.5));
  const Grid xg = Grid::uniform(20, 2.0);
  const Ensemble xe = q.sample_ensemble(xg, sd, 1);
  CHECK(xe.values == q.sample_ensemble(xg, sd, 5).values);
  CHECK(q.evaluate(q.driver(sd[9]), xg).values == xe.values.col(9));
}

TEST_CASE("circulant fBm") {
  SECTION("Brownian case: independent increments with variance T/n") {
    const FbmCirculant c(1024, 2.0, 0.5);
    CHECK_FALSE(c.uses_fallback());
    const Ensemble e = c.sample_ensemble(seeds(100));
    std::vector<double> inc;
    for (Eigen::Index r = 0; r < e.values.cols(); ++r)
      for (Eigen::Index i = 0; i + 1 < e.values.rows(); ++i) inc.push_back(e.values(i + 1, r) - e.values(i, r));
    CHECK(std::abs(lag1_correlation(inc)) < 4.0 / std::sqrt(static_cast<double>(inc.size())));
    const Eigen::Map<Eigen::RowVectorXd> row(inc.data(), static_cast<Eigen::Index>(inc.size()));
    const Eigen::MatrixXd m = row;
    const Estimate v = product_moment(m, 0, 0);
    CHECK(std::abs(v.value - 2.0 / 1024) < 4.0 * v.se);
  }
  SECTION("h = 0.75 covariance at 8 probe pairs") {
    const FbmCirculant c(512, 1.0, 0.75);
    const Ensemble e = c.sample_ensemble(seeds(10000));
    CHECK(e.values.row(0).isZero(0.0));
    CHECK(covariance_gap(e, fbm_kernel(0.75), {64, 256, 512}) < 4.0);
    CHECK(covariance_gap(e, fbm_kernel(0.75), {1, 32, 128, 200, 300, 400, 511, 512}) < 4.5);
  }
  SECTION("terminal variance T^{2h}") {
    for (double h : {0.2, 0.48, 0.9}) {
      const FbmCirculant c(128, 3.0, h);
      const Ensemble e = c.sample_ensemble(seeds(10000, 77));
      const Estimate v = product_moment(e.values, 128, 128);
      CHECK(std::abs(v.value - std::pow(3.0, 2.0 * h)) < 4.0 * v.se);
    }
  }
  SECTION("forced fallback goes through Cholesky and is recorded") {
    const FbmCirculant c(64, 1.0, 0.7, -1.0);  // floor above every eigenvalue
    CHECK(c.uses_fallback());
    const Path p = c.sample(5);
    CHECK(p.values[0] == 0.0);
    CHECK(p.note.find("fallback") != std::string::npos);
  }
  CHECK_THROWS(FbmCirculant(1, 1.0, 0.5));
}

TEST_CASE("X^K quadrature") {
  SECTION("origin is exactly zero") {
    const auto [path, driver] = xk_quadrature(Grid::uniform(8, 1.0), 0.5, QuadratureScheme::covering(0.125, 1.0, 0.5), 3);
    CHECK(path.values[0] == 0.0);
    CHECK(driver.seed == 3);
    CHECK(static_cast<std::size_t>(driver.increments.size()) == driver.scheme.cells);
  }
  SECTION("driver increments have variance equal to cell width") {
    const QuadratureScheme s = QuadratureScheme::standard();
    const Eigen::VectorXd w = s.widths();
    double z2 = 0.0;
    for (int r = 0; r < 20; ++r) {
      const BrownianDriver d = BrownianDriver::draw(s, static_cast<std::uint64_t>(r));
      z2 += (d.increments.array().square() / w.array()).sum();
    }
    const double n = 20.0 * static_cast<double>(s.cells);
    CHECK(std::abs(z2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
  }
  SECTION("covering scheme: discretized covariance within 1e-3 on [0.1, 2]^2") {
    for (double K : {0.3, 0.5, 0.8}) {
      const XkQuadrature q(K, QuadratureScheme::covering(0.1, 2.0, K));
      for (double t : {0.1, 0.37, 1.0, 2.0})
        for (double s : {0.1, 0.8, 2.0}) CHECK_THAT(q.discretized_cov(t, s), WithinRel(xk_cov(t, s, K), 1e-3));
    }
  }
  SECTION("the nominal range is rejected where its tails are too heavy") {
    const XkQuadrature q(0.3, QuadratureScheme::standard());
    CHECK_THROWS_AS(q.check_grid(Grid(std::vector<double>{0.1, 2.0})), QuadratureRejected);
    CHECK(truncation_error(QuadratureScheme::standard(), 0.1, 2.0, 0.3).relative > 1e-3);
    CHECK(truncation_error(QuadratureScheme::covering(0.1, 2.0, 0.3), 0.1, 2.0, 0.3).relative <= 2.5e-4);
  }
  SECTION("variance at t = 1 matches C3") {
    const XkQuadrature q(0.5, QuadratureScheme::covering(1.0, 1.0, 0.5));
    const Ensemble e = q.sample_ensemble(Grid(std::vector<double>{1.0}), seeds(10000));
    const Estimate v = product_moment(e.values, 0, 0);
    CHECK(std::abs(v.value - c3(0.5)) < 4.0 * v.se);
    std::vector<double> xs(e.values.data(), e.values.data() + e.values.size());
    CHECK(jarque_bera(xs).p_value > 1e-3);
  }
  SECTION("first derivative variance follows Gamma(2-K), not Gamma(K)") {
    const double K = 0.5;
    const XkQuadrature q(K, QuadratureScheme::standard());
    // Numerical integral of theta^{1-K} e^{-2 theta} over the support (mpmath): 0.31332853366220919613.
    CHECK_THAT(q.discretized_derivative_variance(1.0), WithinRel(0.31332853366220919613, 1e-4));
    CHECK_THAT(q.discretized_derivative_variance(1.0), WithinRel(derivative_variance(1.0, K), 1e-4));
    const double paper_form = std::tgamma(K) * std::pow(2.0, K - 2.0);
    CHECK(std::abs(q.discretized_derivative_variance(1.0) / paper_form - 1.0) > 0.5);

    std::vector<double> y(10000);
    const Grid one(std::vector<double>{1.0});
    const auto sd = seeds(y.size(), 555);
    for (std::size_t r = 0; r < y.size(); ++r) y[r] = q.derivative(q.driver(sd[r]), one, 1, 0.05).values[0];
    const Eigen::Map<Eigen::RowVectorXd> row(y.data(), static_cast<Eigen::Index>(y.size()));
    const Eigen::MatrixXd m = row;
    const Estimate v = product_moment(m, 0, 0);
    CHECK(std::abs(v.value - q.discretized_derivative_variance(1.0)) < 4.0 * v.se);
  }
  SECTION("second derivative matches a finite difference of the first") {
    const XkQuadrature q(0.5, QuadratureScheme::covering(0.1, 2.0, 0.5));
    const BrownianDriver d = q.driver(2024);
    const double h = 1e-3;
    const Grid g(std::vector<double>{1.0 - h, 1.0, 1.0 + h});
    const Path y1 = q.derivative(d, g, 1);
    const Path y2 = q.derivative(d, g, 2);
    const double fd = (y1.values[2] - y1.values[0]) / (2.0 * h);
    CHECK_THAT(y2.values[1], WithinRel(fd, 5e-2));
  }
  SECTION("derivative below t_floor is refused") {
    const XkQuadrature q(0.5, QuadratureScheme::covering(0.1, 2.0, 0.5));
    const BrownianDriver d = q.driver(1);
    CHECK_THROWS_AS(q.derivative(d, Grid(std::vector<double>{0.01, 1.0}), 1), std::domain_error);
    CHECK_THROWS_AS(q.derivative(d, Grid::uniform(4, 1.0), 1, 0.01), std::domain_error);
  }
  SECTION("paths are absolutely continuous on [0.1, 2]") {
    const std::size_t steps = 1024 * 19 / 10;  // step 2^-10 on [0.1, 2]
    std::vector<double> pts;
    for (std::size_t i = 0; i <= steps; ++i) pts.push_back(0.1 + std::ldexp(static_cast<double>(i), -10));
    const Grid g(pts);
    const XkQuadrature q(0.5, QuadratureScheme::covering(0.1, g.back(), 0.5));
    const Path x = q.evaluate(q.driver(8), g);
    std::vector<double> lx, ly;
    for (int k = 4; k <= 10; ++k) {
      const Eigen::Index lag = Eigen::Index{1} << (10 - k);
      double worst = 0.0;
      for (Eigen::Index i = 0; i + lag < x.values.size(); ++i)
        worst = std::max(worst, std::abs(x.values[i + lag] - x.values[i]));
      lx.push_back(std::log(std::ldexp(1.0, -k)));
      ly.push_back(std::log(worst));
    }
    CHECK(ols_slope(lx, ly) >= 0.9);
  }
}
