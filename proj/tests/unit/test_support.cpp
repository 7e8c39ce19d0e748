#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "bifbm/io.hpp"
#include "bifbm/random.hpp"
#include "bifbm/report.hpp"
#include "bifbm/statistics.hpp"

using namespace bifbm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("mean and product-moment estimates") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const Estimate m = mean_estimate(xs);
  CHECK(m.value == 2.5);
  CHECK_THAT(m.se, WithinRel(std::sqrt(5.0 / 3.0 / 4.0), 1e-15));
  Eigen::MatrixXd v(2, 3);
  v << 1, 2, 3, 2, 2, 2;
  CHECK(product_moment(v, 0, 1).value == 4.0);
  CHECK_THROWS(mean_estimate(std::vector<double>{1.0}));
}

TEST_CASE("variance estimate of normals") {
  const Eigen::VectorXd z = standard_normals(3, 20000);
  const Eigen::MatrixXd row = z.transpose();
  const Estimate v = variance_estimate(row, 0);
  CHECK(std::abs(v.value - 1.0) < 4.0 * v.se);
  CHECK_THAT(v.se, WithinRel(std::sqrt(2.0 / 20000), 0.1));
}

TEST_CASE("Kolmogorov-Smirnov") {
  CHECK_THAT(kolmogorov_tail(1.36), WithinAbs(0.0494858767553779, 1e-12));
  CHECK_THAT(kolmogorov_tail(1.63), WithinAbs(0.0098, 2e-4));
  CHECK(kolmogorov_tail(0.0) == 1.0);

  const Eigen::VectorXd a = standard_normals(11, 5000), b = standard_normals(12, 5000);
  const KsResult same = ks_two_sample({a.begin(), a.end()}, {b.begin(), b.end()});
  CHECK(same.p_value > 1e-3);
  std::vector<double> shifted(b.begin(), b.end());
  for (double& x : shifted) x *= 1.2;
  CHECK(ks_two_sample({a.begin(), a.end()}, shifted).p_value < 1e-3);
  CHECK(ks_two_sample({0.0, 1.0}, {0.0, 1.0}).statistic == 0.0);
}

TEST_CASE("Jarque-Bera") {
  const Eigen::VectorXd z = standard_normals(4, 10000);
  CHECK(jarque_bera(std::vector<double>(z.begin(), z.end())).p_value > 1e-3);
  std::vector<double> ex(10000);
  std::mt19937_64 rng(1);
  std::exponential_distribution<double> e(1.0);
  for (double& x : ex) x = e(rng);
  CHECK(jarque_bera(ex).p_value < 1e-6);
}

TEST_CASE("quantiles and regression") {
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(quantile({1.0, 2.0}, 0.25) == 1.25);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK_THROWS(quantile({}, 0.5));
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  CHECK_THAT(ols_slope(x, y), WithinRel(2.0, 1e-15));
  CHECK_THROWS(ols_slope(std::vector<double>{1, 1}, std::vector<double>{0, 1}));
}

TEST_CASE("normal source is reproducible") {
  CHECK(standard_normals(99, 10) == standard_normals(99, 10));
  CHECK(standard_normals(99, 10) != standard_normals(98, 10));
}

TEST_CASE("CSV round trip at full precision") {
  const Grid g(std::vector<double>{0.0, 0.1, 1.0 / 3.0});
  const Path p{g, Eigen::Vector3d(0.0, -1.0 / 7.0, 2.0e-300), {}};
  std::stringstream ss;
  write_path_csv(ss, p, {{"H", "0.5"}, {"master_seed", "7"}});
  const std::string text = ss.str();
  CHECK(text.rfind("# H=0.5\n# master_seed=7\nt,value\n", 0) == 0);
  const Path q = read_path_csv(ss);
  CHECK(q.grid == g);
  CHECK(q.values == p.values);

  Ensemble e{g, Eigen::MatrixXd::Zero(3, 2), {}};
  std::stringstream es;
  write_ensemble_csv(es, e);
  std::string header;
  std::getline(es, header);
  CHECK(header == "replicate,t,value");
  CHECK(format_double(0.1) == "0.10000000000000001");

  std::stringstream bad("t,value\n1.0\n");
  CHECK_THROWS(read_path_csv(bad));
}

TEST_CASE("report JSON round trip") {
  CheckReport r;
  r.check = "demo";
  r.params = {0.6, std::nullopt, 2.0, 63, 64};
  r.statistic = 1.0 / 3.0;
  r.tolerance = 4.0;
  r.pass = true;
  r.n_rep = 10000;
  r.master_seed = 18446744073709551615ULL;
  r.details = {{"x", 0.1}};
  const nlohmann::json j = to_json(r);
  CHECK(j["tool"] == "bifbm");
  CHECK(j["params"]["K"].is_null());
  const CheckReport back = report_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.statistic == r.statistic);
  CHECK(back.master_seed == r.master_seed);
  CHECK(back.params.H == r.params.H);
  CHECK_FALSE(back.params.K.has_value());
  CHECK(summary_line(r).rfind("PASS demo: statistic=", 0) == 0);
  r.pass = false;
  CHECK(summary_line(r).rfind("FAIL demo", 0) == 0);
  CHECK_FALSE(all_pass({r}));
}
