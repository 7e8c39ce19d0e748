#include "bifbm/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace bifbm {

namespace {

void require_fractional_k(double K) {
  if (!(K > 0.0 && K < 1.0))
    throw std::domain_error("constant requires K in (0,1); at K = 1 the X^K component vanishes");
}

bool is_uniform_from_origin(std::span<const double> pts, double& step) {
  if (pts.size() < 2) return false;
  step = pts[1] - pts[0];
  if (!(step > 0.0)) return false;
  const double offset = pts[0] / step;
  if (std::abs(offset - std::round(offset)) > 1e-9) return false;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double d = pts[i] - pts[i - 1];
    if (std::abs(d - step) > 1e-9 * step) return false;
  }
  return true;
}

}  // namespace

double abs_moment(double a) {
  if (!(a > -1.0)) throw std::domain_error("absolute moment E|xi|^a requires a > -1");
  return std::pow(2.0, 0.5 * a) * std::tgamma(0.5 * (a + 1.0)) / std::sqrt(std::numbers::pi);
}

double c1(double K) {
  require_fractional_k(K);
  return std::sqrt(std::pow(2.0, -K) * K / std::tgamma(1.0 - K));
}

double c2(double K) {
  if (!(K > 0.0 && K <= 1.0)) throw std::domain_error("C2 requires K in (0,1]");
  return std::pow(2.0, 0.5 * (1.0 - K));
}

double c3(double K) {
  require_fractional_k(K);
  return std::tgamma(1.0 - K) / K * (2.0 - std::pow(2.0, K));
}

double c_bound(double H, double K) {
  require_fractional_k(K);
  if (!(H > 0.0 && H < 1.0)) throw std::domain_error("H must lie in (0,1)");
  return 4.0 * H * H * (1.0 - K) * std::tgamma(1.0 - K);
}

double derivative_variance(double t, double K) {
  require_fractional_k(K);
  if (!(t > 0.0)) throw std::domain_error("the derivative of X^K exists only for t > 0");
  return std::tgamma(2.0 - K) * std::pow(2.0, K - 2.0) * std::pow(t, K - 2.0);
}

DecompositionConstants::DecompositionConstants(const BifbmParams& p)
    : c2_(bifbm::c2(p.K)), c_hk_(abs_moment(p.HK)) {
  if (p.K < 1.0) {
    c1_ = bifbm::c1(p.K);
    c3_ = bifbm::c3(p.K);
    c_bound_ = bifbm::c_bound(p.H, p.K);
  }
}

double DecompositionConstants::c1() const {
  if (!c1_) throw std::domain_error("C1 is undefined at K = 1");
  return *c1_;
}

double DecompositionConstants::c3() const {
  if (!c3_) throw std::domain_error("C3 is undefined at K = 1");
  return *c3_;
}

double DecompositionConstants::c_bound() const {
  if (!c_bound_) throw std::domain_error("C_bound is undefined at K = 1");
  return *c_bound_;
}

double decomposition_residual(std::span<const double> points, const BifbmParams& p) {
  if (points.empty()) throw std::invalid_argument("decomposition_residual: empty grid");
  const double a = c1(p.K);
  const double b = c2(p.K);
  const double a2 = a * a;
  const double b2 = b * b;
  double worst = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double t = points[i];
      const double s = points[j];
      const double lhs = a2 * xhk_cov(t, s, p) + bifbm_cov(t, s, p);
      const double rhs = b2 * fbm_cov(t, s, p.HK);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

CovKernel bifbm_kernel(const BifbmParams& p) {
  return {"bifbm(H=" + std::to_string(p.H) + ",K=" + std::to_string(p.K) + ")",
          [p](double t, double s) { return bifbm_cov(t, s, p); }};
}

CovKernel fbm_kernel(double h) {
  if (!(h > 0.0 && h < 1.0)) throw std::domain_error("Hurst index must lie in (0,1)");
  return {"fbm(h=" + std::to_string(h) + ")", [h](double t, double s) { return fbm_cov(t, s, h); }};
}

CovKernel xk_kernel(double K) {
  require_fractional_k(K);
  return {"xk(K=" + std::to_string(K) + ")", [K](double t, double s) { return xk_cov(t, s, K); }};
}

CovKernel xhk_kernel(const BifbmParams& p) {
  require_fractional_k(p.K);
  return {"xhk(H=" + std::to_string(p.H) + ",K=" + std::to_string(p.K) + ")",
          [p](double t, double s) { return xhk_cov(t, s, p); }};
}

CovKernel brownian_kernel() {
  return {"brownian", [](double t, double s) {
            detail::require_time(t);
            detail::require_time(s);
            return std::min(t, s);
          }};
}

Eigen::MatrixXd gram_matrix(const CovKernel& kernel, std::span<const double> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double v = kernel(points[i], points[j]);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

Eigen::MatrixXd bifbm_gram(std::span<const double> points, const BifbmParams& p) {
  const auto n = static_cast<Eigen::Index>(points.size());
  for (double t : points) detail::require_time(t);
  std::vector<double> pw(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) pw[i] = std::pow(points[i], 2.0 * p.H);
  const double scale = std::pow(2.0, -p.K);
  const double e = 2.0 * p.HK;

  double step = 0.0;
  const bool uniform = is_uniform_from_origin(points, step);
  std::vector<double> lag;
  if (uniform) {
    lag.resize(points.size());
    lag[0] = 0.0;
    for (std::size_t k = 1; k < points.size(); ++k) lag[k] = std::pow(static_cast<double>(k) * step, e);
  }

  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double l = uniform ? lag[static_cast<std::size_t>(i - j)]
                               : detail::lag_power(points[i], points[j], e);
      const double v = scale * (std::pow(pw[i] + pw[j], p.K) - l);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

}  // namespace bifbm
