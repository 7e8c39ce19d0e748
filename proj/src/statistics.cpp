#include "bifbm/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bifbm {

Estimate mean_estimate(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("mean_estimate: need at least two samples");
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

Estimate product_moment(const Eigen::MatrixXd& values, Eigen::Index i, Eigen::Index j) {
  const Eigen::Index n = values.cols();
  std::vector<double> prod(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) prod[static_cast<std::size_t>(r)] = values(i, r) * values(j, r);
  return mean_estimate(prod);
}

Estimate variance_estimate(const Eigen::MatrixXd& values, Eigen::Index i) {
  const Eigen::Index n = values.cols();
  if (n < 4) throw std::invalid_argument("variance_estimate: need at least four samples");
  const double nn = static_cast<double>(n);
  const double mean = values.row(i).mean();
  double m2 = 0.0;
  double m4 = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double d = values(i, r) - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m4 /= nn;
  const double var = m2 / (nn - 1.0);
  const double se2 = (m4 - var * var * (nn - 3.0) / (nn - 1.0)) / nn;
  return {var, std::sqrt(std::max(se2, 0.0))};
}

double kolmogorov_tail(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;  // series converges slowly; tail is 1 to double precision here
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  // Stephens' small-sample correction of the asymptotic distribution.
  return {d, kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d)};
}

NormalityResult jarque_bera(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 8) throw std::invalid_argument("jarque_bera: need at least eight samples");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  const double jb = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
  return {jb, std::exp(-0.5 * jb)};
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0,1]");
  std::sort(xs.begin(), xs.end());
  const double h = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols_slope: bad input sizes");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("ols_slope: degenerate regressor");
  return sxy / sxx;
}

double lag1_correlation(std::span<const double> xs) {
  if (xs.size() < 3) throw std::invalid_argument("lag1_correlation: need at least three samples");
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - mean;
    den += d * d;
    if (i + 1 < xs.size()) num += d * (xs[i + 1] - mean);
  }
  return num / den;
}

}  // namespace bifbm
