// Ensemble statistics used by the verification checks.
#ifndef BIFBM_STATISTICS_HPP
#define BIFBM_STATISTICS_HPP

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace bifbm {

struct Estimate {
  double value;
  double se;
};

/// Sample mean of xs and its standard error.
Estimate mean_estimate(std::span<const double> xs);

/// E[X_i X_j] for a centered process, estimated by the mean of the products
/// across replicates (columns), with the standard error of that mean.
Estimate product_moment(const Eigen::MatrixXd& values, Eigen::Index i, Eigen::Index j);

/// Sample variance of a row (replicates in columns), with the standard error
/// of the unbiased variance estimate, sqrt((m4 - s^4 (n-3)/(n-1)) / n).
Estimate variance_estimate(const Eigen::MatrixXd& values, Eigen::Index i);

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
struct KsResult {
  double statistic;
  double p_value;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Kolmogorov distribution tail Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 lambda^2}.
double kolmogorov_tail(double lambda);

/// Jarque-Bera normality statistic and its chi-square(2) p-value exp(-JB/2).
struct NormalityResult {
  double statistic;
  double p_value;
};
NormalityResult jarque_bera(std::span<const double> xs);

/// Linear-interpolated quantile (type 7), q in [0,1].
double quantile(std::vector<double> xs, double q);
double median(std::vector<double> xs);

/// Ordinary least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

/// Lag-1 sample autocorrelation.
double lag1_correlation(std::span<const double> xs);

}  // namespace bifbm

#endif  // BIFBM_STATISTICS_HPP
