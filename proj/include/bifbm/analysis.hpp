// Path functionals: alpha-variation and strong variation, the origin growth
// probe for X^K, quadratic forms of step functions and the L^1(t^{HK-1} dt)
// bound, and a roughness (Hoelder exponent) estimate.
#ifndef BIFBM_ANALYSIS_HPP
#define BIFBM_ANALYSIS_HPP

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "bifbm/covariance.hpp"
#include "bifbm/grid.hpp"
#include "bifbm/report.hpp"

namespace bifbm {

/// phi = levels[i] on [breakpoints[i], breakpoints[i+1]).
struct StepFunction {
  std::vector<double> breakpoints;
  std::vector<double> levels;

  /// Throws unless breakpoints are nonnegative, strictly increasing and one
  /// longer than levels.
  void validate() const;
  static StepFunction indicator(double a, double b);
};

/// Up to max_pieces pieces on [0, T] with levels uniform in [-level_bound, level_bound].
StepFunction random_step_function(std::mt19937_64& rng, double T, std::size_t max_pieces = 8,
                                  double level_bound = 2.0);

struct VariationEstimate {
  double alpha;
  std::size_t n;
  double value;
  double limit_prediction;
  double relative_gap;
};

/// sum_i |X_{t_{i+1}} - X_{t_i}|^alpha over a uniform grid.
double variation(const Path& path, double alpha);
/// Same on every column of an ensemble, subsampled to every `stride`-th point.
std::vector<double> variation(const Ensemble& e, double alpha, std::size_t stride = 1);

/// (1/eps) int_0^t |X_{s+eps} - X_s|^alpha ds by the left-endpoint rule on the
/// grid. eps and t must be grid multiples with t + eps inside the grid; t
/// defaults to the largest admissible value, back() - eps.
double strong_variation(const Path& path, double alpha, double eps,
                        double t = std::numeric_limits<double>::quiet_NaN());

struct XVariationOptions {
  std::size_t n_rep = 100;
  unsigned workers = 1;
  double T = 1.0;
  /// final mean must be below threshold * reference
  double threshold = 0.1;
  /// Limit the final mean is compared with; NaN selects C2^{1/(HK)} E|xi|^{HK}.
  double reference = std::numeric_limits<double>::quiet_NaN();
};

/// V^{n,1/(HK)} of X^{H,K} paths on [0, T] for each n in n_sweep (all
/// dividing the largest, which sets the sampling grid). Pass iff the ensemble
/// means strictly decrease and the last is below threshold * reference.
CheckReport x_variation_vanishes(double K, double H, std::span<const std::size_t> n_sweep, std::uint64_t seed,
                                 const XVariationOptions& options = {});

struct OriginProbeOptions {
  unsigned workers = 1;
  int k_min = 4;
  int k_split = 12;
  int k_max = 20;
  double quantile = 0.99;
  double stability_factor = 2.0;
};

/// G_hat = max_t |X^K_t| / sqrt(t^K log log(1/t)) over t = 2^{-k}; compares
/// the ensemble quantile of the k <= k_split and k <= k_max truncations.
CheckReport origin_growth_probe(double K, std::size_t n_rep, std::uint64_t seed, const OriginProbeOptions& options = {});

/// E[(sum_i phi_i (X_{t_{i+1}} - X_{t_i}))^2] for a process with covariance `kernel`.
double step_quadratic_form(const StepFunction& phi, const CovKernel& kernel);

/// LHS = step_quadratic_form(phi, gamma^K(.^{2H}, .^{2H})), RHS = C_bound
/// (int |phi| t^{HK-1} dt)^2; pass iff LHS <= RHS (1 + 1e-9).
CheckReport l1_weight_bound_check(const StepFunction& phi, const BifbmParams& p);

/// Central finite difference (long double) of the mixed partial of
/// gamma^K(s^{2H}, t^{2H}) divided by (s^{2H}+t^{2H})^{K-2} (st)^{2H-1}.
double c_bound_finite_difference(double H, double K, double s, double t, double h = 1e-4);

/// Slope of log median |X_{t+l} - X_t| against log l over lags l in {1,...,64}
/// grid steps. Needs a uniform grid with at least 4096 points.
double holder_exponent_estimate(const Ensemble& paths);

}  // namespace bifbm

#endif  // BIFBM_ANALYSIS_HPP
