// Closed-form covariance kernels of the bifractional Brownian motion, the
// fractional Brownian motion and the auxiliary process X^K, together with the
// constants linking them.
//
// The scalar kernels are templates so they can be evaluated in extended
// precision (long double, boost::multiprecision) as well as in double.
#ifndef BIFBM_COVARIANCE_HPP
#define BIFBM_COVARIANCE_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bifbm {

template <typename Scalar = double>
struct BasicBifbmParams {
  Scalar H;
  Scalar K;
  Scalar HK;

  BasicBifbmParams(Scalar h, Scalar k) : H(h), K(k), HK(h * k) {
    if (!(H > Scalar(0) && H < Scalar(1)))
      throw std::domain_error("bifBm parameter H must lie in (0,1)");
    if (!(K > Scalar(0) && K <= Scalar(1)))
      throw std::domain_error("bifBm parameter K must lie in (0,1]");
  }
};

using BifbmParams = BasicBifbmParams<double>;

namespace detail {

template <typename Scalar>
void require_time(Scalar t) {
  if (!(t >= Scalar(0))) throw std::domain_error("covariance kernels are defined for t >= 0");
}

// |t-s|^e with the diagonal forced to exactly zero.
template <typename Scalar>
Scalar lag_power(Scalar t, Scalar s, Scalar e) {
  using std::abs;
  using std::pow;
  if (t == s) return Scalar(0);
  return pow(abs(t - s), e);
}

}  // namespace detail

/// R^{H,K}(t,s) = 2^{-K} ((t^{2H} + s^{2H})^K - |t-s|^{2HK}).
template <typename Scalar>
Scalar bifbm_cov(Scalar t, Scalar s, const BasicBifbmParams<Scalar>& p) {
  using std::pow;
  detail::require_time(t);
  detail::require_time(s);
  const Scalar two_h = Scalar(2) * p.H;
  const Scalar sum = pow(t, two_h) + pow(s, two_h);
  return pow(Scalar(2), -p.K) *
         (pow(sum, p.K) - detail::lag_power(t, s, Scalar(2) * p.HK));
}

/// Fractional Brownian motion covariance with Hurst index h.
template <typename Scalar>
Scalar fbm_cov(Scalar t, Scalar s, Scalar h) {
  using std::pow;
  if (!(h > Scalar(0) && h < Scalar(1)))
    throw std::domain_error("Hurst index must lie in (0,1)");
  detail::require_time(t);
  detail::require_time(s);
  const Scalar e = Scalar(2) * h;
  return Scalar(0.5) * (pow(t, e) + pow(s, e) - detail::lag_power(t, s, e));
}

/// Covariance of X^K: Gamma(1-K)/K * (t^K + s^K - (t+s)^K). K must lie in
/// (0,1); at K = 1 the process vanishes and callers handle that case.
template <typename Scalar>
Scalar xk_cov(Scalar t, Scalar s, Scalar K) {
  using std::pow;
  using std::tgamma;
  if (!(K > Scalar(0) && K < Scalar(1)))
    throw std::domain_error("X^K covariance requires K in (0,1)");
  detail::require_time(t);
  detail::require_time(s);
  return tgamma(Scalar(1) - K) / K * (pow(t, K) + pow(s, K) - pow(t + s, K));
}

/// gamma^K(t^{2H}, s^{2H}): covariance of the time-changed process X^{H,K}.
template <typename Scalar>
Scalar xhk_cov(Scalar t, Scalar s, const BasicBifbmParams<Scalar>& p) {
  using std::pow;
  detail::require_time(t);
  detail::require_time(s);
  return xk_cov(pow(t, Scalar(2) * p.H), pow(s, Scalar(2) * p.H), p.K);
}

// ---------------------------------------------------------------------------
// Constants

/// E|xi|^a for a standard normal xi: 2^{a/2} Gamma((a+1)/2) / sqrt(pi).
double abs_moment(double a);

double c1(double K);  // sqrt(2^{-K} K / Gamma(1-K)), K in (0,1)
double c2(double K);  // 2^{(1-K)/2}
double c3(double K);  // Gamma(1-K)/K * (2 - 2^K), K in (0,1)

/// Constant of the mixed partial of gamma^K(s^{2H}, t^{2H}):
/// d^2/ds dt = C (s^{2H}+t^{2H})^{K-2} (st)^{2H-1} with C = 4H^2 (1-K) Gamma(1-K).
double c_bound(double H, double K);

/// E[Y_t^2] for the derivative process Y = (X^K)':
/// integral of theta^{1-K} e^{-2 theta t} over (0, inf) = Gamma(2-K) 2^{K-2} t^{K-2}.
double derivative_variance(double t, double K);

class DecompositionConstants {
 public:
  explicit DecompositionConstants(const BifbmParams& p);

  /// Scale of X^{H,K} in the decomposition. Throws std::domain_error at K = 1.
  double c1() const;
  double c2() const { return c2_; }
  /// E[(X^K_t)^2] / t^K. Throws std::domain_error at K = 1.
  double c3() const;
  /// E|xi|^{HK}.
  double c_hk() const { return c_hk_; }
  /// Mixed-partial constant of the L^1(t^{HK-1} dt) bound. Throws at K = 1.
  double c_bound() const;

  bool has_x_component() const { return c1_.has_value(); }

 private:
  std::optional<double> c1_;
  double c2_;
  std::optional<double> c3_;
  double c_hk_;
  std::optional<double> c_bound_;
};

inline DecompositionConstants constants(const BifbmParams& p) { return DecompositionConstants(p); }

/// max over pairs of |C1^2 gamma^K(t^{2H}, s^{2H}) + R^{H,K}(t,s) - C2^2 fbm_cov(t,s,HK)|.
double decomposition_residual(std::span<const double> points, const BifbmParams& p);

// ---------------------------------------------------------------------------
// Type-erased kernels for the samplers and quadratic forms.

struct CovKernel {
  std::string name;
  std::function<double(double, double)> eval;

  double operator()(double t, double s) const { return eval(t, s); }
};

CovKernel bifbm_kernel(const BifbmParams& p);
CovKernel fbm_kernel(double h);
CovKernel xk_kernel(double K);
CovKernel xhk_kernel(const BifbmParams& p);
CovKernel brownian_kernel();

/// Dense Gram matrix [k(t_i, t_j)]; only the lower triangle is evaluated and
/// then mirrored, so the result is exactly symmetric.
Eigen::MatrixXd gram_matrix(const CovKernel& kernel, std::span<const double> points);

/// Gram matrix of R^{H,K} with the t^{2H} powers and, on uniform grids, the
/// lag powers cached. Agrees with bifbm_cov to rounding.
Eigen::MatrixXd bifbm_gram(std::span<const double> points, const BifbmParams& p);

}  // namespace bifbm

#endif  // BIFBM_COVARIANCE_HPP
