#include "bifbm/circulant.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "bifbm/cholesky_sampler.hpp"
#include "bifbm/covariance.hpp"
#include "bifbm/detail/kernels.hpp"
#include "bifbm/random.hpp"

namespace bifbm {

namespace {

// Autocovariance of unit-step fractional Gaussian noise at lag k.
double fgn_autocov(double k, double h) {
  const double e = 2.0 * h;
  return 0.5 * (std::pow(std::abs(k + 1.0), e) - 2.0 * std::pow(std::abs(k), e) +
                std::pow(std::abs(k - 1.0), e));
}

}  // namespace

FbmCirculant::FbmCirculant(std::size_t n, double T, double h, double floor)
    : n_(n), T_(T), h_(h), grid_(Grid::uniform(n, T, true)) {
  if (n < 2) throw std::invalid_argument("fbm_circulant: n must be at least 2");
  if (!(h > 0.0 && h < 1.0)) throw std::domain_error("fbm_circulant: Hurst index must lie in (0,1)");

  const std::size_t m = 2 * n;
  const double var = std::pow(T / static_cast<double>(n), 2.0 * h);
  std::vector<double> c(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t lag = k <= n ? k : m - k;
    c[k] = var * fgn_autocov(static_cast<double>(lag), h);
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, c);

  double max_eig = 0.0;
  double min_eig = 0.0;
  for (const auto& z : spectrum) {
    max_eig = std::max(max_eig, z.real());
    min_eig = std::min(min_eig, z.real());
  }
  min_relative_eigenvalue_ = max_eig > 0.0 ? min_eig / max_eig : -1.0;
  if (min_relative_eigenvalue_ < -floor) {
    fallback_ = std::make_shared<const CholeskySampler>(fbm_kernel(h), grid_);
    return;
  }
  sqrt_eigen_.resize(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k)
    sqrt_eigen_[static_cast<Eigen::Index>(k)] =
        std::sqrt(std::max(0.0, spectrum[k].real()) / static_cast<double>(m));
}

void FbmCirculant::fill(std::uint64_t seed, Eigen::Ref<Eigen::VectorXd> out) const {
  const std::size_t m = 2 * n_;
  NormalSource src(seed);
  std::vector<std::complex<double>> w(m);
  w[0] = sqrt_eigen_[0] * src();
  w[n_] = sqrt_eigen_[static_cast<Eigen::Index>(n_)] * src();
  const double half = std::sqrt(0.5);
  for (std::size_t k = 1; k < n_; ++k) {
    const double a = src();
    const double b = src();
    const double s = sqrt_eigen_[static_cast<Eigen::Index>(k)] * half;
    w[k] = {s * a, s * b};
    w[m - k] = std::conj(w[k]);
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> y;
  fft.fwd(y, w);
  out[0] = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    acc += y[i].real();
    out[static_cast<Eigen::Index>(i + 1)] = acc;
  }
}

Path FbmCirculant::sample(std::uint64_t seed) const {
  if (fallback_) {
    Path p = fallback_->sample(seed);
    p.note = "circulant embedding not PSD; cholesky fallback";
    return p;
  }
  Path p{grid_, Eigen::VectorXd(static_cast<Eigen::Index>(n_ + 1)), {}};
  fill(seed, p.values);
  return p;
}

Ensemble FbmCirculant::sample_ensemble(std::span<const std::uint64_t> seeds, unsigned workers) const {
  if (fallback_) return fallback_->sample_ensemble(seeds, workers);
  Ensemble e{grid_, Eigen::MatrixXd(static_cast<Eigen::Index>(n_ + 1), static_cast<Eigen::Index>(seeds.size())),
             {seeds.begin(), seeds.end()}};
  detail::parallel_for(seeds.size(), workers, [&](std::size_t r) {
    fill(seeds[r], e.values.col(static_cast<Eigen::Index>(r)));
  });
  return e;
}

Path fbm_circulant(std::size_t n, double T, double h, std::uint64_t seed) {
  return FbmCirculant(n, T, h).sample(seed);
}

}  // namespace bifbm
