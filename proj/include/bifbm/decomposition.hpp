// C1 X^{H,K} + B^{H,K} has the law of C2 B^{HK} when X^K and B^{H,K} are
// independent. This module builds the sum from independent components and
// checks the law equality statistically.
//
// The identity is never used in the other direction: B^{H,K} is always sampled
// from its own covariance. Subtracting an independent C1 X^{H,K} from
// C2 B^{HK} gives covariance C2^2 R_fbm + C1^2 gamma^K, not R^{H,K}.
#ifndef BIFBM_DECOMPOSITION_HPP
#define BIFBM_DECOMPOSITION_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <optional>

#include "bifbm/cholesky_sampler.hpp"
#include "bifbm/covariance.hpp"
#include "bifbm/grid.hpp"
#include "bifbm/report.hpp"
#include "bifbm/xk_quadrature.hpp"

namespace bifbm {

enum class XMethod { quadrature, cholesky };

struct SeedPair {
  std::uint64_t x;
  std::uint64_t bifbm;
};

struct DecompositionSample {
  Path x_path;      // X^{H,K}_t = X^K_{t^{2H}}
  Path bifbm_path;  // independent B^{H,K}
  Path sum_path;    // C1 x + bifbm
};

struct DecompositionEnsemble {
  Ensemble x;
  Ensemble bifbm;
  Ensemble sum;
};

class DecompositionSampler {
 public:
  /// At K = 1 the X component is identically zero and the sum is B^{H,1}.
  DecompositionSampler(Grid grid, BifbmParams params, XMethod method = XMethod::quadrature,
                       std::optional<QuadratureScheme> scheme = std::nullopt);

  const Grid& grid() const { return grid_; }
  const BifbmParams& params() const { return params_; }
  double c1() const { return c1_; }

  DecompositionSample sample(SeedPair seeds) const;

  /// Replicate r uses x seed derive_seed(master, x_component, r) and bifBm
  /// seed derive_seed(master, bifbm_component, r).
  DecompositionEnsemble sample_ensemble(std::uint64_t master_seed, std::size_t n_rep, unsigned workers = 1) const;

 private:
  Grid grid_;
  BifbmParams params_;
  XMethod method_;
  double c1_ = 0.0;
  Grid x_grid_;
  std::optional<XkQuadrature> x_quadrature_;
  std::optional<CholeskySampler> x_cholesky_;
  CholeskySampler bifbm_;
};

DecompositionSample sample_decomposition(const Grid& grid, const BifbmParams& p, SeedPair seeds,
                                         XMethod method = XMethod::quadrature);

/// Probe times {T/8, T/2, T} and the six pairs among them.
std::array<double, 3> probe_times(double T);
std::array<std::pair<double, double>, 6> probe_pairs(double T);

struct LawEqualityOptions {
  unsigned workers = 1;
  XMethod method = XMethod::quadrature;
  /// Multiplier of the reference fBm(HK) ensemble; NaN selects C2.
  double reference_scale = std::numeric_limits<double>::quiet_NaN();
  double gap_tolerance = 4.0;         // standard errors
  double ks_significance = 1e-3;
};

/// Compares sums C1 X^{H,K} + B^{H,K} against C2 B^{HK} from the circulant
/// sampler: covariance gaps at the probe pairs in standard errors, and
/// two-sample KS tests of the marginals at the probe times. The grid must be a
/// uniform lattice {i T/n}.
CheckReport verify_law_equality(std::size_t n_rep, const Grid& grid, const BifbmParams& p,
                                std::uint64_t master_seed, const LawEqualityOptions& options = {});

}  // namespace bifbm

#endif  // BIFBM_DECOMPOSITION_HPP
