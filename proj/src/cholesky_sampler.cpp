#include "bifbm/cholesky_sampler.hpp"

#include <string>

#include "bifbm/detail/kernels.hpp"
#include "bifbm/random.hpp"

namespace bifbm {

namespace {

void restore_lower(Eigen::MatrixXd& a, const Eigen::VectorXd& diag) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    a(j, j) = diag[j];
    for (Eigen::Index i = j + 1; i < n; ++i) a(i, j) = a(j, i);
  }
}

double min_eigenvalue_estimate(Eigen::MatrixXd& a, const Eigen::VectorXd& diag) {
  restore_lower(a, diag);
  if (a.rows() <= 2048) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
  // Smallest LDL^T pivot: a cheap upper bound on the smallest eigenvalue.
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  return ldlt.vectorD().minCoeff();
}

}  // namespace

NonPsdKernelError::NonPsdKernelError(std::size_t grid_size, double min_eigenvalue)
    : std::runtime_error("kernel is not positive semidefinite on a grid of " +
                         std::to_string(grid_size) + " points (minimum eigenvalue estimate " +
                         std::to_string(min_eigenvalue) + ")"),
      grid_size_(grid_size),
      min_eigenvalue_(min_eigenvalue) {}

CholeskySampler::CholeskySampler(const CovKernel& kernel, Grid grid)
    : CholeskySampler(kernel, std::move(grid),
                      [&kernel](std::span<const double> pts) { return gram_matrix(kernel, pts); }) {}

CholeskySampler::CholeskySampler(const CovKernel& kernel, Grid grid, const GramBuilder& build)
    : grid_(std::move(grid)) {
  std::vector<double> pts;
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (grid_[i] == 0.0 && kernel(0.0, 0.0) == 0.0) continue;
    free_.push_back(static_cast<Eigen::Index>(i));
    pts.push_back(grid_[i]);
  }
  if (!pts.empty()) factorize(build(pts));
}

void CholeskySampler::factorize(Eigen::MatrixXd gram) {
  const Eigen::Index n = gram.rows();
  const Eigen::VectorXd diag = gram.diagonal();
  const double mean_diag = diag.sum() / static_cast<double>(n);
  bool ok = false;
  for (std::size_t attempt = 0; attempt < kJitterLadder.size(); ++attempt) {
    if (attempt > 0) restore_lower(gram, diag);
    const double lambda = kJitterLadder[attempt];
    gram.diagonal().array() += lambda * mean_diag;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>, Eigen::Lower> llt(gram);
    if (llt.info() == Eigen::Success) {
      jitter_ = lambda;
      ok = true;
      break;
    }
  }
  if (!ok) throw NonPsdKernelError(static_cast<std::size_t>(n), min_eigenvalue_estimate(gram, diag));

  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) gram(j, i) = gram(i, j);
  factor_ = std::move(gram);
}

void CholeskySampler::fill(std::span<const std::uint64_t> seeds, Eigen::Ref<Eigen::MatrixXd> out) const {
  const auto d = static_cast<Eigen::Index>(free_.size());
  const auto reps = static_cast<Eigen::Index>(seeds.size());
  out.setZero();
  if (d == 0) return;
  Eigen::MatrixXd z(d, reps);
  for (Eigen::Index r = 0; r < reps; ++r) {
    NormalSource src(seeds[static_cast<std::size_t>(r)]);
    src.fill(z.col(r));
  }
  Eigen::MatrixXd x(d, reps);
  detail::multiply_lower_factor(factor_, z, x);
  for (Eigen::Index k = 0; k < d; ++k) out.row(free_[static_cast<std::size_t>(k)]) = x.row(k);
}

Path CholeskySampler::sample(std::uint64_t seed) const {
  Path p{grid_, Eigen::VectorXd(static_cast<Eigen::Index>(grid_.size())), {}};
  const std::uint64_t s[1] = {seed};
  fill(s, p.values);
  if (jitter_ > 0.0) p.note = "cholesky jitter " + std::to_string(jitter_);
  return p;
}

Ensemble CholeskySampler::sample_ensemble(std::span<const std::uint64_t> seeds, unsigned workers) const {
  Ensemble e{grid_, Eigen::MatrixXd(static_cast<Eigen::Index>(grid_.size()),
                                    static_cast<Eigen::Index>(seeds.size())),
             {seeds.begin(), seeds.end()}};
  detail::for_each_chunk(seeds.size(), workers, [&](std::size_t begin, std::size_t end) {
    fill(seeds.subspan(begin, end - begin),
         e.values.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)));
  });
  return e;
}

Path cholesky_sample(const CovKernel& kernel, const Grid& grid, std::uint64_t seed) {
  return CholeskySampler(kernel, grid).sample(seed);
}

}  // namespace bifbm
