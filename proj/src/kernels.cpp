#include "bifbm/detail/kernels.hpp"

namespace bifbm::detail {

namespace {
constexpr std::size_t kRowBlock = 32;
}  // namespace

double dot_fixed(const double* a, const double* b, std::size_t n) {
  double acc[8] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t l = 0; l < 8; ++l) acc[l] += a[i + l] * b[i + l];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return (((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))) + tail;
}

void multiply_rows(const RowMatrix& a, const Eigen::MatrixXd& z, Eigen::Ref<Eigen::MatrixXd> out) {
  const auto rows = static_cast<std::size_t>(a.rows());
  const auto len = static_cast<std::size_t>(a.cols());
  const auto reps = static_cast<std::size_t>(z.cols());
  out.setZero();
  for (std::size_t c0 = 0; c0 < len; c0 += kTile) {
    const std::size_t w = std::min(kTile, len - c0);
    for (std::size_t i0 = 0; i0 < rows; i0 += kRowBlock) {
      const std::size_t i1 = std::min(rows, i0 + kRowBlock);
      for (std::size_t r = 0; r < reps; ++r) {
        const double* zc = z.data() + r * static_cast<std::size_t>(z.rows()) + c0;
        for (std::size_t i = i0; i < i1; ++i) {
          out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) +=
              dot_fixed(a.data() + i * len + c0, zc, w);
        }
      }
    }
  }
}

void multiply_lower_factor(const Eigen::MatrixXd& stored, const Eigen::MatrixXd& z,
                           Eigen::Ref<Eigen::MatrixXd> out) {
  const auto n = static_cast<std::size_t>(stored.rows());
  const auto reps = static_cast<std::size_t>(z.cols());
  out.setZero();
  for (std::size_t c0 = 0; c0 < n; c0 += kTile) {
    for (std::size_t i0 = c0; i0 < n; i0 += kRowBlock) {
      const std::size_t i1 = std::min(n, i0 + kRowBlock);
      for (std::size_t r = 0; r < reps; ++r) {
        const double* zc = z.data() + r * n + c0;
        for (std::size_t i = i0; i < i1; ++i) {
          const std::size_t w = std::min(kTile, i + 1 - c0);
          out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) +=
              dot_fixed(stored.data() + i * n + c0, zc, w);
        }
      }
    }
  }
}

}  // namespace bifbm::detail
