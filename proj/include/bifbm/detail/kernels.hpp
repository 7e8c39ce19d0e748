// Fixed-order linear algebra kernels and a small worker pool.
//
// Each output entry is accumulated in an order that depends only on its own
// row length, never on how many replicates are batched together or which
// worker runs them. Sampling a replicate alone or inside an ensemble therefore
// gives bit-identical values.
#ifndef BIFBM_DETAIL_KERNELS_HPP
#define BIFBM_DETAIL_KERNELS_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace bifbm::detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::size_t kTile = 512;

double dot_fixed(const double* a, const double* b, std::size_t n);

/// out(i, r) = sum_c a(i, c) z(c, r) for a row-major block `a`.
void multiply_rows(const RowMatrix& a, const Eigen::MatrixXd& z, Eigen::Ref<Eigen::MatrixXd> out);

/// out = L z where L is stored transposed in the upper triangle of the
/// column-major `stored` (column i holds row i of L in entries 0..i).
void multiply_lower_factor(const Eigen::MatrixXd& stored, const Eigen::MatrixXd& z,
                           Eigen::Ref<Eigen::MatrixXd> out);

/// Runs f(i) for i in [0, n) on up to `workers` threads. The first exception
/// thrown by any task is rethrown after all threads have joined.
template <typename F>
void parallel_for(std::size_t n, unsigned workers, F&& f) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(count - 1);
  for (unsigned w = 1; w < count; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Replicates are processed in fixed-size chunks; chunk boundaries do not
/// depend on the worker count.
inline constexpr std::size_t kReplicateChunk = 64;

template <typename F>
void for_each_chunk(std::size_t n_rep, unsigned workers, F&& f) {
  const std::size_t chunks = (n_rep + kReplicateChunk - 1) / kReplicateChunk;
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::size_t begin = c * kReplicateChunk;
    f(begin, std::min(n_rep, begin + kReplicateChunk));
  });
}

}  // namespace bifbm::detail

#endif  // BIFBM_DETAIL_KERNELS_HPP
