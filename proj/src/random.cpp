#include "bifbm/random.hpp"

namespace bifbm {

std::vector<std::uint64_t> derive_seeds(std::uint64_t master, Stream stream, std::size_t count) {
  std::vector<std::uint64_t> out(count);
  for (std::size_t r = 0; r < count; ++r) out[r] = derive_seed(master, stream, r);
  return out;
}

void NormalSource::fill(Eigen::Ref<Eigen::VectorXd> out) {
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = dist_(engine_);
}

Eigen::VectorXd standard_normals(std::uint64_t seed, Eigen::Index n) {
  Eigen::VectorXd z(n);
  NormalSource src(seed);
  src.fill(z);
  return z;
}

}  // namespace bifbm
