// Seed derivation and Gaussian draws.
//
// Every replicate owns its generator, seeded from (master seed, stream,
// replicate index) through a counter-based mix, so ensembles come out the
// same no matter how replicates are distributed over workers.
#ifndef BIFBM_RANDOM_HPP
#define BIFBM_RANDOM_HPP

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace bifbm {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Independent streams drawn from one master seed.
enum class Stream : std::uint64_t {
  primary = 0,
  x_component = 1,
  bifbm_component = 2,
  reference = 3,
  heat = 4,
  probe = 5,
};

/// Seed of replicate `index` in `stream`:
///   mix64(mix64(master ^ mix64(stream)) + index).
constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index) {
  return mix64(mix64(master ^ mix64(static_cast<std::uint64_t>(stream))) + index);
}

std::vector<std::uint64_t> derive_seeds(std::uint64_t master, Stream stream, std::size_t count);

/// Standard normal draws from a per-seed mt19937_64.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : engine_(seed) {}

  double operator()() { return dist_(engine_); }
  void fill(Eigen::Ref<Eigen::VectorXd> out);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

Eigen::VectorXd standard_normals(std::uint64_t seed, Eigen::Index n);

}  // namespace bifbm

#endif  // BIFBM_RANDOM_HPP
