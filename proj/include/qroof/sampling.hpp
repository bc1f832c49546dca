#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "qroof/hermitian.hpp"

namespace qroof {

/// Portable seeded generator. std::mt19937_64 has a fully specified output
/// sequence; the distributions below are implemented here instead of using
/// the standard library ones, whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Box-Muller; the second variate is cached).
  double normal();
  /// Complex normal with E|z|^2 = 1.
  Complex complex_normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of restart stream `index` derived from a master seed:
/// splitmix64(seed + 0x9E3779B97F4A7C15 * (index + 1)).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

/// Haar-distributed m x r isometry: QR of a complex Ginibre matrix (filled
/// column by column) with the phases of diag(R) absorbed into Q.
ComplexMatrix haar_isometry(Eigen::Index m, Eigen::Index r, Rng& rng);

/// Haar-random dim x dim unitary.
ComplexMatrix random_unitary(Eigen::Index dim, Rng& rng);

/// (G + G^dagger) / 2 for a complex Ginibre matrix G.
ComplexMatrix random_hermitian(Eigen::Index dim, Rng& rng);

/// V diag(p) V^dagger with V Haar-random and p uniform on the simplex of
/// `rank` nonzero entries.
ComplexMatrix random_density(Eigen::Index dim, Eigen::Index rank, Rng& rng);

}  // namespace qroof
