#include "qroof/sampling.hpp"

#include <cmath>
#include <numbers>

namespace qroof {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (spare_) {
    const double s = *spare_;
    spare_.reset();
    return s;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

Complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return Complex(re, im) * std::sqrt(0.5);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed + 0x9E3779B97F4A7C15ULL * (index + 1));
}

ComplexMatrix haar_isometry(Eigen::Index m, Eigen::Index r, Rng& rng) {
  ComplexMatrix g(m, r);
  for (Eigen::Index c = 0; c < r; ++c) {
    for (Eigen::Index i = 0; i < m; ++i) g(i, c) = rng.complex_normal();
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(m, r);
  for (Eigen::Index c = 0; c < r; ++c) {
    const Complex d = qr.matrixQR()(c, c);
    const double a = std::abs(d);
    if (a > 0.0) q.col(c) *= d / a;
  }
  return q;
}

ComplexMatrix random_unitary(Eigen::Index dim, Rng& rng) {
  return haar_isometry(dim, dim, rng);
}

ComplexMatrix random_hermitian(Eigen::Index dim, Rng& rng) {
  ComplexMatrix g(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (Eigen::Index i = 0; i < dim; ++i) g(i, c) = rng.complex_normal();
  }
  return (g + g.adjoint()) * 0.5;
}

ComplexMatrix random_density(Eigen::Index dim, Eigen::Index rank, Rng& rng) {
  RealVector p = RealVector::Zero(dim);
  double total = 0.0;
  for (Eigen::Index k = 0; k < rank; ++k) {
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    p[k] = -std::log(u);
    total += p[k];
  }
  p /= total;
  const ComplexMatrix v = random_unitary(dim, rng);
  ComplexMatrix rho = v * p.cast<Complex>().asDiagonal() * v.adjoint();
  return (rho + rho.adjoint()) * 0.5;
}

}  // namespace qroof
