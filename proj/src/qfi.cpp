#include "qroof/qfi.hpp"

#include <cmath>

namespace qroof {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    throw ValidationError(ValidationError::Kind::kShape, 0.0, std::string(where) + ": dimension mismatch");
  }
}

void require_support(const SpectralDecomposition& spec, const char* where) {
  if (spec.rank() == 0) {
    throw ValidationError(ValidationError::Kind::kSupport, 0.0, std::string(where) + ": empty support");
  }
}

}  // namespace

double variance(const DensityMatrix& rho, const Observable& h) {
  require_same_dim(rho.dim(), h.dim(), "variance");
  const double mean = expectation(rho, h);
  const double second = (rho.matrix() * h.matrix() * h.matrix()).trace().real();
  double v = second - mean * mean;
  if (v < 0.0 && v >= -1e-12) v = 0.0;
  return v;
}

ComplexMatrix in_eigenbasis(const SpectralDecomposition& spec, const Observable& h) {
  require_same_dim(spec.dim(), h.dim(), "in_eigenbasis");
  return spec.eigenvectors.adjoint() * h.matrix() * spec.eigenvectors;
}

double qfi_value(const SpectralDecomposition& spec, const Observable& h) {
  const ComplexMatrix hp = in_eigenbasis(spec, h);
  const Eigen::Index n = hp.rows();
  double f = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const double la = std::max(spec.eigenvalues[a], 0.0);
      const double lb = std::max(spec.eigenvalues[b], 0.0);
      const double s = la + lb;
      if (s <= spec.eps_rank) continue;
      const double d = la - lb;
      f += d * d / s * std::norm(hp(a, b));
    }
  }
  return 2.0 * f;
}

Observable build_ZH(const SpectralDecomposition& spec, const Observable& h) {
  require_support(spec, "build_ZH");
  const ComplexMatrix hp = in_eigenbasis(spec, h);
  const std::size_t r = spec.rank();
  const RealVector lam = spec.support_values();
  ComplexMatrix block(r, r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      const auto a = static_cast<Eigen::Index>(spec.support[i]);
      const auto b = static_cast<Eigen::Index>(spec.support[j]);
      const double la = lam[static_cast<Eigen::Index>(i)];
      const double lb = lam[static_cast<Eigen::Index>(j)];
      block(i, j) = std::sqrt(2.0 * la * lb / (la + lb)) * hp(a, b);
    }
  }
  const ComplexMatrix psi = spec.support_vectors();
  return Observable(psi * block * psi.adjoint());
}

Observable build_YH(const SpectralDecomposition& spec, const Observable& h) {
  require_support(spec, "build_YH");
  const ComplexMatrix hp = in_eigenbasis(spec, h);
  const std::size_t r = spec.rank();
  const RealVector lam = spec.support_values();
  ComplexMatrix y(r, r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      const auto a = static_cast<Eigen::Index>(spec.support[i]);
      const auto b = static_cast<Eigen::Index>(spec.support[j]);
      const double la = lam[static_cast<Eigen::Index>(i)];
      const double lb = lam[static_cast<Eigen::Index>(j)];
      y(i, j) = 2.0 * std::sqrt(la * lb) / (la + lb) * hp(a, b);
    }
  }
  return Observable(std::move(y));
}

QfiReport qfi(const DensityMatrix& rho, const Observable& h, double eps_rank) {
  require_same_dim(rho.dim(), h.dim(), "qfi");
  const SpectralDecomposition spec = eigh(rho, eps_rank);
  QfiReport out;
  out.F = qfi_value(spec, h);
  out.I = out.F / 4.0;
  out.variance = variance(rho, h);
  const double second = (rho.matrix() * h.matrix() * h.matrix()).trace().real();
  const Observable z = build_ZH(spec, h);
  const double z2 = (z.matrix() * z.matrix()).trace().real();
  out.F_via_Z = 4.0 * (second - z2);
  return out;
}

}  // namespace qroof
