#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qroof {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Raised when an input fails a structural check (shape, Hermiticity, trace,
/// positivity). `deviation()` carries the measured violation.
class ValidationError : public std::runtime_error {
 public:
  enum class Kind { kShape, kNonFinite, kHermiticity, kTrace, kNegative, kTraceless, kSupport, kParse };

  ValidationError(Kind kind, double deviation, const std::string& what)
      : std::runtime_error(what), kind_(kind), deviation_(deviation) {}

  Kind kind() const noexcept { return kind_; }
  double deviation() const noexcept { return deviation_; }

 private:
  Kind kind_;
  double deviation_;
};

/// Raised when a numerical postcondition fails (e.g. dropped probability mass
/// or an eigenvalue crossing in a parametrized family).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double herm = 1e-10;
  double trace = 1e-10;
  double psd = 1e-10;
  // Support cutoff. Negative selects dim * eps * max|lambda|.
  double rank = -1.0;
};

/// Max-norm (largest entry modulus).
double max_norm(const ComplexMatrix& a);

/// Max-norm of A - A^dagger.
double hermiticity_defect(const ComplexMatrix& a);

/// Throws ValidationError unless `a` is square, non-empty and finite.
void check_square_finite(const ComplexMatrix& a, const char* name);

/// A Hermitian matrix (within tol_herm at construction).
class Observable {
 public:
  explicit Observable(ComplexMatrix m, double tol_herm = Tolerances{}.herm);

  const ComplexMatrix& matrix() const noexcept { return m_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }

 private:
  ComplexMatrix m_;
};

/// A dim x dim density matrix certified Hermitian, unit trace and PSD.
/// Build through validate_density().
class DensityMatrix {
 public:
  const ComplexMatrix& matrix() const noexcept { return m_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  double min_eigenvalue() const noexcept { return min_eig_; }
  double trace_deviation() const noexcept { return trace_dev_; }
  /// Support cutoff requested at validation; negative means the default.
  double rank_cutoff() const noexcept { return rank_cutoff_; }

 private:
  friend DensityMatrix validate_density(const ComplexMatrix&, const Tolerances&);
  DensityMatrix(ComplexMatrix m, double min_eig, double trace_dev, double rank_cutoff)
      : m_(std::move(m)), min_eig_(min_eig), trace_dev_(trace_dev), rank_cutoff_(rank_cutoff) {}

  ComplexMatrix m_;
  double min_eig_;
  double trace_dev_;
  double rank_cutoff_;
};

struct SpectralDecomposition {
  RealVector eigenvalues;          // descending
  ComplexMatrix eigenvectors;      // columns, orthonormal
  std::vector<std::size_t> support;
  double eps_rank = 0.0;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
  std::size_t rank() const noexcept { return support.size(); }
  bool in_support(std::size_t a) const noexcept { return eigenvalues[static_cast<Eigen::Index>(a)] > eps_rank; }

  /// dim x r matrix of the supported eigenvectors, in support order.
  ComplexMatrix support_vectors() const;
  /// Supported eigenvalues, in support order.
  RealVector support_values() const;
};

/// Rotates `v` so its largest-magnitude component is real and positive.
/// Ties go to the lowest index.
void fix_phase(Eigen::Ref<ComplexVector> v);

/// Hermitian eigendecomposition, eigenvalues descending, each eigenvector
/// phase-fixed. `eps_rank < 0` selects the default cutoff.
SpectralDecomposition eigh(const Observable& a, double eps_rank = -1.0);

/// Default support cutoff dim * eps * max|lambda|.
double default_rank_cutoff(const RealVector& eigenvalues);

DensityMatrix validate_density(const ComplexMatrix& m, const Tolerances& tol = {});

/// Decomposition of rho; `eps_rank < 0` falls back to rho.rank_cutoff().
inline SpectralDecomposition eigh(const DensityMatrix& rho, double eps_rank = -1.0) {
  return eigh(Observable(rho.matrix()), eps_rank < 0.0 ? rho.rank_cutoff() : eps_rank);
}

/// Re Tr(rho H); asserts |Im Tr(rho H)| <= 1e-12 (scaled by ||H||).
double expectation(const DensityMatrix& rho, const Observable& h);

/// Convenience builders.
namespace pauli {
ComplexMatrix x();
ComplexMatrix y();
ComplexMatrix z();
}  // namespace pauli

}  // namespace qroof
