#include "qroof/hermitian.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qroof {

double max_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const ComplexMatrix& a) {
  return max_norm(a - a.adjoint());
}

void check_square_finite(const ComplexMatrix& a, const char* name) {
  if (a.rows() < 1 || a.rows() != a.cols()) {
    std::ostringstream os;
    os << name << ": expected a non-empty square matrix, got " << a.rows() << "x" << a.cols();
    throw ValidationError(ValidationError::Kind::kShape, 0.0, os.str());
  }
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const Complex z = a.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw ValidationError(ValidationError::Kind::kNonFinite, 0.0,
                            std::string(name) + ": non-finite entry");
    }
  }
}

namespace {

void check_hermitian(const ComplexMatrix& a, double tol, const char* name) {
  const double dev = hermiticity_defect(a);
  if (dev > tol) {
    std::ostringstream os;
    os.precision(17);
    os << name << ": not Hermitian, max |A - A^dagger| = " << dev << " exceeds " << tol;
    throw ValidationError(ValidationError::Kind::kHermiticity, dev, os.str());
  }
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  return (a + a.adjoint()) * 0.5;
}

}  // namespace

Observable::Observable(ComplexMatrix m, double tol_herm) {
  check_square_finite(m, "observable");
  check_hermitian(m, tol_herm, "observable");
  m_ = hermitian_part(m);
}

ComplexMatrix SpectralDecomposition::support_vectors() const {
  ComplexMatrix out(eigenvectors.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = eigenvectors.col(static_cast<Eigen::Index>(support[k]));
  }
  return out;
}

RealVector SpectralDecomposition::support_values() const {
  RealVector out(static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    out[static_cast<Eigen::Index>(k)] = eigenvalues[static_cast<Eigen::Index>(support[k])];
  }
  return out;
}

void fix_phase(Eigen::Ref<ComplexVector> v) {
  if (v.size() == 0) return;
  Eigen::Index best = 0;
  double best_abs = std::abs(v[0]);
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    // Strictly larger by more than rounding so near-ties stay on the lower index.
    if (a > best_abs * (1.0 + 1e-12)) {
      best = i;
      best_abs = a;
    }
  }
  if (best_abs == 0.0) return;
  v *= std::conj(v[best]) / best_abs;
  v[best] = Complex(std::abs(v[best]), 0.0);
}

double default_rank_cutoff(const RealVector& eigenvalues) {
  if (eigenvalues.size() == 0) return 0.0;
  const double scale = eigenvalues.cwiseAbs().maxCoeff();
  return static_cast<double>(eigenvalues.size()) * std::numeric_limits<double>::epsilon() * scale;
}

SpectralDecomposition eigh(const Observable& a, double eps_rank) {
  const ComplexMatrix& m = a.matrix();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigh: eigensolver did not converge");
  }
  const Eigen::Index n = m.rows();
  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  // Eigen sorts ascending; reversing keeps a fixed tie order.
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues[k] = solver.eigenvalues()[n - 1 - k];
    out.eigenvectors.col(k) = solver.eigenvectors().col(n - 1 - k);
    fix_phase(out.eigenvectors.col(k));
  }
  out.eps_rank = eps_rank < 0.0 ? default_rank_cutoff(out.eigenvalues) : eps_rank;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (out.eigenvalues[k] > out.eps_rank) out.support.push_back(static_cast<std::size_t>(k));
  }
  return out;
}

DensityMatrix validate_density(const ComplexMatrix& m, const Tolerances& tol) {
  check_square_finite(m, "density matrix");
  check_hermitian(m, tol.herm, "density matrix");
  ComplexMatrix h = hermitian_part(m);

  const double trace_dev = std::abs(h.trace().real() - 1.0);
  if (trace_dev > tol.trace) {
    std::ostringstream os;
    os.precision(17);
    os << "density matrix: trace deviates from 1 by " << trace_dev << " (tolerance " << tol.trace << ")";
    throw ValidationError(ValidationError::Kind::kTrace, trace_dev, os.str());
  }

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  const double min_eig = solver.eigenvalues()[0];
  if (min_eig < -tol.psd) {
    std::ostringstream os;
    os.precision(17);
    os << "density matrix: eigenvalue " << min_eig << " below -" << tol.psd;
    throw ValidationError(ValidationError::Kind::kNegative, -min_eig, os.str());
  }
  return DensityMatrix(std::move(h), min_eig, trace_dev, tol.rank);
}

double expectation(const DensityMatrix& rho, const Observable& h) {
  if (rho.dim() != h.dim()) {
    throw ValidationError(ValidationError::Kind::kShape, 0.0, "expectation: dimension mismatch");
  }
  const Complex t = (rho.matrix() * h.matrix()).trace();
  const double bound = 1e-12 * std::max(1.0, max_norm(h.matrix()) * static_cast<double>(h.dim()));
  if (std::abs(t.imag()) > bound) {
    throw NumericalError("expectation: Tr(rho H) has imaginary part beyond 1e-12");
  }
  return t.real();
}

namespace pauli {
ComplexMatrix x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
ComplexMatrix y() {
  ComplexMatrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}
ComplexMatrix z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}
}  // namespace pauli

}  // namespace qroof
