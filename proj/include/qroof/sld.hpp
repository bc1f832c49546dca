#pragma once

#include <functional>
#include <vector>

#include "qroof/hermitian.hpp"

namespace qroof {

/// Eigenvalue crossing or degeneracy on the support of a parametrized family.
class DegeneracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// theta -> rho(theta) with a fixed dimension, differentiated by central
/// differences with step `fd_step`.
struct ParametrizedFamily {
  std::function<DensityMatrix(double)> evaluator;
  double fd_step = 1e-5;
};

struct SldDecomposition {
  double F_total = 0.0;      // Tr rho L^2
  double F_classical = 0.0;  // sum_k lambda_k'^2 / lambda_k over the support
  double F_quantum = 0.0;    // QFI of H_theta
  ComplexMatrix H_theta;     // i sum_k |psi_k'><psi_k|
  ComplexMatrix L_theta;

  double gap() const { return std::abs(F_total - (F_classical + F_quantum)); }
};

/// (rho(theta + h) - rho(theta - h)) / 2h. Checks Hermiticity and zero trace to 1e-8.
ComplexMatrix rho_dot(const ParametrizedFamily& family, double theta);

/// Solves 2 rho' = L rho + rho L in the eigenbasis of rho:
/// L_ab = 2 rho'_ab / (l_a + l_b) when l_a + l_b exceeds the rank cutoff, else 0.
Observable sld(const DensityMatrix& rho, const ComplexMatrix& rho_dot);

/// Tr rho(theta) L^2.
double qfi_theta(const ParametrizedFamily& family, double theta);

/// Splits Tr rho L^2 into the eigenvalue (classical) part and the QFI of the
/// effective Hamiltonian generated by the eigenvector motion. Supported
/// eigenvalues must be simple.
SldDecomposition decompose(const ParametrizedFamily& family, double theta);

namespace families {

/// e^{-iH theta} rho0 e^{iH theta}.
ParametrizedFamily unitary(const DensityMatrix& rho0, const Observable& generator, double fd_step = 1e-5);

/// diag((1 - theta) p0 + theta p1).
ParametrizedFamily linear_classical(std::vector<double> p0, std::vector<double> p1, double fd_step = 1e-5);

ParametrizedFamily constant(const DensityMatrix& rho, double fd_step = 1e-5);

/// Bloch state (I + r sigma_x) / 2.
DensityMatrix bloch_x(double r);

}  // namespace families

}  // namespace qroof
