#pragma once

#include "qroof/hermitian.hpp"

namespace qroof {

struct QfiReport {
  double F = 0.0;         // quantum Fisher information
  double I = 0.0;         // F / 4
  double variance = 0.0;
  double F_via_Z = 0.0;   // 4 (Tr rho H^2 - Tr Z_H^2)
};

/// Tr rho H^2 - (Tr rho H)^2, clamped to zero when within -1e-12.
double variance(const DensityMatrix& rho, const Observable& h);

/// H in the eigenbasis of rho: (H_psi)_{ab} = <psi_a|H|psi_b>, full dim x dim.
ComplexMatrix in_eigenbasis(const SpectralDecomposition& spec, const Observable& h);

/// Quantum Fisher information
///
///   F = 2 sum_{a,b} (l_a - l_b)^2 / (l_a + l_b) |H_ab|^2
///
/// over every eigenvector pair of rho with l_a + l_b above the rank cutoff,
/// including support/kernel couplings.
QfiReport qfi(const DensityMatrix& rho, const Observable& h, double eps_rank = -1.0);

/// F alone, from an existing decomposition.
double qfi_value(const SpectralDecomposition& spec, const Observable& h);

/// Z_H = sum_{a,b in R} sqrt(2 l_a l_b / (l_a + l_b)) H_ab |psi_a><psi_b|,
/// in the full computational basis (zero off the support).
Observable build_ZH(const SpectralDecomposition& spec, const Observable& h);

/// Y_H = sum_{a,b in R} 2 sqrt(l_a l_b) / (l_a + l_b) H_ab, as an r x r
/// matrix in support order.
Observable build_YH(const SpectralDecomposition& spec, const Observable& h);

}  // namespace qroof
