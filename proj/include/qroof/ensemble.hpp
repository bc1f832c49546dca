#pragma once

#include <cstddef>
#include <vector>

#include "qroof/hermitian.hpp"

namespace qroof {

/// Weighted pure states mixing to a density matrix.
struct PureEnsemble {
  struct Member {
    double weight = 0.0;
    ComplexVector state;  // unit norm
  };

  std::vector<Member> members;
  std::size_t target_dim = 0;

  std::size_t size() const noexcept { return members.size(); }
  double weight_sum() const;
  /// sum_k p_k |phi_k><phi_k|
  ComplexMatrix mixture() const;
};

struct EnsembleDefects {
  double weight_sum = 0.0;  // |sum p_k - 1|
  double norm = 0.0;        // max_k | ||phi_k|| - 1 |
  double mixture = 0.0;     // ||mixture - rho||_max
};

EnsembleDefects ensemble_defects(const PureEnsemble& e, const DensityMatrix& rho);

/// Throws NumericalError unless every PureEnsemble invariant holds against rho.
void check_ensemble(const PureEnsemble& e, const DensityMatrix& rho);

/// Orders members by decreasing weight (stable) and applies fix_phase to each.
void canonicalize(PureEnsemble& e);

/// Builds the ensemble whose k-th unnormalized member is
/// sum_a coeff(k, a) sqrt(l_a) |psi_a> over the support of `spec`.
/// `coeff` has r columns. Members of weight <= drop_below are dropped after
/// checking that their total mass is <= 1e-10. Result is canonicalized.
PureEnsemble ensemble_from_rows(const ComplexMatrix& coeff, const SpectralDecomposition& spec,
                                double drop_below);

/// Tr rho H^2 - sum_k p_k <phi_k|H|phi_k>^2 with rho the mixture of E.
double averaged_variance(const PureEnsemble& e, const Observable& h);

/// Trace-orthogonal operators Gamma_k with Tr Gamma_k Gamma_j = u_k delta_kj and
/// Z_H = sum_k alpha_k Gamma_k.
struct GammaSet {
  std::vector<ComplexMatrix> operators;
  RealVector weights;       // u_k
  RealVector coefficients;  // alpha_k, eigenvalues of Y_H

  /// max_{k,j} |Tr Gamma_k Gamma_j - u_k delta_kj|
  double orthogonality_defect() const;
  /// ||Z - sum_k alpha_k Gamma_k||_max
  double expansion_defect(const ComplexMatrix& z) const;
};

struct MinimalEnsemble {
  PureEnsemble ensemble;
  GammaSet gammas;
  /// Row k holds U_{ka} = <psi_a|y_k>, in support order.
  ComplexMatrix unitary;
};

/// Ensemble of rank(rho) members whose averaged variance of H equals F/4.
/// Built from the eigenvectors of Y_H.
MinimalEnsemble minimal_ensemble(const DensityMatrix& rho, const Observable& h);

/// Unitary V with every diagonal entry of V^dagger X V at most 1e-10 ||X||_max
/// in magnitude. X must be traceless within 1e-10 ||X||_max.
///
/// Repeatedly takes the most positive diagonal entry i and most negative
/// entry j among the unfinished indices, and applies a complex Givens
/// rotation in the (i, j) plane that zeroes entry i exactly. Index i is then
/// finished. At most n - 1 rotations.
ComplexMatrix zero_diagonal_basis(const Observable& x);

/// Ensemble of rank(rho) members, each with <H> equal to Tr rho H, whose
/// averaged variance of H equals the variance of rho.
PureEnsemble maximal_ensemble(const DensityMatrix& rho, const Observable& h);

}  // namespace qroof
