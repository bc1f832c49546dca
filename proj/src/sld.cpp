#include "qroof/sld.hpp"

#include <cmath>
#include <sstream>

#include "qroof/qfi.hpp"

namespace qroof {

namespace {

DensityMatrix evaluate(const ParametrizedFamily& family, double theta) {
  try {
    return family.evaluator(theta);
  } catch (const std::exception& e) {
    std::ostringstream os;
    os.precision(17);
    os << "family evaluator failed at theta = " << theta << ": " << e.what();
    throw NumericalError(os.str());
  }
}

void check_step(const ParametrizedFamily& family) {
  if (!family.evaluator || !(family.fd_step > 0.0)) {
    throw ValidationError(ValidationError::Kind::kShape, 0.0, "family: missing evaluator or non-positive step");
  }
}

}  // namespace

ComplexMatrix rho_dot(const ParametrizedFamily& family, double theta) {
  check_step(family);
  const double h = family.fd_step;
  const DensityMatrix plus = evaluate(family, theta + h);
  const DensityMatrix minus = evaluate(family, theta - h);
  if (plus.dim() != minus.dim()) throw NumericalError("family: dimension changes with theta");
  ComplexMatrix d = (plus.matrix() - minus.matrix()) / (2.0 * h);
  if (hermiticity_defect(d) > 1e-8 || std::abs(d.trace()) > 1e-8) {
    throw NumericalError("rho_dot: derivative not Hermitian and traceless within 1e-8");
  }
  return d;
}

Observable sld(const DensityMatrix& rho, const ComplexMatrix& rho_dot) {
  check_square_finite(rho_dot, "rho_dot");
  if (static_cast<std::size_t>(rho_dot.rows()) != rho.dim()) {
    throw ValidationError(ValidationError::Kind::kShape, 0.0, "sld: dimension mismatch");
  }
  const double herm = hermiticity_defect(rho_dot);
  if (herm > 1e-8) {
    throw ValidationError(ValidationError::Kind::kHermiticity, herm, "sld: rho_dot not Hermitian");
  }
  const double tr = std::abs(rho_dot.trace());
  if (tr > 1e-8) {
    throw ValidationError(ValidationError::Kind::kTraceless, tr, "sld: rho_dot not traceless");
  }

  const SpectralDecomposition spec = eigh(rho);
  const ComplexMatrix d = spec.eigenvectors.adjoint() * rho_dot * spec.eigenvectors;
  const Eigen::Index n = d.rows();
  ComplexMatrix l = ComplexMatrix::Zero(n, n);
  double resid = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const double s = std::max(spec.eigenvalues[a], 0.0) + std::max(spec.eigenvalues[b], 0.0);
      // Kernel-kernel entries vanish exactly; dividing their rounding noise by
      // a sum just above the cutoff would blow it up.
      if (s <= spec.eps_rank || !(spec.in_support(static_cast<std::size_t>(a)) ||
                                  spec.in_support(static_cast<std::size_t>(b)))) {
        continue;
      }
      l(a, b) = 2.0 * d(a, b) / s;
      resid = std::max(resid, std::abs(spec.eigenvalues[a] * l(a, b) + l(a, b) * spec.eigenvalues[b] -
                                       2.0 * d(a, b)));
    }
  }
  if (resid > 1e-8) throw NumericalError("sld: residual of L rho + rho L = 2 rho_dot above 1e-8");
  return Observable(spec.eigenvectors * l * spec.eigenvectors.adjoint(), 1e-8);
}

double qfi_theta(const ParametrizedFamily& family, double theta) {
  const DensityMatrix rho = evaluate(family, theta);
  const Observable l = sld(rho, rho_dot(family, theta));
  return (rho.matrix() * l.matrix() * l.matrix()).trace().real();
}

namespace {

struct Branch {
  Eigen::Index index;
  ComplexVector vector;  // gauge-fixed
};

/// Follows each supported eigenvector of `base` into `other` by maximal overlap
/// and rotates the partner so the overlap is real positive.
std::vector<Branch> pair_branches(const SpectralDecomposition& base, const SpectralDecomposition& other) {
  std::vector<Branch> out;
  std::vector<bool> taken(other.dim(), false);
  for (const std::size_t k : base.support) {
    const ComplexVector psi = base.eigenvectors.col(static_cast<Eigen::Index>(k));
    const ComplexVector ov = other.eigenvectors.adjoint() * psi;  // <other_l|psi_k>
    Eigen::Index best = 0;
    ov.cwiseAbs2().maxCoeff(&best);
    const double weight = std::norm(ov[best]);
    if (weight < 0.9 || taken[static_cast<std::size_t>(best)]) {
      throw DegeneracyError("decompose: eigenvector pairing across theta +/- h is ambiguous "
                            "(eigenvalue crossing or degeneracy on the support)");
    }
    taken[static_cast<std::size_t>(best)] = true;
    ComplexVector v = other.eigenvectors.col(best);
    // <psi_k|v> = conj(ov[best]); make it real positive.
    v *= ov[best] / std::abs(ov[best]);
    out.push_back({best, std::move(v)});
  }
  return out;
}

}  // namespace

SldDecomposition decompose(const ParametrizedFamily& family, double theta) {
  check_step(family);
  const double h = family.fd_step;
  const DensityMatrix rho = evaluate(family, theta);
  const DensityMatrix rho_p = evaluate(family, theta + h);
  const DensityMatrix rho_m = evaluate(family, theta - h);
  if (rho_p.dim() != rho.dim() || rho_m.dim() != rho.dim()) {
    throw NumericalError("family: dimension changes with theta");
  }

  const SpectralDecomposition spec = eigh(rho);
  const SpectralDecomposition spec_p = eigh(rho_p);
  const SpectralDecomposition spec_m = eigh(rho_m);

  // Supported eigenvalues must be simple.
  for (std::size_t i = 0; i + 1 < spec.support.size(); ++i) {
    const double gap = spec.eigenvalues[static_cast<Eigen::Index>(spec.support[i])] -
                       spec.eigenvalues[static_cast<Eigen::Index>(spec.support[i + 1])];
    if (gap <= 1e-8) {
      throw DegeneracyError("decompose: degenerate eigenvalue on the support of rho(theta)");
    }
  }

  const std::vector<Branch> plus = pair_branches(spec, spec_p);
  const std::vector<Branch> minus = pair_branches(spec, spec_m);

  SldDecomposition out;
  const Eigen::Index n = static_cast<Eigen::Index>(rho.dim());
  // K_ab = i <psi_a|psi_b'> for b on the support, in the eigenbasis of rho(theta).
  ComplexMatrix k_eig = ComplexMatrix::Zero(n, n);
  for (std::size_t s = 0; s < spec.support.size(); ++s) {
    const auto b = static_cast<Eigen::Index>(spec.support[s]);
    const double lam = spec.eigenvalues[b];
    const double lam_dot = (spec_p.eigenvalues[plus[s].index] - spec_m.eigenvalues[minus[s].index]) / (2.0 * h);
    out.F_classical += lam_dot * lam_dot / lam;
    const ComplexVector psi_dot = (plus[s].vector - minus[s].vector) / (2.0 * h);
    k_eig.col(b) = Complex(0.0, 1.0) * (spec.eigenvectors.adjoint() * psi_dot);
  }

  // Support block: Hermitian up to finite-difference error.
  ComplexMatrix h_eig = ComplexMatrix::Zero(n, n);
  double asym = 0.0;
  for (const std::size_t sa : spec.support) {
    for (const std::size_t sb : spec.support) {
      const auto a = static_cast<Eigen::Index>(sa), b = static_cast<Eigen::Index>(sb);
      asym = std::max(asym, std::abs(k_eig(a, b) - std::conj(k_eig(b, a))));
      h_eig(a, b) = 0.5 * (k_eig(a, b) + std::conj(k_eig(b, a)));
    }
  }
  if (asym > 1e-6) {
    std::ostringstream os;
    os << "decompose: effective Hamiltonian asymmetry " << asym << " above 1e-6";
    throw NumericalError(os.str());
  }
  // Kernel/support couplings come from the support derivatives; the
  // kernel/kernel block never enters the QFI.
  for (Eigen::Index a = 0; a < n; ++a) {
    if (spec.in_support(static_cast<std::size_t>(a))) continue;
    for (const std::size_t sb : spec.support) {
      const auto b = static_cast<Eigen::Index>(sb);
      h_eig(a, b) = k_eig(a, b);
      h_eig(b, a) = std::conj(k_eig(a, b));
    }
  }

  out.H_theta = spec.eigenvectors * h_eig * spec.eigenvectors.adjoint();
  const Observable h_theta(out.H_theta, 1e-8);
  out.F_quantum = qfi_value(spec, h_theta);

  const ComplexMatrix d = (rho_p.matrix() - rho_m.matrix()) / (2.0 * h);
  const Observable l = sld(rho, d);
  out.L_theta = l.matrix();
  out.F_total = (rho.matrix() * l.matrix() * l.matrix()).trace().real();
  return out;
}

namespace families {

ParametrizedFamily unitary(const DensityMatrix& rho0, const Observable& generator, double fd_step) {
  if (rho0.dim() != generator.dim()) {
    throw ValidationError(ValidationError::Kind::kShape, 0.0, "unitary family: dimension mismatch");
  }
  const SpectralDecomposition g = eigh(generator);
  const ComplexMatrix base = rho0.matrix();
  ParametrizedFamily f;
  f.fd_step = fd_step;
  f.evaluator = [g, base](double theta) {
    ComplexVector phases(static_cast<Eigen::Index>(g.dim()));
    for (Eigen::Index k = 0; k < phases.size(); ++k) phases[k] = std::polar(1.0, -g.eigenvalues[k] * theta);
    const ComplexMatrix u = g.eigenvectors * phases.asDiagonal() * g.eigenvectors.adjoint();
    return validate_density(u * base * u.adjoint());
  };
  return f;
}

ParametrizedFamily linear_classical(std::vector<double> p0, std::vector<double> p1, double fd_step) {
  if (p0.empty() || p0.size() != p1.size()) {
    throw ValidationError(ValidationError::Kind::kShape, 0.0, "linear-classical family: endpoint sizes differ");
  }
  ParametrizedFamily f;
  f.fd_step = fd_step;
  f.evaluator = [p0 = std::move(p0), p1 = std::move(p1)](double theta) {
    const auto n = static_cast<Eigen::Index>(p0.size());
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto i = static_cast<std::size_t>(k);
      m(k, k) = (1.0 - theta) * p0[i] + theta * p1[i];
    }
    return validate_density(m);
  };
  return f;
}

ParametrizedFamily constant(const DensityMatrix& rho, double fd_step) {
  ParametrizedFamily f;
  f.fd_step = fd_step;
  f.evaluator = [rho](double) { return rho; };
  return f;
}

DensityMatrix bloch_x(double r) {
  const ComplexMatrix m = (ComplexMatrix::Identity(2, 2) + r * pauli::x()) * 0.5;
  return validate_density(m);
}

}  // namespace families

}  // namespace qroof
