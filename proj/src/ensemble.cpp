#include "qroof/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qroof/qfi.hpp"

namespace qroof {

double PureEnsemble::weight_sum() const {
  double s = 0.0;
  for (const auto& m : members) s += m.weight;
  return s;
}

ComplexMatrix PureEnsemble::mixture() const {
  const auto n = static_cast<Eigen::Index>(target_dim);
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (const auto& m : members) out += m.weight * m.state * m.state.adjoint();
  return out;
}

EnsembleDefects ensemble_defects(const PureEnsemble& e, const DensityMatrix& rho) {
  EnsembleDefects d;
  d.weight_sum = std::abs(e.weight_sum() - 1.0);
  for (const auto& m : e.members) d.norm = std::max(d.norm, std::abs(m.state.norm() - 1.0));
  d.mixture = e.target_dim == rho.dim() ? max_norm(e.mixture() - rho.matrix())
                                        : std::numeric_limits<double>::infinity();
  return d;
}

void check_ensemble(const PureEnsemble& e, const DensityMatrix& rho) {
  const EnsembleDefects d = ensemble_defects(e, rho);
  if (d.weight_sum > 1e-10 || d.norm > 1e-12 || d.mixture > 1e-10) {
    std::ostringstream os;
    os.precision(3);
    os << "ensemble invariants violated: weight sum " << d.weight_sum << ", norm " << d.norm
       << ", mixture " << d.mixture;
    throw NumericalError(os.str());
  }
}

void canonicalize(PureEnsemble& e) {
  std::stable_sort(e.members.begin(), e.members.end(),
                   [](const auto& a, const auto& b) { return a.weight > b.weight; });
  for (auto& m : e.members) fix_phase(m.state);
}

PureEnsemble ensemble_from_rows(const ComplexMatrix& coeff, const SpectralDecomposition& spec,
                                double drop_below) {
  const std::size_t r = spec.rank();
  if (static_cast<std::size_t>(coeff.cols()) != r) {
    throw ValidationError(ValidationError::Kind::kShape, 0.0,
                          "ensemble: coefficient columns do not match the support size");
  }
  const ComplexMatrix psi = spec.support_vectors();
  const RealVector sqrt_lam = spec.support_values().cwiseSqrt();

  PureEnsemble out;
  out.target_dim = spec.dim();
  double dropped = 0.0;
  for (Eigen::Index k = 0; k < coeff.rows(); ++k) {
    const ComplexVector c = coeff.row(k).transpose().cwiseProduct(sqrt_lam.cast<Complex>());
    ComplexVector v = psi * c;
    const double w = v.squaredNorm();
    if (w <= drop_below) {
      dropped += w;
      continue;
    }
    v /= std::sqrt(w);
    out.members.push_back({w, std::move(v)});
  }
  if (dropped > 1e-10) {
    throw NumericalError("ensemble: dropped members carry probability mass above 1e-10");
  }
  canonicalize(out);
  return out;
}

double averaged_variance(const PureEnsemble& e, const Observable& h) {
  if (e.target_dim != h.dim()) {
    throw ValidationError(ValidationError::Kind::kShape, 0.0, "averaged_variance: dimension mismatch");
  }
  const ComplexMatrix h2 = h.matrix() * h.matrix();
  const double second = (e.mixture() * h2).trace().real();
  double means = 0.0;
  for (const auto& m : e.members) {
    const double mu = m.state.dot(h.matrix() * m.state).real();
    means += m.weight * mu * mu;
  }
  return second - means;
}

double GammaSet::orthogonality_defect() const {
  double worst = 0.0;
  for (std::size_t k = 0; k < operators.size(); ++k) {
    for (std::size_t j = 0; j < operators.size(); ++j) {
      Complex t = (operators[k] * operators[j]).trace();
      if (k == j) t -= weights[static_cast<Eigen::Index>(k)];
      worst = std::max(worst, std::abs(t));
    }
  }
  return worst;
}

double GammaSet::expansion_defect(const ComplexMatrix& z) const {
  ComplexMatrix sum = ComplexMatrix::Zero(z.rows(), z.cols());
  for (std::size_t k = 0; k < operators.size(); ++k) {
    sum += coefficients[static_cast<Eigen::Index>(k)] * operators[k];
  }
  return max_norm(z - sum);
}

namespace {

void require_same_dim(const DensityMatrix& rho, const Observable& h, const char* where) {
  if (rho.dim() != h.dim()) {
    throw ValidationError(ValidationError::Kind::kShape, 0.0, std::string(where) + ": dimension mismatch");
  }
}

}  // namespace

MinimalEnsemble minimal_ensemble(const DensityMatrix& rho, const Observable& h) {
  require_same_dim(rho, h, "minimal_ensemble");
  const SpectralDecomposition spec = eigh(rho);
  const Observable y = build_YH(spec, h);
  // Only the eigenpairs of Y_H are used; its support set is irrelevant.
  const SpectralDecomposition ydec = eigh(y);

  const std::size_t r = spec.rank();
  const RealVector lam = spec.support_values();
  const ComplexMatrix psi = spec.support_vectors();

  MinimalEnsemble out;
  // U_{ka} = <psi_a|y_k>: row k is the k-th eigenvector of Y_H.
  out.unitary = ydec.eigenvectors.transpose();
  out.ensemble = ensemble_from_rows(out.unitary, spec, spec.eps_rank);

  out.gammas.coefficients = ydec.eigenvalues;
  out.gammas.weights.resize(static_cast<Eigen::Index>(r));
  ComplexMatrix scale(r, r);
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = 0; b < r; ++b) {
      scale(a, b) = std::sqrt(0.5 * (lam[static_cast<Eigen::Index>(a)] + lam[static_cast<Eigen::Index>(b)]));
    }
  }
  for (std::size_t k = 0; k < r; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const ComplexVector yk = ydec.eigenvectors.col(kk);
    // Gamma_k = sum_{a,b} U*_{ka} U_{kb} sqrt((l_a + l_b)/2) |psi_b><psi_a|
    const ComplexMatrix g = (yk * yk.adjoint()).cwiseProduct(scale);
    out.gammas.operators.push_back(psi * g * psi.adjoint());
    out.gammas.weights[kk] = yk.cwiseAbs2().dot(lam);
  }
  return out;
}

ComplexMatrix zero_diagonal_basis(const Observable& x) {
  const ComplexMatrix& x0 = x.matrix();
  const Eigen::Index n = x0.rows();
  const double scale = max_norm(x0);
  const double tr = std::abs(x0.trace());
  if (tr > 1e-10 * scale) {
    std::ostringstream os;
    os.precision(17);
    os << "zero_diagonal_basis: trace " << tr << " exceeds 1e-10 * ||X||";
    throw ValidationError(ValidationError::Kind::kTraceless, tr, os.str());
  }

  ComplexMatrix a = x0;
  ComplexMatrix v = ComplexMatrix::Identity(n, n);
  std::vector<bool> done(static_cast<std::size_t>(n), false);
  const double work_tol = 1e-13 * scale;

  for (Eigen::Index step = 0; step + 1 < n; ++step) {
    Eigen::Index i = -1, j = -1;
    double hi = 0.0, lo = 0.0, worst = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (done[static_cast<std::size_t>(k)]) continue;
      const double d = a(k, k).real();
      worst = std::max(worst, std::abs(d));
      if (i < 0 || d > hi) { i = k; hi = d; }
      if (j < 0 || d < lo) { j = k; lo = d; }
    }
    if (worst <= work_tol || hi <= 0.0 || lo >= 0.0) break;

    // v_i' = cos t e_i + e^{i phi} sin t e_j with e^{i phi} A_ij real positive:
    //   hi + 2|A_ij| tan t + lo tan^2 t = 0
    const Complex aij = a(i, j);
    const double c_abs = std::abs(aij);
    const Complex phase = c_abs > 0.0 ? std::conj(aij) / c_abs : Complex(1.0, 0.0);
    const double tan_t = -(c_abs + std::sqrt(c_abs * c_abs - hi * lo)) / lo;
    const double cs = 1.0 / std::sqrt(1.0 + tan_t * tan_t);
    const double sn = tan_t * cs;

    ComplexMatrix g = ComplexMatrix::Identity(n, n);
    g(i, i) = cs;
    g(j, i) = phase * sn;
    g(i, j) = -std::conj(phase) * sn;
    g(j, j) = cs;
    a = g.adjoint() * a * g;
    v = v * g;
    a(i, i) = 0.0;
    done[static_cast<std::size_t>(i)] = true;
  }

  const ComplexMatrix rotated = v.adjoint() * x0 * v;
  const double resid = rotated.diagonal().cwiseAbs().maxCoeff();
  if (resid > 1e-10 * scale) {
    throw NumericalError("zero_diagonal_basis: residual diagonal above 1e-10 * ||X||");
  }
  return v;
}

PureEnsemble maximal_ensemble(const DensityMatrix& rho, const Observable& h) {
  require_same_dim(rho, h, "maximal_ensemble");
  const SpectralDecomposition spec = eigh(rho);
  if (spec.rank() == 0) {
    throw ValidationError(ValidationError::Kind::kSupport, 0.0, "maximal_ensemble: empty support");
  }
  const ComplexMatrix hp = in_eigenbasis(spec, h);
  const double mean = expectation(rho, h);
  const auto r = static_cast<Eigen::Index>(spec.rank());
  const RealVector sqrt_lam = spec.support_values().cwiseSqrt();

  // X_H = sqrt(rho) (H - <H>) sqrt(rho) on the support.
  ComplexMatrix xh(r, r);
  for (Eigen::Index p = 0; p < r; ++p) {
    for (Eigen::Index q = 0; q < r; ++q) {
      const auto a = static_cast<Eigen::Index>(spec.support[static_cast<std::size_t>(p)]);
      const auto b = static_cast<Eigen::Index>(spec.support[static_cast<std::size_t>(q)]);
      Complex hab = hp(a, b);
      if (p == q) hab -= mean;
      xh(p, q) = sqrt_lam[p] * sqrt_lam[q] * hab;
    }
  }
  // Kernel eigenvalues below the cutoff and rounding leave a trace residue
  // far below the zero-diagonal tolerance; remove it so the precondition holds.
  xh.diagonal().array() -= xh.trace() / static_cast<double>(r);

  const ComplexMatrix v = zero_diagonal_basis(Observable(xh));
  // Column k of V gives the coefficients of |V_k>.
  return ensemble_from_rows(v.transpose(), spec, spec.eps_rank);
}

}  // namespace qroof
