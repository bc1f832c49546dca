#include "qroof/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "qroof/qfi.hpp"

namespace qroof {

double orthonormality_defect(const ComplexMatrix& w) {
  return max_norm(w.adjoint() * w - ComplexMatrix::Identity(w.cols(), w.cols()));
}

StiefelPoint::StiefelPoint(ComplexMatrix w, double tol) : w_(std::move(w)) {
  if (w_.cols() < 1 || w_.rows() < w_.cols()) {
    throw ValidationError(ValidationError::Kind::kShape, 0.0, "StiefelPoint: need rows >= cols >= 1");
  }
  const double d = orthonormality_defect(w_);
  if (!(d <= tol)) {
    throw ValidationError(ValidationError::Kind::kShape, d, "StiefelPoint: columns not orthonormal");
  }
}

StiefelPoint haar_random_stiefel(Eigen::Index m, Eigen::Index r, Rng& rng) {
  if (r < 1 || m < r) {
    throw ValidationError(ValidationError::Kind::kShape, 0.0, "haar_random_stiefel: need m >= r >= 1");
  }
  return StiefelPoint(haar_isometry(m, r, rng));
}

namespace {

// Members lighter than this are skipped by the objective and dropped from ensembles.
constexpr double kWeightGuard = 1e-14;

}  // namespace

PureEnsemble ensemble_from_isometry(const StiefelPoint& w, const SpectralDecomposition& spec) {
  if (static_cast<std::size_t>(w.cols()) != spec.rank()) {
    throw ValidationError(ValidationError::Kind::kShape, 0.0,
                          "ensemble_from_isometry: column count differs from the support size");
  }
  return ensemble_from_rows(w.matrix(), spec, kWeightGuard);
}

void OracleConfig::validate() const {
  if (restarts < 1 || max_iterations < 1 || !(convergence_tol > 0.0) ||
      (ensemble_size && *ensemble_size < 1)) {
    throw ValidationError(ValidationError::Kind::kShape, 0.0, "oracle: invalid configuration");
  }
}

namespace {

/// Averaged variance as a function of the row coefficients x_k of W:
///   f(W) = c0 - sum_k (x_k^dag M x_k)^2 / (x_k^dag L x_k),
/// M = sqrt(L) H sqrt(L) on the support and L = diag(l_a).
class Search {
 public:
  Search(const SpectralDecomposition& spec, const Observable& h, double sign)
      : sign_(sign), lam_(spec.support_values()) {
    const ComplexMatrix hp = in_eigenbasis(spec, h);
    const auto r = static_cast<Eigen::Index>(spec.rank());
    ComplexMatrix hr(r, r);
    for (Eigen::Index p = 0; p < r; ++p) {
      for (Eigen::Index q = 0; q < r; ++q) {
        hr(p, q) = hp(static_cast<Eigen::Index>(spec.support[static_cast<std::size_t>(p)]),
                      static_cast<Eigen::Index>(spec.support[static_cast<std::size_t>(q)]));
      }
    }
    const RealVector s = lam_.cwiseSqrt();
    m_ = s.cast<Complex>().asDiagonal() * hr * s.cast<Complex>().asDiagonal();
    // Tr rho_R H^2 = sum_a l_a (H^2)_aa with the full H^2 (kernel couplings included).
    const ComplexMatrix psi = spec.support_vectors();
    const ComplexMatrix h2 = psi.adjoint() * h.matrix() * h.matrix() * psi;
    c0_ = 0.0;
    for (Eigen::Index a = 0; a < r; ++a) c0_ += lam_[a] * h2(a, a).real();
  }

  struct Stats {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::uint64_t count = 0;
    void record(double f) {
      lo = std::min(lo, f);
      hi = std::max(hi, f);
      ++count;
    }
  };

  /// Runs cyclic plane descent from `w` in place; returns sweeps used.
  int refine(ComplexMatrix& w, const OracleConfig& cfg, Stats& stats) const {
    double f = value(w);
    stats.record(f);
    const Eigen::Index m = w.rows();
    int sweeps = 0;
    int stalled = 0;
    while (sweeps < cfg.max_iterations) {
      ++sweeps;
      const double f_start = f;
      for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i + 1; j < m; ++j) optimize_plane(w, i, j, f, stats);
      }
      const double f_new = value(w);
      stats.record(f_new);
      const double gain = sign_ * (f_start - f_new);
      f = f_new;
      // Near saddles single sweeps gain almost nothing before descent resumes.
      stalled = gain <= cfg.convergence_tol * std::max(1.0, std::abs(f_new)) ? stalled + 1 : 0;
      if (stalled >= kStallSweeps) break;
    }
    return sweeps;
  }

  double value(const ComplexMatrix& w) const {
    double f = c0_;
    for (Eigen::Index k = 0; k < w.rows(); ++k) {
      const ComplexVector x = w.row(k).transpose();
      const double p = x.cwiseAbs2().dot(lam_);
      const double q = x.dot(m_ * x).real();
      f -= term(q, p);
    }
    return f;
  }

 private:
  static constexpr int kPhaseSeeds = 4;
  static constexpr int kStallSweeps = 8;

  static double term(double q, double p) { return p > kWeightGuard ? q * q / p : 0.0; }

  struct Plane {
    Complex a00, a01, a11;  // x_s^dag M x_t
    Complex b00, b01, b11;  // x_s^dag L x_t

    // Returns T(t, phi) = sum over both rotated rows of q^2 / p.
    double contribution(double t, double phi) const {
      const double c = std::cos(t), s = std::sin(t);
      const Complex e = std::polar(1.0, phi);
      // Row i' = c x_i - e s x_j; row j' = conj(e) s x_i + c x_j.
      const Complex gi0 = c, gi1 = -e * s;
      const Complex gj0 = std::conj(e) * s, gj1 = c;
      return term(form(a00, a01, a11, gi0, gi1), form(b00, b01, b11, gi0, gi1)) +
             term(form(a00, a01, a11, gj0, gj1), form(b00, b01, b11, gj0, gj1));
    }

    static double form(Complex q00, Complex q01, Complex q11, Complex g0, Complex g1) {
      return (std::norm(g0) * q00 + std::norm(g1) * q11).real() +
             2.0 * (std::conj(g0) * q01 * g1).real();
    }
  };

  /// Golden-section minimization of a periodic function on [lo, lo + period),
  /// bracketed by a coarse grid. Returns (argmin, min).
  template <typename F>
  static std::pair<double, double> line_min(F&& fun, double lo, double period) {
    constexpr int kGrid = 16;
    const double step = period / kGrid;
    double best_x = lo, best_v = fun(lo);
    for (int k = 1; k < kGrid; ++k) {
      const double x = lo + step * k;
      const double v = fun(x);
      if (v < best_v) {
        best_v = v;
        best_x = x;
      }
    }
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = best_x - step, b = best_x + step;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = fun(x1), f2 = fun(x2);
    while (b - a > 1e-9) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - inv_phi * (b - a);
        f1 = fun(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + inv_phi * (b - a);
        f2 = fun(x2);
      }
    }
    if (f1 < best_v) {
      best_v = f1;
      best_x = x1;
    }
    if (f2 < best_v) {
      best_v = f2;
      best_x = x2;
    }
    return {best_x, best_v};
  }

  void optimize_plane(ComplexMatrix& w, Eigen::Index i, Eigen::Index j, double& f, Stats& stats) const {
    const ComplexVector xi = w.row(i).transpose();
    const ComplexVector xj = w.row(j).transpose();
    const ComplexVector mxi = m_ * xi, mxj = m_ * xj;
    const RealVector& l = lam_;
    Plane pl;
    pl.a00 = xi.dot(mxi);
    pl.a01 = xi.dot(mxj);
    pl.a11 = xj.dot(mxj);
    pl.b00 = xi.dot(l.cast<Complex>().cwiseProduct(xi));
    pl.b01 = xi.dot(l.cast<Complex>().cwiseProduct(xj));
    pl.b11 = xj.dot(l.cast<Complex>().cwiseProduct(xj));

    const double t0 = pl.contribution(0.0, 0.0);
    const double base = f + t0;  // f = base - T(t, phi)
    auto objective = [&](double t, double phi) {
      const double v = base - pl.contribution(t, phi);
      stats.record(v);
      return sign_ * v;
    };

    // R(t, phi + pi) = R(-t, phi), so phases in [0, pi) seed the angle search.
    const double pi = std::numbers::pi;
    double best_t = 0.0, best_phi = 0.0, best = sign_ * f;
    for (int k = 0; k < kPhaseSeeds; ++k) {
      const double phi = pi * k / kPhaseSeeds;
      const auto [t, v] = line_min([&](double x) { return objective(x, phi); }, -pi / 2.0, pi);
      if (v < best) {
        best = v;
        best_t = t;
        best_phi = phi;
      }
    }
    for (int round = 0; round < 2 && best_t != 0.0; ++round) {
      const auto [phi, v] = line_min([&](double x) { return objective(best_t, x); }, -pi, 2.0 * pi);
      if (v < best) {
        best = v;
        best_phi = phi;
      }
      const auto [t, v2] = line_min([&](double x) { return objective(x, best_phi); }, -pi / 2.0, pi);
      if (v2 < best) {
        best = v2;
        best_t = t;
      }
    }
    if (!(best < sign_ * f)) return;

    const double c = std::cos(best_t), s = std::sin(best_t);
    const Complex e = std::polar(1.0, best_phi);
    const Eigen::RowVectorXcd ri = w.row(i), rj = w.row(j);
    w.row(i) = c * ri - e * s * rj;
    w.row(j) = std::conj(e) * s * ri + c * rj;
    f = sign_ * best;
  }

  double sign_;
  RealVector lam_;
  ComplexMatrix m_;
  double c0_ = 0.0;
};

/// W (W^dagger W)^{-1/2}: nearest isometry, removes accumulated rounding.
ComplexMatrix polar_orthonormalize(const ComplexMatrix& w) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(w.adjoint() * w);
  const RealVector inv_sqrt = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return w * es.eigenvectors() * inv_sqrt.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

OracleResult run_oracle(const DensityMatrix& rho, const Observable& h, const OracleConfig& cfg,
                        double sign) {
  cfg.validate();
  if (rho.dim() != h.dim()) {
    throw ValidationError(ValidationError::Kind::kShape, 0.0, "oracle: dimension mismatch");
  }
  const SpectralDecomposition spec = eigh(rho);
  const auto r = static_cast<Eigen::Index>(spec.rank());
  if (r == 0) throw ValidationError(ValidationError::Kind::kSupport, 0.0, "oracle: empty support");
  const auto m = static_cast<Eigen::Index>(cfg.ensemble_size.value_or(spec.rank()));
  if (m < r) {
    throw ValidationError(ValidationError::Kind::kShape, 0.0, "oracle: ensemble size below rank");
  }

  const Search search(spec, h, sign);
  Search::Stats stats;
  OracleResult best;
  bool have = false;
  for (int k = 0; k < cfg.restarts; ++k) {
    const std::uint64_t seed = stream_seed(cfg.seed, static_cast<std::uint64_t>(k));
    Rng rng(seed);
    ComplexMatrix w = haar_random_stiefel(m, r, rng).matrix();
    const int sweeps = search.refine(w, cfg, stats);
    w = polar_orthonormalize(w);
    PureEnsemble e = ensemble_from_isometry(StiefelPoint(w), spec);
    const double v = averaged_variance(e, h);
    stats.record(v);
    // Strict comparison keeps the lowest restart index on ties.
    if (!have || sign * v < sign * best.value) {
      have = true;
      best.value = v;
      best.ensemble = std::move(e);
      best.iterations_used = sweeps;
      best.best_restart_seed = seed;
    }
  }
  best.restarts_used = cfg.restarts;
  best.min_evaluated = stats.lo;
  best.max_evaluated = stats.hi;
  best.evaluations = stats.count;
  return best;
}

}  // namespace

OracleResult oracle_min(const DensityMatrix& rho, const Observable& h, const OracleConfig& config) {
  return run_oracle(rho, h, config, 1.0);
}

OracleResult oracle_max(const DensityMatrix& rho, const Observable& h, const OracleConfig& config) {
  return run_oracle(rho, h, config, -1.0);
}

}  // namespace qroof
