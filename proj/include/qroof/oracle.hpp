#pragma once

#include <cstdint>
#include <optional>

#include "qroof/ensemble.hpp"
#include "qroof/sampling.hpp"

namespace qroof {

/// m x r matrix with orthonormal columns.
class StiefelPoint {
 public:
  /// Validates ||W^dagger W - I||_max <= tol.
  explicit StiefelPoint(ComplexMatrix w, double tol = 1e-12);

  const ComplexMatrix& matrix() const noexcept { return w_; }
  Eigen::Index rows() const noexcept { return w_.rows(); }
  Eigen::Index cols() const noexcept { return w_.cols(); }

 private:
  ComplexMatrix w_;
};

double orthonormality_defect(const ComplexMatrix& w);

/// Haar-distributed isometry (see haar_isometry).
StiefelPoint haar_random_stiefel(Eigen::Index m, Eigen::Index r, Rng& rng);

/// Member k is sum_a W_{ka} sqrt(l_a) |psi_a>, weight its squared norm.
PureEnsemble ensemble_from_isometry(const StiefelPoint& w, const SpectralDecomposition& spec);

struct OracleConfig {
  int restarts = 64;
  int max_iterations = 2000;
  double convergence_tol = 1e-10;
  std::optional<std::size_t> ensemble_size;  // defaults to rank(rho)
  std::uint64_t seed = 0;

  /// Throws ValidationError on non-positive fields.
  void validate() const;
};

struct OracleResult {
  double value = 0.0;
  PureEnsemble ensemble;
  int iterations_used = 0;  // sweeps of the winning restart
  int restarts_used = 0;
  std::uint64_t best_restart_seed = 0;
  // Extremes of the objective over every ensemble evaluated in any restart.
  double min_evaluated = 0.0;
  double max_evaluated = 0.0;
  std::uint64_t evaluations = 0;
};

/// Smallest averaged variance of H found over ensembles of rho.
OracleResult oracle_min(const DensityMatrix& rho, const Observable& h, const OracleConfig& config = {});
/// Largest averaged variance of H found over ensembles of rho.
OracleResult oracle_max(const DensityMatrix& rho, const Observable& h, const OracleConfig& config = {});

}  // namespace qroof
