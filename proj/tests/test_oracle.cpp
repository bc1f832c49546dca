#include <gtest/gtest.h>

#include "qroof/oracle.hpp"
#include "qroof/qfi.hpp"
#include "test_support.hpp"

using namespace qroof;
using qroof::testing::diag;

namespace {

DensityMatrix mixed_qubit() { return validate_density(diag({0.75, 0.25})); }

}  // namespace

TEST(HaarStiefel, OneByOneIsPhase) {
  Rng rng(1);
  const StiefelPoint w = haar_random_stiefel(1, 1, rng);
  EXPECT_NEAR(std::abs(w.matrix()(0, 0)), 1.0, 1e-15);
  const DensityMatrix rho = validate_density(diag({1.0}));
  const PureEnsemble e = ensemble_from_isometry(w, eigh(rho));
  ASSERT_EQ(e.size(), 1u);
  EXPECT_NEAR(e.members[0].weight, 1.0, 1e-15);
}

TEST(HaarStiefel, SeededUnitaryIsReproducible) {
  Rng a(2024), b(2024);
  const StiefelPoint w1 = haar_random_stiefel(2, 2, a);
  const StiefelPoint w2 = haar_random_stiefel(2, 2, b);
  EXPECT_EQ(w1.matrix(), w2.matrix());
  EXPECT_LE(orthonormality_defect(w1.matrix()), 1e-12);
}

TEST(HaarStiefel, RectangularOrthonormal) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    const StiefelPoint w = haar_random_stiefel(4, 2, rng);
    EXPECT_EQ(w.rows(), 4);
    EXPECT_EQ(w.cols(), 2);
    EXPECT_LE(orthonormality_defect(w.matrix()), 1e-12);
  }
}

TEST(HaarStiefel, RejectsNonIsometry) {
  EXPECT_THROW(StiefelPoint(ComplexMatrix::Ones(2, 2)), ValidationError);
}

TEST(EnsembleFromIsometry, IdentityGivesEigenensemble) {
  const SpectralDecomposition s = eigh(mixed_qubit());
  const PureEnsemble e = ensemble_from_isometry(StiefelPoint(ComplexMatrix::Identity(2, 2)), s);
  ASSERT_EQ(e.size(), 2u);
  EXPECT_NEAR(e.members[0].weight, 0.75, 1e-15);
  EXPECT_NEAR(e.members[1].weight, 0.25, 1e-15);
  EXPECT_NEAR(std::abs(e.members[0].state[0]), 1.0, 1e-15);
}

TEST(EnsembleFromIsometry, MinimalUnitaryReproducesMinimalEnsemble) {
  for (const auto& c : qroof::testing::sweep(30, 555)) {
    const MinimalEnsemble me = minimal_ensemble(c.rho, c.h);
    const PureEnsemble e = ensemble_from_isometry(StiefelPoint(me.unitary, 1e-10), eigh(c.rho));
    ASSERT_EQ(e.size(), me.ensemble.size());
    for (std::size_t k = 0; k < e.size(); ++k) {
      EXPECT_NEAR(e.members[k].weight, me.ensemble.members[k].weight, 1e-10);
      EXPECT_NEAR(std::abs(e.members[k].state.dot(me.ensemble.members[k].state)), 1.0, 1e-10);
    }
    EXPECT_NEAR(averaged_variance(e, c.h), averaged_variance(me.ensemble, c.h), 1e-10);
  }
}

TEST(EnsembleFromIsometry, TallIsometryMixesToRho) {
  Rng rng(9);
  const DensityMatrix rho = validate_density(random_density(4, 2, rng));
  const StiefelPoint w = haar_random_stiefel(3, 2, rng);
  const PureEnsemble e = ensemble_from_isometry(w, eigh(rho));
  EXPECT_EQ(e.size(), 3u);
  EXPECT_NO_THROW(check_ensemble(e, rho));
}

TEST(Oracle, QubitExamples) {
  const OracleResult mn_x = oracle_min(mixed_qubit(), Observable(pauli::x()));
  EXPECT_NEAR(mn_x.value, 0.25, 1e-6);
  const OracleResult mn_z = oracle_min(mixed_qubit(), Observable(pauli::z()));
  EXPECT_NEAR(mn_z.value, 0.0, 1e-8);
  const OracleResult mx_z = oracle_max(mixed_qubit(), Observable(pauli::z()));
  EXPECT_NEAR(mx_z.value, 0.75, 1e-6);
  for (const OracleResult* r : {&mn_x, &mn_z, &mx_z}) {
    EXPECT_NO_THROW(check_ensemble(r->ensemble, mixed_qubit()));
  }
}

// Brute-force grid over all 2-member rotations of the eigen-ensemble.
TEST(Oracle, MatchesQubitGrid) {
  for (std::uint64_t s = 0; s < 6; ++s) {
    Rng rng(stream_seed(808, s));
    const double l0 = 0.5 + 0.5 * rng.uniform();
    const ComplexMatrix h = random_hermitian(2, rng);
    const DensityMatrix rho = validate_density(diag({l0, 1.0 - l0}));
    const auto [lo, hi] = qroof::testing::qubit_roof_grid(l0, 1.0 - l0, h);
    OracleConfig cfg;
    cfg.restarts = 8;
    const double mn = oracle_min(rho, Observable(h), cfg).value;
    const double mx = oracle_max(rho, Observable(h), cfg).value;
    // The grid can only overshoot the minimum and undershoot the maximum.
    EXPECT_LE(mn, lo + 1e-12);
    EXPECT_GE(mx, hi - 1e-12);
    EXPECT_NEAR(mn, lo, 1e-3);
    EXPECT_NEAR(mx, hi, 1e-3);
  }
}

TEST(Oracle, DeterministicForSeed) {
  Rng rng(5);
  const DensityMatrix rho = validate_density(random_density(3, 2, rng));
  const Observable h(random_hermitian(3, rng));
  OracleConfig cfg;
  cfg.restarts = 6;
  cfg.seed = 77;
  const OracleResult a = oracle_min(rho, h, cfg);
  const OracleResult b = oracle_min(rho, h, cfg);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.best_restart_seed, b.best_restart_seed);
  EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(Oracle, ResultValueMatchesEnsemble) {
  Rng rng(6);
  const DensityMatrix rho = validate_density(random_density(3, 3, rng));
  const Observable h(random_hermitian(3, rng));
  OracleConfig cfg;
  cfg.restarts = 4;
  for (const OracleResult& r : {oracle_min(rho, h, cfg), oracle_max(rho, h, cfg)}) {
    EXPECT_NEAR(averaged_variance(r.ensemble, h), r.value, 1e-12);
    EXPECT_NO_THROW(check_ensemble(r.ensemble, rho));
  }
}

TEST(Oracle, LargerEnsembleDoesNotBeatRoof) {
  for (const auto& c : qroof::testing::sweep(10, 31, 2, 3)) {
    OracleConfig cfg;
    cfg.restarts = 8;
    cfg.ensemble_size = static_cast<std::size_t>(c.rank) + 2;
    const OracleResult r = oracle_min(c.rho, c.h, cfg);
    const double i = qfi(c.rho, c.h).I;
    EXPECT_GE(r.value, i - 1e-6);
    EXPECT_GE(r.min_evaluated, i - 1e-9);
    EXPECT_EQ(r.ensemble.size() <= *cfg.ensemble_size, true);
  }
}

TEST(Oracle, EvaluationsStayInsideSandwich) {
  for (const auto& c : qroof::testing::sweep(15, 47, 2, 4)) {
    OracleConfig cfg;
    cfg.restarts = 6;
    const QfiReport q = qfi(c.rho, c.h);
    for (const OracleResult& r : {oracle_min(c.rho, c.h, cfg), oracle_max(c.rho, c.h, cfg)}) {
      EXPECT_GE(r.min_evaluated, q.I - 1e-9);
      EXPECT_LE(r.max_evaluated, q.variance + 1e-9);
      EXPECT_GT(r.evaluations, 0u);
    }
  }
}

TEST(OracleConfig, RejectsBadFields) {
  const DensityMatrix rho = mixed_qubit();
  OracleConfig cfg;
  cfg.restarts = 0;
  EXPECT_THROW(oracle_min(rho, Observable(pauli::x()), cfg), ValidationError);
  cfg = {};
  cfg.ensemble_size = 1;
  EXPECT_THROW(oracle_min(rho, Observable(pauli::x()), cfg), ValidationError);
}
