// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "qroof/ensemble.hpp"
#include "qroof/oracle.hpp"
#include "qroof/qfi.hpp"
#include "qroof/sld.hpp"
#include "test_support.hpp"

#ifndef QROOF_TOOL_PATH
#error "QROOF_TOOL_PATH must name the qroof executable"
#endif

using namespace qroof;
using qroof::testing::Case;
using qroof::testing::diag;

namespace {

constexpr std::uint64_t kSweepSeed = 20240607;

struct Verdict {
  bool passed;
  std::string detail;
};

// Tracks the worst value of a quantity against its limit.
struct Worst {
  double value = 0.0;
  void add(double v) { value = std::max(value, v); }
};

double tr_rho_h2(const Case& c) { return (c.rho.matrix() * c.h.matrix() * c.h.matrix()).trace().real(); }

double member_mean(const PureEnsemble::Member& m, const ComplexMatrix& h) {
  return (m.state.adjoint() * h * m.state)(0, 0).real();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

const std::vector<Case>& sweep200() {
  static const std::vector<Case> cases = qroof::testing::sweep(200, kSweepSeed);
  return cases;
}

Verdict convex_roof_attainment() {
  Worst gap;
  for (const Case& c : sweep200()) {
    const MinimalEnsemble me = minimal_ensemble(c.rho, c.h);
    const double i = qroof::testing::qfi_by_lyapunov(c.rho.matrix(), c.h.matrix()) / 4.0;
    gap.add(std::abs(averaged_variance(me.ensemble, c.h) - i));
  }
  return {gap.value <= 1e-9, "200 cases, max |avg - I| = " + fmt(gap.value) + " (limit 1e-9)"};
}

struct OracleSweep {
  double min_gap = 0.0, max_gap = 0.0;
  double lower_violation = 0.0, upper_violation = 0.0;
  std::uint64_t evaluations = 0;
};

const OracleSweep& oracle_sweep() {
  static const OracleSweep result = [] {
    OracleSweep s;
    for (const Case& c : qroof::testing::sweep(50, kSweepSeed + 1, 2, 3)) {
      const QfiReport q = qfi(c.rho, c.h);
      const OracleResult mn = oracle_min(c.rho, c.h);
      const OracleResult mx = oracle_max(c.rho, c.h);
      s.min_gap = std::max(s.min_gap, std::abs(mn.value - q.I));
      s.max_gap = std::max(s.max_gap, std::abs(mx.value - q.variance));
      for (const OracleResult* r : {&mn, &mx}) {
        s.lower_violation = std::max(s.lower_violation, q.I - r->min_evaluated);
        s.upper_violation = std::max(s.upper_violation, r->max_evaluated - q.variance);
        s.evaluations += r->evaluations;
      }
    }
    return s;
  }();
  return result;
}

Verdict oracle_cross_validation() {
  const OracleSweep& s = oracle_sweep();
  return {s.min_gap <= 1e-4 && s.max_gap <= 1e-4,
          "50 cases, max |min - I| = " + fmt(s.min_gap) + ", max |max - var| = " + fmt(s.max_gap) + " (limit 1e-4)"};
}

Verdict lower_bound_soundness() {
  const OracleSweep& s = oracle_sweep();
  return {s.lower_violation <= 1e-9 && s.upper_violation <= 1e-9,
          std::to_string(s.evaluations) + " evaluations, worst I - value = " + fmt(s.lower_violation) +
              ", worst value - var = " + fmt(s.upper_violation) + " (limit 1e-9)"};
}

Verdict identity_suite() {
  Worst z_identity, orthogonality, mean_square;
  for (const Case& c : sweep200()) {
    const SpectralDecomposition spec = eigh(c.rho);
    const ComplexMatrix z = build_ZH(spec, c.h).matrix();
    const double tr_z2 = (z * z).trace().real();
    z_identity.add(std::abs(qfi(c.rho, c.h).I - (tr_rho_h2(c) - tr_z2)));

    const MinimalEnsemble me = minimal_ensemble(c.rho, c.h);
    // Trace orthogonality recomputed from the operators themselves.
    const auto& g = me.gammas;
    for (std::size_t k = 0; k < g.operators.size(); ++k) {
      for (std::size_t j = 0; j < g.operators.size(); ++j) {
        const double want = k == j ? g.weights[static_cast<Eigen::Index>(k)] : 0.0;
        orthogonality.add(std::abs((g.operators[k] * g.operators[j]).trace() - want));
      }
    }
    double sum = 0.0;
    for (const auto& m : me.ensemble.members) {
      const double mean = member_mean(m, c.h.matrix());
      sum += m.weight * mean * mean;
    }
    mean_square.add(std::abs(sum - tr_z2));
  }
  return {z_identity.value <= 1e-9 && orthogonality.value <= 1e-10 && mean_square.value <= 1e-9,
          "200 cases, I vs Tr rho H^2 - Tr Z^2: " + fmt(z_identity.value) + " (1e-9), Gamma orthogonality: " +
              fmt(orthogonality.value) + " (1e-10), sum u<H>^2 vs Tr Z^2: " + fmt(mean_square.value) + " (1e-9)"};
}

Verdict concave_roof_attainment() {
  Worst gap, member;
  for (const Case& c : sweep200()) {
    const PureEnsemble e = maximal_ensemble(c.rho, c.h);
    const double mean = (c.rho.matrix() * c.h.matrix()).trace().real();
    gap.add(std::abs(averaged_variance(e, c.h) - (tr_rho_h2(c) - mean * mean)));
    for (const auto& m : e.members) {
      // Unnormalized member v_k |V_k>: <V_k|H|V_k> = v_k Tr rho H.
      member.add(std::abs(m.weight * member_mean(m, c.h.matrix()) - m.weight * mean));
    }
  }
  return {gap.value <= 1e-9 && member.value <= 1e-9,
          "200 cases, max |avg - var| = " + fmt(gap.value) + ", max member mean defect = " + fmt(member.value) +
              " (limit 1e-9)"};
}

Verdict pure_state_equality() {
  Worst gap;
  int count = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Case c = qroof::testing::random_case(2 + static_cast<Eigen::Index>(s % 5), 1, stream_seed(kSweepSeed + 2, s));
    const QfiReport q = qfi(c.rho, c.h);
    gap.add(std::abs(q.F - 4.0 * q.variance));
    ++count;
  }
  return {gap.value <= 1e-9, std::to_string(count) + " rank-1 cases, max |F - 4 var| = " + fmt(gap.value) + " (limit 1e-9)"};
}

Verdict bounds_and_structure() {
  double bound_excess = -1.0;
  Worst convexity, covariance, shift;
  for (const Case& c : sweep200()) {
    const QfiReport q = qfi(c.rho, c.h);
    bound_excess = std::max(bound_excess, q.F - 4.0 * q.variance);
  }
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(stream_seed(kSweepSeed + 3, s));
    const Eigen::Index dim = 2 + static_cast<Eigen::Index>(s % 5);
    const ComplexMatrix r1 = random_density(dim, 1 + static_cast<Eigen::Index>(s % static_cast<std::uint64_t>(dim)), rng);
    const ComplexMatrix r2 = random_density(dim, 1 + static_cast<Eigen::Index>((s / 5) % static_cast<std::uint64_t>(dim)), rng);
    const Observable h(random_hermitian(dim, rng));
    const double p = rng.uniform();
    const double lhs = qfi(validate_density(p * r1 + (1.0 - p) * r2), h).F;
    const double rhs = p * qfi(validate_density(r1), h).F + (1.0 - p) * qfi(validate_density(r2), h).F;
    convexity.add(lhs - rhs);

    const DensityMatrix rho = validate_density(r1);
    const double f = qfi(rho, h).F;
    const ComplexMatrix u = random_unitary(dim, rng);
    covariance.add(std::abs(qfi(validate_density(u * r1 * u.adjoint()), Observable(u * h.matrix() * u.adjoint())).F - f));
    const double c = 10.0 * rng.uniform() - 5.0;
    shift.add(std::abs(qfi(rho, Observable(h.matrix() + c * ComplexMatrix::Identity(dim, dim))).F - f));
  }
  const bool ok = bound_excess <= 1e-9 && convexity.value <= 1e-9 && covariance.value <= 1e-9 && shift.value <= 1e-9;
  return {ok, "max F - 4 var = " + fmt(bound_excess) + ", convexity excess over 100 mixtures = " + fmt(convexity.value) +
                  ", covariance = " + fmt(covariance.value) + ", shift = " + fmt(shift.value) + " (limit 1e-9)"};
}

// rho(theta) = U diag(p(theta)) U^dagger with U = exp(-i G theta), p linear in theta.
ParametrizedFamily mixed_family(Eigen::Index dim, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(random_hermitian(dim, rng));
  RealVector p0(dim), p1(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    p0[k] = 1.0 + 2.0 * static_cast<double>(k) + rng.uniform();
    p1[k] = 1.0 + 2.0 * static_cast<double>(k) + rng.uniform();
  }
  p0 /= p0.sum();
  p1 /= p1.sum();
  const ComplexMatrix v = es.eigenvectors();
  const RealVector d = es.eigenvalues();
  ParametrizedFamily f;
  f.evaluator = [=](double theta) {
    ComplexVector ph(dim);
    for (Eigen::Index k = 0; k < dim; ++k) ph[k] = std::polar(1.0, -d[k] * theta);
    const ComplexMatrix u = v * ph.asDiagonal() * v.adjoint();
    const RealVector p = (1.0 - theta) * p0 + theta * p1;
    return validate_density(u * p.cast<Complex>().asDiagonal() * u.adjoint());
  };
  return f;
}

Verdict sld_decomposition() {
  const SldDecomposition rot =
      decompose(families::unitary(families::bloch_x(0.5), Observable(0.5 * pauli::z())), 0.0);
  const SldDecomposition cls = decompose(families::linear_classical({0.0, 1.0}, {1.0, 0.0}), 0.25);
  const bool rot_ok = std::abs(rot.F_total - 0.25) <= 1e-5 && rot.F_classical <= 1e-8;
  const bool cls_ok = std::abs(cls.F_total - 16.0 / 3.0) <= 1e-4 && cls.F_quantum <= 1e-6;
  double worst_rel = 0.0;
  int families_checked = 0;
  for (Eigen::Index dim = 2; dim <= 3; ++dim) {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const SldDecomposition d = decompose(mixed_family(dim, stream_seed(kSweepSeed + 4 + static_cast<std::uint64_t>(dim), s)), 0.3);
      worst_rel = std::max(worst_rel, d.gap() / std::max(1.0, d.F_total));
      ++families_checked;
    }
  }
  return {rot_ok && cls_ok && worst_rel <= 1e-5,
          "rotating F_total = " + fmt(rot.F_total) + " F_c = " + fmt(rot.F_classical) + "; classical F_total = " +
              fmt(cls.F_total) + " F_q = " + fmt(cls.F_quantum) + "; " + std::to_string(families_checked) +
              " mixed families, worst relative gap = " + fmt(worst_rel) + " (limit 1e-5)"};
}

std::pair<int, std::string> capture(const std::string& command) {
  std::string out;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return {-1, out};
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  return {status, out};
}

Verdict determinism() {
  const std::string cmd = std::string("\"") + QROOF_TOOL_PATH + "\" verify --seed 7 --json";
  const auto [s1, out1] = capture(cmd);
  const auto [s2, out2] = capture(cmd);
  const bool ok = s1 == 0 && s2 == 0 && !out1.empty() && out1 == out2;
  return {ok, "two runs of `qroof verify --seed 7 --json`: " + std::to_string(out1.size()) + " bytes, " +
                  (out1 == out2 ? "identical" : "different") + ", exit " + std::to_string(s1) + "/" +
                  std::to_string(s2)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"1 convex-roof attainment", convex_roof_attainment},
      {"2 oracle cross-validation", oracle_cross_validation},
      {"3 lower-bound soundness", lower_bound_soundness},
      {"4 identity suite", identity_suite},
      {"5 concave-roof attainment", concave_roof_attainment},
      {"6 pure-state equality", pure_state_equality},
      {"7 bounds and structure", bounds_and_structure},
      {"8 SLD decomposition", sld_decomposition},
      {"9 verify determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v{false, ""};
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.passed) ++failures;
    std::ostringstream t;
    t.precision(2);
    t << std::fixed << secs;
    std::cout << (v.passed ? "PASS" : "FAIL") << "  " << name << ": " << v.detail << " [" << t.str() << " s]"
              << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
