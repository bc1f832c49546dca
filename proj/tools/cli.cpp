#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qroof/ensemble.hpp"
#include "qroof/oracle.hpp"
#include "qroof/problem_io.hpp"
#include "qroof/qfi.hpp"
#include "qroof/sampling.hpp"
#include "qroof/sld.hpp"

namespace qroof::cli {

namespace {

using io::json;

class Checks {
 public:
  /// Records `value <= limit`.
  void at_most(const std::string& name, double value, double limit) {
    const bool ok = value <= limit;
    ok_ = ok_ && ok;
    list_.push_back({{"name", name}, {"value", value}, {"limit", limit}, {"passed", ok}});
  }

  bool ok() const { return ok_; }
  const json& list() const { return list_; }

 private:
  json list_ = json::array();
  bool ok_ = true;
};

void add_ensemble_checks(Checks& checks, const std::string& prefix, const PureEnsemble& e,
                         const DensityMatrix& rho) {
  const EnsembleDefects d = ensemble_defects(e, rho);
  checks.at_most(prefix + ".weight_sum", d.weight_sum, 1e-10);
  checks.at_most(prefix + ".unit_norm", d.norm, 1e-12);
  checks.at_most(prefix + ".mixture", d.mixture, 1e-10);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError(ValidationError::Kind::kShape, 0.0, "cannot read input file '" + path + "'");
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<double> parse_list(const std::string& text, const char* name) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(ValidationError::Kind::kParse, 0.0,
                            std::string(name) + ": cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw ValidationError(ValidationError::Kind::kParse, 0.0, std::string(name) + ": empty list");
  return out;
}

/// Σ_k p_k <φ_k|H|φ_k>^2
double mean_square(const PureEnsemble& e, const Observable& h) {
  double s = 0.0;
  for (const auto& m : e.members) {
    const double mu = m.state.dot(h.matrix() * m.state).real();
    s += m.weight * mu * mu;
  }
  return s;
}

/// max_k |p_k (<φ_k|H|φ_k> - mean)|
double member_mean_defect(const PureEnsemble& e, const Observable& h, double mean) {
  double worst = 0.0;
  for (const auto& m : e.members) {
    const double mu = m.state.dot(h.matrix() * m.state).real();
    worst = std::max(worst, std::abs(m.weight * (mu - mean)));
  }
  return worst;
}

struct Options {
  std::string input;
  bool pretty = false;
  std::uint64_t seed = 0;
  int restarts = OracleConfig{}.restarts;
  int max_iterations = OracleConfig{}.max_iterations;
  double convergence_tol = OracleConfig{}.convergence_tol;
  std::size_t ensemble_size = 0;
  std::string family;
  double theta = 0.0;
  double bloch_r = 0.5;
  std::string p0 = "0,1";
  std::string p1 = "1,0";
  double step = 1e-5;
  std::string dims = "2,3";
  int cases = 20;
};

OracleConfig oracle_config(const Options& o, std::uint64_t seed) {
  OracleConfig c;
  c.restarts = o.restarts;
  c.max_iterations = o.max_iterations;
  c.convergence_tol = o.convergence_tol;
  if (o.ensemble_size > 0) c.ensemble_size = o.ensemble_size;
  c.seed = seed;
  return c;
}

json cmd_qfi(const io::Problem& p, Checks& checks) {
  const QfiReport rep = qfi(p.rho, p.h);
  const SpectralDecomposition spec = eigh(p.rho);
  checks.at_most("qfi.upper_bound", rep.F - 4.0 * rep.variance, 1e-9);
  checks.at_most("qfi.z_identity", std::abs(rep.F - rep.F_via_Z), 1e-9 * std::max(1.0, rep.F));
  if (spec.rank() == 1) checks.at_most("qfi.pure_state_equality", std::abs(rep.F - 4.0 * rep.variance), 1e-9);
  return {{"F", rep.F},
          {"I", rep.I},
          {"variance", rep.variance},
          {"F_via_Z", rep.F_via_Z},
          {"rank", spec.rank()},
          {"eigenvalues", std::vector<double>(spec.eigenvalues.data(), spec.eigenvalues.data() + spec.eigenvalues.size())}};
}

json cmd_min_ensemble(const io::Problem& p, Checks& checks) {
  const QfiReport rep = qfi(p.rho, p.h);
  const MinimalEnsemble me = minimal_ensemble(p.rho, p.h);
  const Observable z = build_ZH(eigh(p.rho), p.h);
  const double z2 = (z.matrix() * z.matrix()).trace().real();
  const double avg = averaged_variance(me.ensemble, p.h);
  add_ensemble_checks(checks, "ensemble", me.ensemble, p.rho);
  checks.at_most("convex_roof.attainment", std::abs(avg - rep.I), 1e-9);
  checks.at_most("gamma.orthogonality", me.gammas.orthogonality_defect(), 1e-10);
  checks.at_most("gamma.z_expansion", me.gammas.expansion_defect(z.matrix()), 1e-9);
  checks.at_most("mean_square.tr_z2", std::abs(mean_square(me.ensemble, p.h) - z2), 1e-9);
  const RealVector& a = me.gammas.coefficients;
  return {{"averaged_variance", avg},
          {"I", rep.I},
          {"F", rep.F},
          {"variance", rep.variance},
          {"alpha", std::vector<double>(a.data(), a.data() + a.size())},
          {"ensemble", io::encode_ensemble(me.ensemble)}};
}

json cmd_max_ensemble(const io::Problem& p, Checks& checks) {
  const double var = variance(p.rho, p.h);
  const double mean = expectation(p.rho, p.h);
  const PureEnsemble e = maximal_ensemble(p.rho, p.h);
  const double avg = averaged_variance(e, p.h);
  add_ensemble_checks(checks, "ensemble", e, p.rho);
  checks.at_most("concave_roof.attainment", std::abs(avg - var), 1e-9);
  checks.at_most("member_means", member_mean_defect(e, p.h, mean), 1e-9);
  return {{"averaged_variance", avg}, {"variance", var}, {"mean", mean}, {"ensemble", io::encode_ensemble(e)}};
}

json cmd_oracle(const io::Problem& p, const Options& o, bool maximize, Checks& checks) {
  const QfiReport rep = qfi(p.rho, p.h);
  const OracleConfig cfg = oracle_config(o, o.seed);
  const OracleResult res = maximize ? oracle_max(p.rho, p.h, cfg) : oracle_min(p.rho, p.h, cfg);
  const double target = maximize ? rep.variance : rep.I;
  add_ensemble_checks(checks, "ensemble", res.ensemble, p.rho);
  checks.at_most("oracle.gap", std::abs(res.value - target), 1e-4);
  checks.at_most("soundness.lower", rep.I - res.min_evaluated, 1e-9);
  checks.at_most("soundness.upper", res.max_evaluated - rep.variance, 1e-9);
  return {{"value", res.value},
          {"target", target},
          {"gap", std::abs(res.value - target)},
          {"iterations_used", res.iterations_used},
          {"restarts_used", res.restarts_used},
          {"best_restart_seed", res.best_restart_seed},
          {"evaluations", res.evaluations},
          {"min_evaluated", res.min_evaluated},
          {"max_evaluated", res.max_evaluated},
          {"ensemble", io::encode_ensemble(res.ensemble)}};
}

ParametrizedFamily build_family(const Options& o, std::string& digest_source) {
  if (o.family == "unitary") {
    if (!o.input.empty()) {
      const std::string text = read_file(o.input);
      const io::Problem p = io::parse_problem(text);
      digest_source = text;
      return families::unitary(p.rho, p.h, o.step);
    }
    return families::unitary(families::bloch_x(o.bloch_r), Observable(pauli::z() * 0.5), o.step);
  }
  if (o.family == "linear-classical") {
    return families::linear_classical(parse_list(o.p0, "--p0"), parse_list(o.p1, "--p1"), o.step);
  }
  if (o.family == "constant") {
    if (!o.input.empty()) {
      const std::string text = read_file(o.input);
      digest_source = text;
      return families::constant(io::parse_problem(text).rho, o.step);
    }
    return families::constant(families::bloch_x(o.bloch_r), o.step);
  }
  throw ValidationError(ValidationError::Kind::kShape, 0.0,
                        "unknown family '" + o.family + "' (expected unitary, linear-classical or constant)");
}

json cmd_sld(const ParametrizedFamily& f, const Options& o, Checks& checks) {
  const DensityMatrix rho = f.evaluator(o.theta);
  const ComplexMatrix d = rho_dot(f, o.theta);
  const Observable l = sld(rho, d);
  const double total = (rho.matrix() * l.matrix() * l.matrix()).trace().real();
  const ComplexMatrix resid = l.matrix() * rho.matrix() + rho.matrix() * l.matrix() - 2.0 * d;
  checks.at_most("sld.nonnegative", -total, 1e-12);
  return {{"theta", o.theta},
          {"F_total", total},
          {"rho_dot", io::encode_matrix(d)},
          {"L_theta", io::encode_matrix(l.matrix())},
          {"sld_residual", max_norm(resid)}};
}

json cmd_decompose(const ParametrizedFamily& f, const Options& o, Checks& checks) {
  const SldDecomposition dec = decompose(f, o.theta);
  checks.at_most("decomposition.identity", dec.gap(), 1e-5 * std::max(1.0, dec.F_total));
  checks.at_most("decomposition.classical_nonnegative", -dec.F_classical, 0.0);
  checks.at_most("decomposition.quantum_nonnegative", -dec.F_quantum, 0.0);
  return {{"theta", o.theta},
          {"F_total", dec.F_total},
          {"F_classical", dec.F_classical},
          {"F_quantum", dec.F_quantum},
          {"gap", dec.gap()},
          {"H_theta", io::encode_matrix(dec.H_theta)},
          {"L_theta", io::encode_matrix(dec.L_theta)}};
}

json cmd_verify(const Options& o, Checks& checks) {
  std::vector<Eigen::Index> dims;
  for (const double d : parse_list(o.dims, "--dims")) {
    if (d < 1 || d != static_cast<double>(static_cast<Eigen::Index>(d))) {
      throw ValidationError(ValidationError::Kind::kShape, 0.0, "--dims: entries must be positive integers");
    }
    dims.push_back(static_cast<Eigen::Index>(d));
  }
  if (o.cases < 1) throw ValidationError(ValidationError::Kind::kShape, 0.0, "--cases must be positive");

  struct Worst {
    double closed_min = 0, closed_max = 0, oracle_min = 0, oracle_max = 0, gamma = 0, z_expansion = 0,
           z_identity = 0, mean_square = 0, member_means = 0, mixture = 0, lower = -1e300, upper = -1e300;
  } worst;

  json cases = json::array();
  for (int c = 0; c < o.cases; ++c) {
    const std::uint64_t case_seed = stream_seed(o.seed, static_cast<std::uint64_t>(c));
    Rng rng(case_seed);
    const Eigen::Index dim = dims[static_cast<std::size_t>(c) % dims.size()];
    const Eigen::Index rank = std::min<Eigen::Index>(dim, 1 + static_cast<Eigen::Index>(rng.uniform() * dim));
    const DensityMatrix rho = validate_density(random_density(dim, rank, rng));
    const Observable h(random_hermitian(dim, rng));

    const QfiReport rep = qfi(rho, h);
    const MinimalEnsemble me = minimal_ensemble(rho, h);
    const PureEnsemble mx = maximal_ensemble(rho, h);
    const Observable z = build_ZH(eigh(rho), h);
    const double z2 = (z.matrix() * z.matrix()).trace().real();
    const double mean = expectation(rho, h);
    const OracleConfig cfg = oracle_config(o, case_seed);
    const OracleResult omin = oracle_min(rho, h, cfg);
    const OracleResult omax = oracle_max(rho, h, cfg);

    const double closed_min = std::abs(averaged_variance(me.ensemble, h) - rep.I);
    const double closed_max = std::abs(averaged_variance(mx, h) - rep.variance);
    const double gap_min = std::abs(omin.value - rep.I);
    const double gap_max = std::abs(omax.value - rep.variance);
    const double gamma = me.gammas.orthogonality_defect();
    const double expansion = me.gammas.expansion_defect(z.matrix());
    const double z_identity = std::abs(rep.F - rep.F_via_Z) / std::max(1.0, rep.F);
    const double msq = std::abs(mean_square(me.ensemble, h) - z2);
    const double members = member_mean_defect(mx, h, mean);
    double mixture = 0.0;
    for (const PureEnsemble* e : {&me.ensemble, &mx, &omin.ensemble, &omax.ensemble}) {
      mixture = std::max(mixture, ensemble_defects(*e, rho).mixture);
    }
    const double lower = std::max(rep.I - omin.min_evaluated, rep.I - omax.min_evaluated);
    const double upper = std::max(omin.max_evaluated - rep.variance, omax.max_evaluated - rep.variance);

    worst.closed_min = std::max(worst.closed_min, closed_min);
    worst.closed_max = std::max(worst.closed_max, closed_max);
    worst.oracle_min = std::max(worst.oracle_min, gap_min);
    worst.oracle_max = std::max(worst.oracle_max, gap_max);
    worst.gamma = std::max(worst.gamma, gamma);
    worst.z_expansion = std::max(worst.z_expansion, expansion);
    worst.z_identity = std::max(worst.z_identity, z_identity);
    worst.mean_square = std::max(worst.mean_square, msq);
    worst.member_means = std::max(worst.member_means, members);
    worst.mixture = std::max(worst.mixture, mixture);
    worst.lower = std::max(worst.lower, lower);
    worst.upper = std::max(worst.upper, upper);

    cases.push_back({{"case", c},
                     {"seed", case_seed},
                     {"dim", dim},
                     {"rank", rank},
                     {"I", rep.I},
                     {"variance", rep.variance},
                     {"closed_form_min_gap", closed_min},
                     {"closed_form_max_gap", closed_max},
                     {"oracle_min", omin.value},
                     {"oracle_max", omax.value},
                     {"oracle_min_gap", gap_min},
                     {"oracle_max_gap", gap_max},
                     {"gamma_orthogonality", gamma},
                     {"mean_square_identity", msq}});
  }

  checks.at_most("convex_roof.closed_form", worst.closed_min, 1e-9);
  checks.at_most("concave_roof.closed_form", worst.closed_max, 1e-9);
  checks.at_most("oracle.min_gap", worst.oracle_min, 1e-4);
  checks.at_most("oracle.max_gap", worst.oracle_max, 1e-4);
  checks.at_most("gamma.orthogonality", worst.gamma, 1e-10);
  checks.at_most("gamma.z_expansion", worst.z_expansion, 1e-9);
  checks.at_most("qfi.z_identity", worst.z_identity, 1e-9);
  checks.at_most("mean_square.tr_z2", worst.mean_square, 1e-9);
  checks.at_most("maximal.member_means", worst.member_means, 1e-9);
  checks.at_most("ensembles.mixture", worst.mixture, 1e-10);
  checks.at_most("soundness.lower", worst.lower, 1e-9);
  checks.at_most("soundness.upper", worst.upper, 1e-9);
  return {{"cases", std::move(cases)}, {"dims", o.dims}, {"seed", o.seed}, {"restarts", o.restarts}};
}

std::string join(const std::vector<std::string>& args) {
  std::string s;
  for (const auto& a : args) {
    if (!s.empty()) s += ' ';
    s += a;
  }
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum Fisher information, convex/concave roof ensembles of the variance, and a brute-force roof oracle"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  bool json_flag = false;
  app.add_flag("--json", json_flag, "Compact JSON output (default)");
  app.add_flag("--pretty", o.pretty, "Indented JSON output");

  auto input_cmd = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--input", o.input, "Problem file (dim, rho, H)")->required();
    return sub;
  };
  auto oracle_opts = [&](CLI::App* sub, std::uint64_t& seed) {
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--restarts", o.restarts, "Random restarts");
    sub->add_option("--max-iterations", o.max_iterations, "Sweeps per restart");
    sub->add_option("--tol", o.convergence_tol, "Relative improvement stopping threshold");
  };
  auto family_opts = [&](CLI::App* sub) {
    sub->add_option("--family", o.family, "unitary | linear-classical | constant")->required();
    sub->add_option("--theta", o.theta, "Parameter value")->required();
    sub->add_option("--r", o.bloch_r, "Bloch radius of the built-in qubit state (I + r sigma_x)/2");
    sub->add_option("--input", o.input, "Problem file: rho0 and generator H for 'unitary', rho for 'constant'");
    sub->add_option("--p0", o.p0, "linear-classical: probabilities at theta = 0");
    sub->add_option("--p1", o.p1, "linear-classical: probabilities at theta = 1");
    sub->add_option("--step", o.step, "Central-difference step");
  };

  CLI::App* qfi_cmd = input_cmd("qfi", "Quantum Fisher information and variance");
  CLI::App* min_cmd = input_cmd("min-ensemble", "Closed-form ensemble attaining the convex roof");
  CLI::App* max_cmd = input_cmd("max-ensemble", "Closed-form ensemble attaining the concave roof");
  CLI::App* omin_cmd = input_cmd("oracle-min", "Brute-force minimum of the averaged variance");
  CLI::App* omax_cmd = input_cmd("oracle-max", "Brute-force maximum of the averaged variance");
  std::uint64_t oracle_seed = 0;
  std::uint64_t verify_seed = 7;
  oracle_opts(omin_cmd, oracle_seed);
  oracle_opts(omax_cmd, oracle_seed);
  omin_cmd->add_option("--ensemble-size", o.ensemble_size, "Ensemble size m >= rank");
  omax_cmd->add_option("--ensemble-size", o.ensemble_size, "Ensemble size m >= rank");
  CLI::App* sld_cmd = app.add_subcommand("sld", "Symmetric logarithmic derivative of a family");
  CLI::App* dec_cmd = app.add_subcommand("decompose", "Classical/quantum split of the family QFI");
  family_opts(sld_cmd);
  family_opts(dec_cmd);
  CLI::App* verify_cmd = app.add_subcommand("verify", "Closed forms against the oracle on random cases");
  verify_cmd->add_option("--dims", o.dims, "Comma-separated dimensions");
  verify_cmd->add_option("--cases", o.cases, "Number of random cases");
  oracle_opts(verify_cmd, verify_seed);
  for (CLI::App* sub : {qfi_cmd, min_cmd, max_cmd, omin_cmd, omax_cmd, sld_cmd, dec_cmd, verify_cmd}) {
    sub->fallthrough();
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitValidation;
  }

  const CLI::App* sub = app.get_subcommands().front();
  o.seed = sub == verify_cmd ? verify_seed : oracle_seed;
  const std::string command = sub->get_name();
  Checks checks;
  json doc = {{"command", command}, {"arguments", args}, {"tool_version", kToolVersion}};
  try {
    json results;
    std::string digest_source;
    if (sub == qfi_cmd || sub == min_cmd || sub == max_cmd || sub == omin_cmd || sub == omax_cmd) {
      digest_source = read_file(o.input);
      const io::Problem p = io::parse_problem(digest_source);
      doc["input_digest"] = p.digest;
      if (sub == qfi_cmd) results = cmd_qfi(p, checks);
      else if (sub == min_cmd) results = cmd_min_ensemble(p, checks);
      else if (sub == max_cmd) results = cmd_max_ensemble(p, checks);
      else results = cmd_oracle(p, o, sub == omax_cmd, checks);
    } else if (sub == sld_cmd || sub == dec_cmd) {
      const ParametrizedFamily f = build_family(o, digest_source);
      doc["input_digest"] = io::content_digest(digest_source.empty() ? join(args) : digest_source);
      results = sub == sld_cmd ? cmd_sld(f, o, checks) : cmd_decompose(f, o, checks);
    } else {
      doc["input_digest"] = io::content_digest(join(args));
      results = cmd_verify(o, checks);
    }
    doc["results"] = std::move(results);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitCheckFailed;
  }

  doc["checks"] = checks.list();
  doc["passed"] = checks.ok();
  out << (o.pretty ? doc.dump(2) : doc.dump()) << '\n';
  if (!checks.ok()) {
    for (const auto& c : checks.list()) {
      if (!c["passed"].get<bool>()) err << "check failed: " << c["name"].get<std::string>() << '\n';
    }
    return kExitCheckFailed;
  }
  return kExitOk;
}

}  // namespace qroof::cli
