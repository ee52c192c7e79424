#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "envar/collapse.hpp"
#include "envar/envariance.hpp"
#include "envar/grothendieck.hpp"
#include "envar/tools/scenarios.hpp"

namespace envar::tools {
namespace {

using nlohmann::json;

class CheckList {
 public:
  explicit CheckList(const ScenarioConfig& c) : override_(c.tolerance) {}

  /// A floating-point residual; `tolerance` yields to --tolerance.
  void residual(std::string name, double value, double tolerance) {
    const double tol = override_.value_or(tolerance);
    checks_.push_back({std::move(name), std::isfinite(value) && value <= tol, value, tol});
  }

  /// An integer count that must be zero; never loosened.
  void exact(std::string name, std::size_t mismatches) {
    checks_.push_back({std::move(name), mismatches == 0, static_cast<double>(mismatches), 0.0});
  }

  void unitary_maps(double worst_defect) {
    residual("evolution maps unitary", worst_defect, kDefaultTolerances.unitarity);
  }

  void global_purity(double worst_entropy) {
    residual("global state entropy stays zero", worst_entropy, 1e-9);
  }

  std::vector<Check> take() { return std::move(checks_); }

 private:
  std::optional<double> override_;
  std::vector<Check> checks_;
};

std::size_t pick(std::mt19937_64& rng, const std::vector<std::int64_t>& choices) {
  std::uniform_int_distribution<std::size_t> d(0, choices.size() - 1);
  return static_cast<std::size_t>(choices[d(rng)]);
}

// -- grothendieck-int -------------------------------------------------------

void run_grothendieck(const ScenarioConfig& c, RunReport& r, CheckList& checks) {
  namespace g = grothendieck;
  const g::NaturalAddition m;
  const auto top = static_cast<std::uint64_t>(c.range);
  const auto signed_value = [](const g::MonoidPair<std::uint64_t>& p) {
    return static_cast<std::int64_t>(p.pos) - static_cast<std::int64_t>(p.neg);
  };
  std::size_t eq_bad = 0, add_bad = 0, neg_bad = 0, count = 0;
  for (std::uint64_t a = 0; a <= top; ++a) {
    for (std::uint64_t b = 0; b <= top; ++b) {
      const g::GroupElement<g::NaturalAddition> x({a, b}, m);
      const auto x_value = static_cast<std::int64_t>(a) - static_cast<std::int64_t>(b);
      if (signed_value(g::group_neg(x).representative()) != -x_value) ++neg_bad;
      for (std::uint64_t cc = 0; cc <= top; ++cc) {
        for (std::uint64_t d = 0; d <= top; ++d) {
          const g::GroupElement<g::NaturalAddition> y({cc, d}, m);
          const auto y_value = static_cast<std::int64_t>(cc) - static_cast<std::int64_t>(d);
          if (g::equivalent(x, y) != (x_value == y_value)) ++eq_bad;
          if (signed_value(g::group_add(x, y).representative()) != x_value + y_value) ++add_bad;
          ++count;
        }
      }
    }
  }
  checks.exact("pair equivalence matches integer equality", eq_bad);
  checks.exact("group addition matches integer sum", add_bad);
  checks.exact("group negation matches integer negation", neg_bad);
  r.results["quadruples"] = count;
  r.results["pairs"] = (top + 1) * (top + 1);
}

// -- envariance-restore -----------------------------------------------------

void run_restore(const ScenarioConfig& c, RunReport& r, CheckList& checks) {
  double worst_phase = 0.0, worst_undo = 0.0, worst_defect = 0.0;
  std::size_t failures = 0;
  std::map<std::string, std::size_t> shapes;
  for (std::int64_t t = 0; t < c.trials; ++t) {
    const std::uint64_t seed = derive_seed(c.seed, static_cast<std::uint64_t>(t));
    std::mt19937_64 rng(seed);
    const std::size_t dp = pick(rng, c.dims);
    const std::size_t dn = pick(rng, c.dims);
    ++shapes[std::to_string(dp) + "x" + std::to_string(dn)];
    const JointPairState psi(random_state(Dims{dp, dn}, derive_seed(seed, 1)));
    const std::size_t rank = psi.schmidt().rank();
    PhaseSpec spec;
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_int_distribution<std::int64_t> shift(-3, 3);
    for (std::size_t k = 0; k < rank; ++k) {
      spec.phases.push_back(phase(rng));
      spec.integer_shifts.push_back(shift(rng));
    }
    try {
      const auto [u_p, u_n] = synthesize_envariant(psi, spec);
      const Eigen::VectorXcd& a = psi.joint().amplitudes();
      worst_phase = std::max(worst_phase, (apply_bipartite(a, u_p.matrix(), u_n.matrix()) - a).norm());
      worst_defect = std::max({worst_defect, u_p.unitarity_defect(), u_n.unitarity_defect()});

      const Operator sampled = sample_envariant_unitary(psi, derive_seed(seed, 2));
      const WitnessSet undo = undo_on_n(psi, sampled);
      worst_undo = std::max(worst_undo, undo.residual);
      worst_defect = std::max({worst_defect, sampled.unitarity_defect(), undo.u_n.unitarity_defect()});
    } catch (const Error&) {
      ++failures;
    }
  }
  checks.exact("every trial produced a witness", failures);
  checks.residual("phase-pair restoration residual", worst_phase, 1e-9);
  checks.residual("sampled envariant restoration residual", worst_undo, 1e-9);
  checks.unitary_maps(worst_defect);
  r.results["trials"] = c.trials;
  r.results["shapes"] = shapes;
  r.results["max_phase_residual"] = worst_phase;
  r.results["max_sampled_residual"] = worst_undo;
}

// -- equiv-laws -------------------------------------------------------------

void run_laws(const ScenarioConfig& c, RunReport& r, CheckList& checks) {
  double refl = 0.0, sym = 0.0, trans = 0.0, defect = 0.0;
  std::size_t unrelated = 0, failures = 0;
  for (std::int64_t t = 0; t < c.trials; ++t) {
    const std::uint64_t seed = derive_seed(c.seed, static_cast<std::uint64_t>(t));
    std::mt19937_64 rng(seed);
    const std::size_t dp = pick(rng, c.dims);
    const std::size_t dn = pick(rng, c.dims);
    try {
      const JointPairState x1(random_state(Dims{dp, dn}, derive_seed(seed, 1)));
      const JointPairState x2 = related_state(x1, derive_seed(seed, 2));
      const JointPairState x3 = related_state(x2, derive_seed(seed, 3));
      const StateVector xi = random_state(2, derive_seed(seed, 4));
      const StateVector eta = random_state(2, derive_seed(seed, 5));

      const EquivalenceVerdict self = pair_equivalent(x1, x1, 1, derive_seed(seed, 6));
      if (!self.related) ++unrelated;
      for (const auto& w : self.witnesses) refl = std::max(refl, w.residual);

      const Link first = Link::make(x1, x2, xi, stabilizer_unitary(xi, derive_seed(seed, 7)));
      const Link second = Link::make(x2, x3, eta, stabilizer_unitary(eta, derive_seed(seed, 8)));
      const WitnessSet back = symmetry_witness(first, first.sample_admissible_p(derive_seed(seed, 9)).adjoint());
      sym = std::max(sym, back.residual);
      // Every reduced p state in the chain is the same, so one envariant W_p
      // is admissible for both links.
      const Operator w_p = sample_envariant_unitary(x1, derive_seed(seed, 10));
      const WitnessSet chained = transitivity_witness(first, second, w_p);
      trans = std::max(trans, chained.residual);
      if (!pair_equivalent(x1, x3, 1, derive_seed(seed, 11)).related) ++unrelated;

      defect = std::max({defect, back.u_p.unitarity_defect(), back.u_n.unitarity_defect(),
                         chained.u_p.unitarity_defect(), chained.u_n.unitarity_defect(),
                         chained.u_ancilla->unitarity_defect()});
    } catch (const Error&) {
      ++failures;
    }
  }
  checks.exact("every trial produced its witnesses", failures);
  checks.exact("related states judged related", unrelated);
  checks.residual("reflexivity witness residual", refl, 1e-9);
  checks.residual("symmetry witness residual", sym, 1e-9);
  checks.residual("transitivity witness residual", trans, 1e-9);
  checks.unitary_maps(defect);
  r.results["trials"] = c.trials;
  r.results["max_reflexivity_residual"] = refl;
  r.results["max_symmetry_residual"] = sym;
  r.results["max_transitivity_residual"] = trans;
}

// -- born -------------------------------------------------------------------

std::string fraction(const collapse::Rational& q) {
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

void run_born(const ScenarioConfig& c, RunReport& r, CheckList& checks) {
  std::optional<collapse::RationalWeights> weights;
  if (!c.weights.empty()) {
    const std::int64_t sum = std::accumulate(c.weights.begin(), c.weights.end(), std::int64_t{0});
    weights.emplace(c.weights, sum);
  } else {
    const auto approx = collapse::approximate_weights(c.probabilities, *c.denominator);
    weights.emplace(approx.weights);
    r.results["approximation_error"] = approx.max_error;
  }
  const collapse::BornResult born = collapse::born_from_envariance(*weights);
  const auto big_m = static_cast<std::size_t>(weights->denominator());

  collapse::Rational total(0);
  for (const auto& p : born.probabilities) total += p;
  checks.exact("probabilities sum to one", total == collapse::Rational(1) ? 0 : 1);

  // Count fine-grained branches per outcome directly from the state.
  std::vector<std::size_t> branch_count(weights->size(), 0);
  const Eigen::VectorXcd& amps = born.fine_grained.amplitudes();
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    if (std::abs(amps(i)) > 1e-6) ++branch_count[unflatten(static_cast<std::size_t>(i), born.register_dims)[0]];
  }
  std::size_t counted_bad = 0;
  for (std::size_t k = 0; k < branch_count.size(); ++k) {
    const collapse::Rational counted(static_cast<std::int64_t>(branch_count[k]), static_cast<std::int64_t>(big_m));
    if (counted != born.probabilities[k]) ++counted_bad;
  }
  checks.exact("probabilities equal branch-count fractions", counted_bad);

  std::vector<double> sorted;
  for (const auto& p : born.probabilities) sorted.push_back(boost::rational_cast<double>(p));
  std::sort(sorted.rbegin(), sorted.rend());
  double schmidt_gap = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    schmidt_gap = std::max(schmidt_gap, std::abs(sorted[k] - born.squared_schmidt(static_cast<Eigen::Index>(k))));
  }
  checks.residual("probabilities equal squared Schmidt coefficients", schmidt_gap, 1e-12);
  checks.residual("fine-grained amplitudes equal 1/sqrt(M)", born.amplitude_deviation, 1e-12);
  checks.residual("no amplitude outside the fine-grained branches", born.stray_norm, 1e-12);
  double worst = 0.0;
  for (const auto& t : born.transpositions) worst = std::max(worst, t.residual);
  checks.residual("branch transpositions undone on the environment", worst, 1e-9);
  checks.unitary_maps(born.audit.max_unitarity_defect());
  checks.global_purity(born.audit.max_global_entropy());

  json probabilities = json::array();
  for (const auto& p : born.probabilities) probabilities.push_back(fraction(p));
  r.results["probabilities"] = probabilities;
  r.results["weights"] = weights->counts();
  r.results["denominator"] = weights->denominator();
  r.results["squared_schmidt"] = std::vector<double>(born.squared_schmidt.begin(), born.squared_schmidt.end());
  r.results["transpositions"] = born.transpositions.size();
  r.results["max_transposition_residual"] = worst;
}

// -- darwinism --------------------------------------------------------------

void run_darwinism(const ScenarioConfig& c, RunReport& r, CheckList& checks) {
  const auto n = static_cast<std::size_t>(c.env_qubits);
  const collapse::BranchingState state =
      c.state == "ghz" ? collapse::ghz_branching(n)
                       : collapse::premeasure_imperfect(StateVector(Eigen::VectorXcd::Ones(2)), n, c.theta);
  const auto samples = static_cast<std::size_t>(c.samples_per_size);
  const collapse::MutualInformationCurve curve = collapse::darwinism_curve(state, samples, c.seed);
  const double hs = curve.system_entropy;

  checks.residual("I(S:F) vanishes for the empty fragment", std::abs(curve.points.front().mean_information), 1e-9);
  double bound = 0.0;
  for (const auto& p : curve.points) {
    bound = std::max({bound, -p.mean_information, p.mean_information - 2.0 * hs});
  }
  checks.residual("0 <= I(S:F) <= 2 H(S)", bound, 1e-9);

  // Complementary fragments, every subset up to 2^8, otherwise a seeded sample.
  const std::size_t subsets = std::size_t{1} << n;
  std::vector<std::size_t> masks;
  if (n <= 8) {
    for (std::size_t s = 0; s < subsets; ++s) masks.push_back(s);
  } else {
    std::mt19937_64 rng(derive_seed(c.seed, n + 1));
    std::uniform_int_distribution<std::size_t> d(0, subsets - 1);
    for (int i = 0; i < 256; ++i) masks.push_back(d(rng));
  }
  double complement = 0.0;
  for (std::size_t s : masks) {
    std::vector<std::size_t> inside, outside;
    for (std::size_t e = 0; e < n; ++e) ((s >> e) & 1 ? inside : outside).push_back(e);
    const double sum = collapse::mutual_information(state, inside) + collapse::mutual_information(state, outside);
    complement = std::max(complement, std::abs(sum - 2.0 * hs));
  }
  checks.residual("I(S:F) + I(S:rest) = 2 H(S)", complement, 1e-9);

  if (c.state == "ghz") {
    double plateau = 0.0;
    for (const auto& p : curve.points) {
      if (p.fragment_size == 0) continue;
      const double expected = p.fragment_size < n ? hs : 2.0 * hs;
      plateau = std::max(plateau, std::abs(p.mean_information - expected));
    }
    checks.residual("plateau at H(S) below the full environment", plateau, 1e-9);
  } else {
    double drop = 0.0;
    for (std::size_t f = 1; f < curve.points.size(); ++f) {
      drop = std::max(drop, curve.points[f - 1].mean_information - curve.points[f].mean_information);
    }
    checks.residual("mean curve nondecreasing", drop, 1e-9);
  }

  const double redundancy = collapse::redundancy(curve, c.delta);
  std::optional<std::size_t> f_delta;
  for (const auto& p : curve.points) {
    if (p.fragment_size >= 1 && !f_delta && p.mean_information >= (1.0 - c.delta) * hs && hs > 1e-12) {
      f_delta = p.fragment_size;
    }
  }
  const double scanned = f_delta ? static_cast<double>(n) / static_cast<double>(*f_delta) : 0.0;
  checks.residual("redundancy matches a scan of the curve", std::abs(redundancy - scanned), 1e-12);
  checks.unitary_maps(state.audit.max_unitarity_defect());
  checks.global_purity(state.audit.max_global_entropy());

  std::ostringstream csv;
  collapse::write_curve_csv(csv, curve);
  r.files.emplace_back("darwinism.csv", csv.str());
  r.artifacts.push_back("darwinism.csv");

  json points = json::array();
  for (const auto& p : curve.points) {
    points.push_back({{"f", p.fragment_size}, {"mean_I_bits", p.mean_information}, {"samples", p.samples}});
  }
  r.results["curve"] = points;
  r.results["H_S"] = hs;
  r.results["redundancy"] = redundancy;
  r.results["f_delta"] = f_delta ? json(*f_delta) : json(nullptr);
  r.results["record_overlap"] = state.record_overlap;
}

// -- nohide -----------------------------------------------------------------

void run_nohide(const ScenarioConfig& c, RunReport& r, CheckList& checks) {
  const auto d = static_cast<std::size_t>(c.dim);
  const Eigen::MatrixXcd mixed = Eigen::MatrixXcd::Identity(c.dim, c.dim) / static_cast<double>(d);
  const DensityMatrix maximally_mixed(mixed);
  std::vector<DensityMatrix> reduced;
  double to_mixed = 0.0, lost = 0.0, lost_in_ancilla = 0.0, defect = 0.0, purity = 0.0, product = 0.0;
  std::size_t wrong_ancilla = 0;
  for (std::int64_t i = 0; i < c.inputs; ++i) {
    const StateVector psi = random_state(d, derive_seed(c.seed, static_cast<std::uint64_t>(i)));
    const collapse::BleachResult b = collapse::bleach(psi);
    if (b.ancilla_dim != d * d) ++wrong_ancilla;
    to_mixed = std::max(to_mixed, trace_distance(b.system_state, maximally_mixed));
    const collapse::RecoveryResult rec = collapse::recover(b.joint);
    lost = std::max(lost, 1.0 - fidelity(rec.system, psi));
    lost_in_ancilla = std::max(lost_in_ancilla, 1.0 - fidelity(rec.ancilla_register, psi));
    product = std::max(product, std::abs(rec.product_defect));
    defect = std::max({defect, b.audit.max_unitarity_defect(), rec.audit.max_unitarity_defect()});
    purity = std::max({purity, b.audit.max_global_entropy(), rec.audit.max_global_entropy()});
    reduced.push_back(b.system_state);
  }
  double pairwise = 0.0;
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    for (std::size_t j = i + 1; j < reduced.size(); ++j) {
      pairwise = std::max(pairwise, trace_distance(reduced[i], reduced[j]));
    }
  }
  checks.exact("ancilla dimension is d^2", wrong_ancilla);
  checks.residual("bleached system state is input-independent", pairwise, 1e-10);
  checks.residual("bleached system state is maximally mixed", to_mixed, 1e-10);
  checks.residual("input recovered in the ancilla", lost_in_ancilla, 1e-10);
  checks.residual("recovery fidelity", lost, 1e-10);
  checks.residual("recovered system unentangled", product, 1e-10);
  checks.unitary_maps(defect);
  checks.global_purity(purity);
  r.results["dim"] = d;
  r.results["ancilla_dim"] = d * d;
  r.results["inputs"] = c.inputs;
  r.results["max_pairwise_trace_distance"] = pairwise;
  r.results["min_recovery_fidelity"] = 1.0 - lost;
}

bool is_number_or_null(const json& j) { return j.is_number() || j.is_null(); }

}  // namespace

bool RunReport::pass() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

json report_to_json(const RunReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"pass", c.pass},
                      {"residual", std::isfinite(c.residual) ? json(c.residual) : json(nullptr)},
                      {"tolerance", c.tolerance}});
  }
  return {{"schema", kReportSchema},
          {"scenario", r.scenario},
          {"config", r.config},
          {"checks", checks},
          {"results", r.results},
          {"pass", r.pass()},
          {"artifacts", r.artifacts},
          {"timing", {{"wall_seconds", r.wall_seconds}}}};
}

std::vector<std::string> validate_report(const json& j) {
  std::vector<std::string> problems;
  if (!j.is_object()) return {"report is not an object"};
  static const std::vector<std::string> keys{"schema",  "scenario", "config",    "checks",
                                             "results", "pass",     "artifacts", "timing"};
  for (const auto& k : keys) {
    if (!j.contains(k)) problems.push_back("missing field " + k);
  }
  for (const auto& [k, _] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) problems.push_back("unexpected field " + k);
  }
  if (!problems.empty()) return problems;
  if (j["schema"] != kReportSchema) problems.push_back("schema must be " + std::string(kReportSchema));
  const auto& names = scenario_names();
  if (!j["scenario"].is_string() ||
      std::find(names.begin(), names.end(), j["scenario"].get<std::string>()) == names.end()) {
    problems.push_back("scenario must name a known scenario");
  }
  if (!j["config"].is_object() || !j["config"].contains("seed")) problems.push_back("config must echo the seed");
  if (!j["results"].is_object()) problems.push_back("results must be an object");
  if (!j["pass"].is_boolean()) problems.push_back("pass must be a boolean");
  if (!j["artifacts"].is_array() ||
      !std::all_of(j["artifacts"].begin(), j["artifacts"].end(), [](const json& a) { return a.is_string(); })) {
    problems.push_back("artifacts must be an array of strings");
  }
  if (!j["timing"].is_object() || !j["timing"].contains("wall_seconds") || !j["timing"]["wall_seconds"].is_number()) {
    problems.push_back("timing.wall_seconds must be a number");
  }
  if (!j["checks"].is_array() || j["checks"].empty()) {
    problems.push_back("checks must be a non-empty array");
    return problems;
  }
  bool all_pass = true;
  for (std::size_t i = 0; i < j["checks"].size(); ++i) {
    const json& c = j["checks"][i];
    const std::string at = "checks[" + std::to_string(i) + "]";
    if (!c.is_object() || c.size() != 4 || !c.contains("name") || !c["name"].is_string() || !c.contains("pass") ||
        !c["pass"].is_boolean() || !c.contains("residual") || !is_number_or_null(c["residual"]) ||
        !c.contains("tolerance") || !c["tolerance"].is_number()) {
      problems.push_back(at + " must hold name, pass, residual and tolerance");
      continue;
    }
    all_pass = all_pass && c["pass"].get<bool>();
  }
  if (problems.empty() && j["pass"].is_boolean() && j["pass"].get<bool>() != all_pass) {
    problems.push_back("pass must be true exactly when every check passes");
  }
  return problems;
}

RunReport run(const ScenarioConfig& c) {
  validate(c);
  RunReport r;
  r.scenario = c.scenario;
  r.config = config_echo(c);
  CheckList checks(c);
  const auto start = std::chrono::steady_clock::now();
  if (c.scenario == "grothendieck-int") run_grothendieck(c, r, checks);
  else if (c.scenario == "envariance-restore") run_restore(c, r, checks);
  else if (c.scenario == "equiv-laws") run_laws(c, r, checks);
  else if (c.scenario == "born") run_born(c, r, checks);
  else if (c.scenario == "darwinism") run_darwinism(c, r, checks);
  else if (c.scenario == "nohide") run_nohide(c, r, checks);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.checks = checks.take();
  r.artifacts.insert(r.artifacts.begin(), "report.json");
  return r;
}

int execute(const ScenarioConfig& c, std::ostream& log) {
  RunReport report;
  try {
    report = run(c);
  } catch (const ConfigError& e) {
    for (const auto& p : e.problems()) log << "config error: " << p << "\n";
    return kExitConfigError;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }

  std::error_code ec;
  std::filesystem::create_directories(c.out, ec);
  if (ec) {
    log << "config error: out: cannot create " << c.out.string() << ": " << ec.message() << "\n";
    return kExitConfigError;
  }
  for (const auto& [name, text] : report.files) {
    std::ofstream(c.out / name, std::ios::binary) << text;
  }
  const json j = report_to_json(report);
  std::ofstream(c.out / "report.json", std::ios::binary) << j.dump(2) << "\n";

  for (const auto& check : report.checks) {
    log << (check.pass ? "PASS " : "FAIL ") << check.name << "  residual=" << check.residual
        << " tolerance=" << check.tolerance << "\n";
  }
  log << c.scenario << ": " << (report.pass() ? "pass" : "FAIL") << " (" << (c.out / "report.json").string()
      << ")\n";
  return report.pass() ? kExitPass : kExitCheckFailed;
}

}  // namespace envar::tools
