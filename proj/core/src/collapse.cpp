#include "envar/collapse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include "envar/envariance.hpp"

namespace envar::collapse {
namespace {

// Dimension product that gives up once it passes `limit`.
std::size_t bounded_product(std::size_t base, std::size_t count, std::size_t limit, const char* what) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < count; ++i) {
    total *= base;
    if (total > limit) {
      throw BudgetExceeded(std::string(what) + " exceeds the dimension budget of " + std::to_string(limit));
    }
  }
  return total;
}

/// Block-diagonal Σ_k |k⟩⟨k| ⊗ block(k) on control ⊗ target.
Eigen::MatrixXcd controlled(std::size_t control_dim, std::size_t target_dim,
                            const std::function<Eigen::MatrixXcd(std::size_t)>& block) {
  const auto c = static_cast<Eigen::Index>(control_dim);
  const auto t = static_cast<Eigen::Index>(target_dim);
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(c * t, c * t);
  for (Eigen::Index k = 0; k < c; ++k) u.block(k * t, k * t, t, t) = block(static_cast<std::size_t>(k));
  return u;
}

Eigen::MatrixXcd shift(std::size_t d, std::size_t by) {
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t m = 0; m < d; ++m) {
    x(static_cast<Eigen::Index>((m + by) % d), static_cast<Eigen::Index>(m)) = 1.0;
  }
  return x;
}

Eigen::MatrixXcd clock(std::size_t d, std::size_t power) {
  Eigen::VectorXcd diag(static_cast<Eigen::Index>(d));
  for (std::size_t m = 0; m < d; ++m) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>((m * power) % d) / static_cast<double>(d);
    diag(static_cast<Eigen::Index>(m)) = std::polar(1.0, angle);
  }
  return diag.asDiagonal();
}

Eigen::MatrixXcd fourier(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  Eigen::MatrixXcd f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(d);
      f(j, k) = std::polar(scale, angle);
    }
  }
  return f;
}

/// Unnormalized evolution with an audit trail.
class Evolution {
 public:
  Evolution(Eigen::VectorXcd amplitudes, Dims dims, const Tolerances& tol)
      : amps_(std::move(amplitudes)), dims_(std::move(dims)), tol_(tol) {
    record_entropy();
  }

  void apply(const std::string& name, std::span<const std::size_t> targets, const Eigen::MatrixXcd& op) {
    const double defect = Operator(op).unitarity_defect();
    audit_.maps.push_back({name, static_cast<std::size_t>(op.rows()), defect});
    if (defect > tol_.unitarity) {
      throw Error(name + " is not unitary: defect " + std::to_string(defect));
    }
    amps_ = apply_on_factors(amps_, dims_, targets, op);
    record_entropy();
  }

  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  const Dims& dims() const { return dims_; }
  EvolutionAudit& audit() { return audit_; }
  StateVector state() const { return StateVector(amps_, dims_); }

 private:
  void record_entropy() {
    Eigen::VectorXd spectrum(1);
    spectrum(0) = amps_.squaredNorm();
    audit_.global_entropy.push_back(entropy_of_spectrum(spectrum, tol_));
  }

  Eigen::VectorXcd amps_;
  Dims dims_;
  Tolerances tol_;
  EvolutionAudit audit_;
};

Eigen::VectorXcd with_blank_records(const StateVector& system, std::size_t env_total) {
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(system.amplitudes().size() * static_cast<Eigen::Index>(env_total));
  for (Eigen::Index k = 0; k < system.amplitudes().size(); ++k) {
    amps(k * static_cast<Eigen::Index>(env_total)) = system.amplitudes()(k);
  }
  return amps;
}

BranchingState broadcast(const StateVector& system, std::size_t env_count, const Tolerances& tol,
                         const std::string& map_name, const Eigen::MatrixXcd& gate, RecordMode mode,
                         double overlap) {
  const std::size_t ds = system.dim();
  const std::size_t env_total = bounded_product(ds, env_count, tol.max_total_dim / ds, "premeasurement state");
  Dims dims(env_count + 1, ds);
  Evolution evo(with_blank_records(system, env_total), dims, tol);
  for (std::size_t j = 0; j < env_count; ++j) {
    const std::size_t targets[] = {0, j + 1};
    evo.apply(map_name + " onto record " + std::to_string(j), targets, gate);
  }
  BranchingState out{evo.state(), ds, env_count, ds, {}, mode, overlap, std::move(evo.audit())};
  for (std::size_t k = 0; k < ds; ++k) {
    out.branches.push_back({k, system.amplitudes()(static_cast<Eigen::Index>(k))});
  }
  return out;
}

}  // namespace

double EvolutionAudit::max_unitarity_defect() const {
  double worst = 0.0;
  for (const auto& m : maps) worst = std::max(worst, m.unitarity_defect);
  return worst;
}

double EvolutionAudit::max_global_entropy() const {
  double worst = 0.0;
  for (double h : global_entropy) worst = std::max(worst, std::abs(h));
  return worst;
}

// -- premeasurement ---------------------------------------------------------

BranchingState premeasure(const StateVector& system, std::size_t env_count, const Tolerances& tol) {
  const std::size_t ds = system.dim();
  if (ds < 2) throw DimensionMismatch("premeasurement needs a system of dimension at least 2");
  if (env_count < 1) throw DimensionMismatch("premeasurement needs at least one environment factor");
  const Eigen::MatrixXcd gate = controlled(ds, ds, [ds](std::size_t k) { return shift(ds, k); });
  return broadcast(system.regrouped(Dims{ds}), env_count, tol, "controlled shift", gate, RecordMode::perfect,
                   0.0);
}

BranchingState premeasure_imperfect(const StateVector& system, std::size_t env_count, double theta,
                                    const Tolerances& tol) {
  if (system.dim() != 2) throw DimensionMismatch("imperfect records are modelled for a qubit system");
  if (env_count < 1) throw DimensionMismatch("premeasurement needs at least one environment factor");
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::MatrixXcd rotation(2, 2);
  rotation << c, -s, s, c;
  const Eigen::MatrixXcd gate = controlled(2, 2, [&](std::size_t k) -> Eigen::MatrixXcd {
    return k == 0 ? Eigen::MatrixXcd::Identity(2, 2) : rotation;
  });
  return broadcast(system.regrouped(Dims{2}), env_count, tol, "controlled rotation", gate,
                   RecordMode::imperfect, c);
}

BranchingState ghz_branching(std::size_t env_count, const Tolerances& tol) {
  return premeasure(StateVector(Eigen::VectorXcd::Ones(2)), env_count, tol);
}

// -- Born rule ----------------------------------------------------------------

RationalWeights::RationalWeights(std::vector<std::int64_t> counts, std::int64_t denominator)
    : counts_(std::move(counts)), denominator_(denominator) {
  if (counts_.empty()) throw Error("weights need at least one outcome");
  std::int64_t sum = 0;
  for (std::int64_t m : counts_) {
    if (m < 1) throw Error("every weight count must be at least 1, got " + std::to_string(m));
    if (__builtin_add_overflow(sum, m, &sum)) throw BudgetExceeded("weight counts overflow");
  }
  if (sum != denominator_) {
    throw Error("weight counts sum to " + std::to_string(sum) + ", not " + std::to_string(denominator_));
  }
}

WeightApproximation approximate_weights(std::span<const double> probabilities, std::int64_t denominator) {
  const auto k = static_cast<std::int64_t>(probabilities.size());
  if (k == 0) throw Error("no probabilities to approximate");
  if (denominator < k) throw Error("denominator must be at least the number of outcomes");
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw Error("probabilities must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("probabilities must sum to 1");

  const auto m_total = static_cast<double>(denominator);
  std::vector<std::int64_t> counts(probabilities.size());
  std::vector<double> remainder(probabilities.size());
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double exact = probabilities[i] * m_total;
    counts[i] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(exact)));
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(probabilities.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Stable sorts keep ties in input order so the result is deterministic.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < denominator; i = (i + 1) % order.size()) {
    ++counts[order[i]];
    ++assigned;
  }
  // Forced minimum counts may overshoot; take back from the most over-served.
  while (assigned > denominator) {
    std::size_t pick = order.size();
    for (std::size_t idx : order) {
      if (counts[idx] > 1 && (pick == order.size() || remainder[idx] < remainder[pick])) pick = idx;
    }
    --counts[pick];
    remainder[pick] += 1.0;
    --assigned;
  }

  double max_error = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    max_error = std::max(max_error, std::abs(probabilities[i] - static_cast<double>(counts[i]) / m_total));
  }
  return {RationalWeights(std::move(counts), denominator), max_error};
}

BornResult born_from_envariance(const RationalWeights& weights, const Tolerances& tol) {
  const std::size_t outcomes = weights.size();
  const auto big_m = static_cast<std::size_t>(weights.denominator());
  std::vector<std::size_t> counts(outcomes);
  std::vector<std::size_t> offsets(outcomes);
  std::size_t widest = 0;
  for (std::size_t k = 0, acc = 0; k < outcomes; ++k) {
    counts[k] = static_cast<std::size_t>(weights.counts()[k]);
    offsets[k] = acc;
    acc += counts[k];
    widest = std::max(widest, counts[k]);
  }
  const Dims dims{outcomes, widest, outcomes, big_m};
  const double total = static_cast<double>(outcomes) * static_cast<double>(widest) *
                       static_cast<double>(outcomes) * static_cast<double>(big_m);
  if (total > static_cast<double>(tol.max_total_dim)) {
    throw BudgetExceeded("fine-grained state of dimension " + std::to_string(static_cast<std::size_t>(total)) +
                         " exceeds the dimension budget of " + std::to_string(tol.max_total_dim));
  }

  BornResult out{{}, {}, StateVector::basis(1, 0), dims, 0.0, 0.0, {}, {}};
  for (std::size_t k = 0; k < outcomes; ++k) {
    out.probabilities.emplace_back(weights.counts()[k], weights.denominator());
  }

  // Σ_k √(m_k/M)|k⟩_S|k⟩_E before fine-graining.
  const auto ko = static_cast<Eigen::Index>(outcomes);
  Eigen::VectorXcd coarse = Eigen::VectorXcd::Zero(ko * ko);
  for (Eigen::Index k = 0; k < ko; ++k) {
    coarse(k * ko + k) = std::sqrt(static_cast<double>(counts[static_cast<std::size_t>(k)]) /
                                   static_cast<double>(big_m));
  }
  const SchmidtDecomposition coarse_sd = schmidt(StateVector(coarse, Dims{outcomes, outcomes}), {outcomes, outcomes}, tol);
  out.squared_schmidt = coarse_sd.coefficients.cwiseAbs2();

  // The same state with blank counterpart and ancilla registers.
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(product(dims)));
  for (std::size_t k = 0; k < outcomes; ++k) {
    const std::size_t digits[] = {k, 0, k, 0};
    amps(static_cast<Eigen::Index>(flatten(digits, dims))) = coarse(static_cast<Eigen::Index>(k * outcomes + k));
  }
  Evolution evo(std::move(amps), dims, tol);

  // |k⟩_E|0⟩_A ↦ |k⟩_E ⊗ uniform superposition over block k of A.
  const Eigen::MatrixXcd split = controlled(outcomes, big_m, [&](std::size_t k) {
    Eigen::VectorXcd uniform = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(big_m));
    uniform.segment(static_cast<Eigen::Index>(offsets[k]), static_cast<Eigen::Index>(counts[k]))
        .setConstant(1.0 / std::sqrt(static_cast<double>(counts[k])));
    return complete_basis(uniform);
  });
  const std::size_t split_targets[] = {2, 3};
  evo.apply("fine-graining", split_targets, split);

  // |j⟩_A|c⟩_C ↦ |j⟩_A|c + r(j)⟩_C with r(j) the position of j inside its block.
  std::vector<std::size_t> block_of(big_m);
  for (std::size_t k = 0; k < outcomes; ++k) {
    for (std::size_t r = 0; r < counts[k]; ++r) block_of[offsets[k] + r] = k;
  }
  const Eigen::MatrixXcd label = controlled(big_m, widest, [&](std::size_t j) {
    return shift(widest, j - offsets[block_of[j]]);
  });
  const std::size_t label_targets[] = {3, 1};
  evo.apply("counterpart labelling", label_targets, label);

  // Each fine-grained branch j sits at (k(j), r(j), k(j), j).
  const double expected = 1.0 / std::sqrt(static_cast<double>(big_m));
  Eigen::VectorXcd stray = evo.amplitudes();
  std::vector<std::size_t> branch_row(big_m);
  for (std::size_t j = 0; j < big_m; ++j) {
    const std::size_t k = block_of[j];
    const std::size_t r = j - offsets[k];
    const std::size_t digits[] = {k, r, k, j};
    const auto idx = static_cast<Eigen::Index>(flatten(digits, dims));
    out.amplitude_deviation = std::max(out.amplitude_deviation, std::abs(stray(idx) - expected));
    stray(idx) = 0.0;
    branch_row[j] = k * widest + r;
  }
  out.stray_norm = stray.norm();
  out.fine_grained = evo.state();
  out.audit = std::move(evo.audit());

  // Transposing two branches on S⊗C must be undone on E⊗A.
  const std::size_t dp = outcomes * widest;
  const JointPairState split_pair(out.fine_grained, dp, outcomes * big_m);
  const SchmidtDecomposition sd = split_pair.schmidt(tol);
  for (std::size_t a = 0; a < big_m; ++a) {
    for (std::size_t b = a + 1; b < big_m; ++b) {
      Eigen::MatrixXcd swap = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(dp), static_cast<Eigen::Index>(dp));
      const auto ra = static_cast<Eigen::Index>(branch_row[a]);
      const auto rb = static_cast<Eigen::Index>(branch_row[b]);
      swap(ra, ra) = 0.0;
      swap(rb, rb) = 0.0;
      swap(ra, rb) = 1.0;
      swap(rb, ra) = 1.0;
      const WitnessSet w = undo_on_n(split_pair, sd, Operator(std::move(swap)), tol);
      out.transpositions.push_back({a, b, w.residual});
    }
  }
  return out;
}

// -- quantum Darwinism ------------------------------------------------------

double mutual_information(const BranchingState& state, std::span<const std::size_t> fragment,
                          const Tolerances& tol) {
  if (fragment.empty()) return 0.0;
  std::vector<std::size_t> f_factors;
  for (std::size_t e : fragment) {
    if (e >= state.env_count) throw IndexOutOfRange("fragment index " + std::to_string(e) + " out of range");
    f_factors.push_back(e + 1);
  }
  std::vector<std::size_t> sf_factors = f_factors;
  sf_factors.insert(sf_factors.begin(), 0);
  const std::size_t s_factor[] = {0};
  return subsystem_entropy(state.joint, s_factor, tol) + subsystem_entropy(state.joint, f_factors, tol) -
         subsystem_entropy(state.joint, sf_factors, tol);
}

namespace {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<std::vector<std::size_t>> all_fragments(std::size_t n, std::size_t f) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> pick(f);
  std::iota(pick.begin(), pick.end(), std::size_t{0});
  while (true) {
    out.push_back(pick);
    std::size_t i = f;
    while (i > 0 && pick[i - 1] == n - f + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < f; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

std::vector<std::vector<std::size_t>> sampled_fragments(std::size_t n, std::size_t f, std::size_t count,
                                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::set<std::vector<std::size_t>> chosen;
  std::vector<std::size_t> pool(n);
  while (chosen.size() < count) {
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < f; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    std::vector<std::size_t> fragment(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(f));
    std::sort(fragment.begin(), fragment.end());
    chosen.insert(std::move(fragment));
  }
  return {chosen.begin(), chosen.end()};
}

}  // namespace

MutualInformationCurve darwinism_curve(const BranchingState& state, std::size_t samples_per_size,
                                       std::uint64_t seed, const Tolerances& tol) {
  constexpr std::size_t kEnvironmentBudget = std::size_t{1} << 12;
  bounded_product(state.env_dim, state.env_count, kEnvironmentBudget, "environment");
  if (samples_per_size == 0) throw Error("samples_per_size must be positive");

  const std::size_t n = state.env_count;
  MutualInformationCurve curve;
  curve.env_count = n;
  const std::size_t s_factor[] = {0};
  curve.system_entropy = subsystem_entropy(state.joint, s_factor, tol);
  curve.points.push_back({0, 0.0, 1});
  for (std::size_t f = 1; f <= n; ++f) {
    const auto fragments = binomial(n, f) <= samples_per_size
                               ? all_fragments(n, f)
                               : sampled_fragments(n, f, samples_per_size, derive_seed(seed, f));
    double sum = 0.0;
    for (const auto& fragment : fragments) sum += mutual_information(state, fragment, tol);
    curve.points.push_back({f, sum / static_cast<double>(fragments.size()), fragments.size()});
  }
  return curve;
}

double redundancy(const MutualInformationCurve& curve, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error("delta must lie in (0, 1)");
  if (curve.system_entropy <= 1e-12) return 0.0;
  const double threshold = (1.0 - delta) * curve.system_entropy;
  for (const auto& p : curve.points) {
    if (p.fragment_size >= 1 && p.mean_information >= threshold) {
      return static_cast<double>(curve.env_count) / static_cast<double>(p.fragment_size);
    }
  }
  return 0.0;
}

void write_curve_csv(std::ostream& out, const MutualInformationCurve& curve) {
  out << "f,mean_I_bits,samples,H_S\n";
  char line[128];
  for (const auto& p : curve.points) {
    std::snprintf(line, sizeof line, "%zu,%.15g,%zu,%.15g\n", p.fragment_size, p.mean_information, p.samples,
                  curve.system_entropy);
    out << line;
  }
}

// -- no-hiding --------------------------------------------------------------

Operator bleaching_unitary(std::size_t d) {
  if (d < 2) throw DimensionMismatch("bleaching needs d ≥ 2");
  const auto n = static_cast<Eigen::Index>(d);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd f = fourier(d);
  // Factor order (S, A1, A2).
  const Eigen::MatrixXcd prepare = kron(Operator(id), kron(Operator(f), Operator(f))).matrix();
  Eigen::MatrixXcd twirl = Eigen::MatrixXcd::Zero(n * n * n, n * n * n);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t l = 0; l < d; ++l) {
      const Eigen::MatrixXcd on_s = clock(d, l) * shift(d, k);
      Eigen::MatrixXcd proj = Eigen::MatrixXcd::Zero(n * n, n * n);
      proj(static_cast<Eigen::Index>(k * d + l), static_cast<Eigen::Index>(k * d + l)) = 1.0;
      twirl += kron(Operator(on_s), Operator(proj)).matrix();
    }
  }
  return Operator(twirl * prepare);
}

Operator recovery_unitary(std::size_t d) {
  if (d < 2) throw DimensionMismatch("recovery needs d ≥ 2");
  const auto n = static_cast<Eigen::Index>(d);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  // Factor order (A1, A2).
  const Eigen::MatrixXcd unfourier = kron(Operator(id), Operator(fourier(d).adjoint())).matrix();
  const Eigen::MatrixXcd subtract = controlled(d, d, [d](std::size_t k) { return shift(d, d - k); });
  Eigen::MatrixXcd add = Eigen::MatrixXcd::Zero(n * n, n * n);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      add(static_cast<Eigen::Index>(((a + b) % d) * d + b), static_cast<Eigen::Index>(a * d + b)) = 1.0;
    }
  }
  return Operator(add * subtract * unfourier);
}

BleachResult bleach(const StateVector& psi, const Tolerances& tol) {
  const std::size_t d = psi.dim();
  if (d < 2) throw DimensionMismatch("bleaching needs d ≥ 2");
  bounded_product(d, 3, tol.max_total_dim, "bleaching register");
  const Dims dims{d, d, d};
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d * d * d));
  for (std::size_t m = 0; m < d; ++m) amps(static_cast<Eigen::Index>(m * d * d)) = psi[m];
  Evolution evo(std::move(amps), dims, tol);
  const std::size_t all[] = {0, 1, 2};
  evo.apply("bleaching", all, bleaching_unitary(d).matrix());
  StateVector joint = evo.state();
  const std::size_t s_factor[] = {0};
  DensityMatrix system_state = partial_trace(joint, s_factor, tol);
  return {std::move(joint), std::move(system_state), d * d, std::move(evo.audit())};
}

RecoveryResult recover(const StateVector& joint, const Tolerances& tol) {
  const Dims& dims = joint.factor_dims();
  if (dims.size() != 3 || dims[0] != dims[1] || dims[1] != dims[2]) {
    throw DimensionMismatch("recovery expects factors (S, A1, A2) of equal dimension");
  }
  const std::size_t d = dims[0];
  Evolution evo(joint.amplitudes(), dims, tol);
  const std::size_t ancilla[] = {1, 2};
  evo.apply("ancilla recovery", ancilla, recovery_unitary(d).matrix());

  // The ancilla register A2 now holds the input; read it off the A2 | (S, A1) cut.
  const std::size_t to_front[] = {2, 0, 1};
  const StateVector a2_first(permute_amplitudes(evo.amplitudes(), dims, to_front), Dims{d, d, d});
  const SchmidtDecomposition a2_sd = schmidt(a2_first, {d, d * d}, tol);
  StateVector ancilla_register(a2_sd.left_basis.col(0), Dims{d});

  const std::size_t swap_targets[] = {0, 2};
  evo.apply("swap S with A2", swap_targets, factor_permutation(Dims{d, d}, std::vector<std::size_t>{1, 0}).matrix());
  const StateVector swapped = evo.state();
  const SchmidtDecomposition sd = schmidt(swapped, {d, d * d}, tol);
  StateVector system(sd.left_basis.col(0), Dims{d});
  const double top = sd.coefficients(0);
  return {std::move(ancilla_register), std::move(system), 1.0 - top * top, std::move(evo.audit())};
}

}  // namespace envar::collapse
