#pragma once

// Envariance and the composability equivalence relation.
//
// A JointPairState is a pure state on H_p ⊗ H_n (optionally ⊗ an ancilla).
// Two joint states x, y are related when local unitaries map one onto the
// other, x = (U_p ⊗ U_n) y. For bipartite pure states this holds exactly when
// the Schmidt spectra across the p|n cut agree, which is the decision
// procedure used here. Every positive verdict is backed by explicit witness
// unitaries whose residuals are measured, not assumed.
//
// An ancilla factor, when present, is grouped with the n side for every
// Schmidt computation, so operators "on n" act on H_n ⊗ H_ancilla.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "envar/grothendieck.hpp"
#include "envar/linalg.hpp"

namespace envar {

class JointPairState {
 public:
  JointPairState(const StateVector& joint, std::size_t dim_p, std::size_t dim_n, std::size_t dim_ancilla = 1);
  /// Reads (d_p, d_n) or (d_p, d_n, d_ancilla) from the state's factor dims.
  explicit JointPairState(const StateVector& joint);

  static JointPairState product(const StateVector& p, const StateVector& n);

  const StateVector& joint() const noexcept { return joint_; }
  std::size_t dim_p() const noexcept { return dim_p_; }
  std::size_t dim_n() const noexcept { return dim_n_; }
  std::size_t dim_ancilla() const noexcept { return dim_ancilla_; }
  /// Dimension of the n side including the ancilla.
  std::size_t dim_complement() const noexcept { return dim_n_ * dim_ancilla_; }

  SchmidtDecomposition schmidt(const Tolerances& tol = kDefaultTolerances) const;
  Eigen::VectorXd spectrum(const Tolerances& tol = kDefaultTolerances) const;

  /// Appends a spectator ancilla (tensored after any existing ancilla).
  JointPairState with_ancilla(const StateVector& ancilla) const;
  /// Embeds the ancilla into a larger one by zero-padding its index range.
  JointPairState padded_ancilla(std::size_t dim_ancilla) const;

 private:
  StateVector joint_;
  std::size_t dim_p_;
  std::size_t dim_n_;
  std::size_t dim_ancilla_;
};

/// Phases φ_k and integer shifts l_k of an envariant pair
///   U_p = Σ e^{iφ_k} |a_k⟩⟨a_k|,  U_n = Σ e^{−i(φ_k + 2π l_k)} |b_k⟩⟨b_k|.
/// The shifts contribute the factor e^{−2πi l_k} = 1 and leave U_n unchanged.
struct PhaseSpec {
  std::vector<double> phases;
  std::vector<std::int64_t> integer_shifts;
};

struct WitnessSet {
  Operator u_p;
  Operator u_n;
  std::optional<Operator> u_ancilla;
  std::optional<StateVector> ancilla;
  double residual = 0.0;
  std::uint64_t seed = 0;

  bool accepted(const Tolerances& tol = kDefaultTolerances) const;
};

/// Degenerate blocks of a descending coefficient list, as [begin, end) ranges.
/// Coefficients at or below the rank cutoff form the final block.
std::vector<std::pair<std::size_t, std::size_t>> degenerate_blocks(const Eigen::VectorXd& coefficients,
                                                                   const Tolerances& tol = kDefaultTolerances);

/// Builds U_p, U_n diagonal in the Schmidt bases with opposite phases, and
/// identity off the Schmidt support. Throws RankMismatch when the phase count
/// differs from the Schmidt rank.
std::pair<Operator, Operator> synthesize_envariant(const JointPairState& psi, const PhaseSpec& spec,
                                                   const Tolerances& tol = kDefaultTolerances);

/// Finds U_n with (U_p ⊗ U_n)|ψ⟩ = |ψ⟩. U_p must map each Schmidt block of
/// the reduced p state into itself; the block action G = A†U_pA is carried to
/// the n side as U_n = B Ḡ B† + (I − BB†). Throws NotEnvariant otherwise.
WitnessSet undo_on_n(const JointPairState& psi, const Operator& u_p,
                     const Tolerances& tol = kDefaultTolerances);
/// Same, reusing a decomposition of ψ across (d_p | d_n·d_ancilla).
WitnessSet undo_on_n(const JointPairState& psi, const SchmidtDecomposition& sd, const Operator& u_p,
                     const Tolerances& tol = kDefaultTolerances);

/// A random unitary on H_p that leaves every Schmidt block of ψ invariant
/// (independent Haar unitaries inside each block, including the kernel).
Operator sample_envariant_unitary(const JointPairState& psi, std::uint64_t seed,
                                  const Tolerances& tol = kDefaultTolerances);

/// (P ⊗ B)ψ with P drawn by sample_envariant_unitary and B Haar on the n side.
/// The result has the same reduced p state as ψ.
JointPairState related_state(const JointPairState& psi, std::uint64_t seed,
                             const Tolerances& tol = kDefaultTolerances);

/// A random unitary on the ancilla's space with U|ξ⟩ = |ξ⟩.
Operator stabilizer_unitary(const StateVector& ancilla, std::uint64_t seed);

/// How the "given any U_p" quantifier is sampled.
enum class QuantifierMode {
  /// U_p drawn from the block-preserving subgroup, where an undo always exists.
  envariant_subgroup,
  /// U_p drawn Haar on all of H_p; failures are counted, not hidden.
  literal,
};

struct EquivalenceVerdict {
  bool related = false;
  Eigen::VectorXd spectrum_x;
  Eigen::VectorXd spectrum_y;
  double spectrum_gap = 0.0;
  std::vector<WitnessSet> witnesses;
  std::size_t trials = 0;
  std::vector<std::uint64_t> trial_seeds;
  std::size_t not_envariant_count = 0;
  QuantifierMode mode = QuantifierMode::envariant_subgroup;
  /// Local unitaries with x = (map_p ⊗ map_n) y, present when spectra agree.
  std::optional<Operator> map_p;
  std::optional<Operator> map_n;
  double map_residual = 0.0;
  std::string detail;
};

/// Decides x ~ y and validates `trials` sampled witnesses
/// x = (U_p ⊗ U_n) y, with per-trial seeds derive_seed(seed, t).
EquivalenceVerdict pair_equivalent(const JointPairState& x, const JointPairState& y, std::size_t trials,
                                   std::uint64_t seed,
                                   QuantifierMode mode = QuantifierMode::envariant_subgroup,
                                   const Tolerances& tol = kDefaultTolerances);

/// An accepted equivalence together with the states it relates:
///   target ⊗ ξ = (U_p ⊗ U_n ⊗ U_ξ)(source ⊗ ξ),
/// where U_n is determined by U_p through witness_for().
class Link {
 public:
  /// Throws Error when target and source are not related.
  static Link make(const JointPairState& target, const JointPairState& source, const StateVector& ancilla,
                   const Operator& ancilla_op, const Tolerances& tol = kDefaultTolerances);
  static Link make(const JointPairState& target, const JointPairState& source,
                   const Tolerances& tol = kDefaultTolerances);

  const JointPairState& target() const noexcept { return target_; }
  const JointPairState& source() const noexcept { return source_; }
  const StateVector& ancilla() const noexcept { return ancilla_; }
  const Operator& ancilla_op() const noexcept { return ancilla_op_; }
  const Operator& map_p() const noexcept { return map_p_; }
  const Operator& map_n() const noexcept { return map_n_; }
  const Tolerances& tolerances() const noexcept { return tol_; }

  /// The witness for a chosen U_p: U_n(U_p) and the residual of the defining
  /// equation. Throws NotEnvariant when U_p admits no U_n.
  WitnessSet witness_for(const Operator& u_p) const;

  /// A random U_p for which witness_for() succeeds.
  Operator sample_admissible_p(std::uint64_t seed) const;

 private:
  Link(JointPairState target, JointPairState source, StateVector ancilla, Operator ancilla_op, Operator map_p,
       Operator map_n, const Tolerances& tol);

  JointPairState target_;
  JointPairState source_;
  StateVector ancilla_;
  Operator ancilla_op_;
  Operator map_p_;
  Operator map_n_;
  Tolerances tol_;
};

/// Reverses a link: given V_p, picks U_p = V_p⁻¹ in the forward link and sets
/// V_n = U_n(V_p⁻¹)⁻¹, V_ξ = U_ξ⁻¹. The residual measures
/// ‖(V_p ⊗ V_n ⊗ V_ξ)(target ⊗ ξ) − source ⊗ ξ‖.
WitnessSet symmetry_witness(const Link& forward, const Operator& v_p);

/// Chains (a,b)~(c,d) [first] and (c,d)~(e,f) [second] into (a,b)~(e,f).
///
/// With U_p = V_p = W_p and W_n = U_n(W_p), the ancilla is
/// χ = d ⊗ c ⊗ ξ ⊗ η and W_χ = V_n(W_p) ⊗ W_p ⊗ U_ξ ⊗ V_η. The residual
/// compares a ⊗ f ⊗ χ with (W_p e) ⊗ (W_n b) ⊗ (W_χ χ) after reordering the
/// latter's factors from (c, d, f, a, ξ, η) to (a, f, d, c, ξ, η); the two
/// sides hold the same factors only up to that fixed permutation.
///
/// In link terms the first link's target is a⊗d and source c⊗b; the second
/// link's target is c⊗f and source e⊗d. The states may be entangled, in which
/// case χ has no product form and `ancilla` is left empty.
WitnessSet transitivity_witness(const Link& first, const Link& second, const Operator& w_p);

/// The monoid of joint pair states under slot-wise tensor composition,
/// (p1, n1) ⊗ (p2, n2) = (p1 ⊗ p2, n1 ⊗ n2). Equality is local-unitary
/// equivalence decided by pair_equivalent, which makes the monoid cancellative
/// and lets it plug into the group completion.
struct CompositionMonoid {
  using element_type = JointPairState;

  std::size_t trials = 2;
  std::uint64_t seed = 0;
  Tolerances tol = kDefaultTolerances;

  JointPairState identity() const;
  JointPairState combine(const JointPairState& a, const JointPairState& b) const;
  bool equal(const JointPairState& a, const JointPairState& b) const;
  bool contains(const JointPairState& a) const { return a.dim_ancilla() == 1; }
  bool cancellative() const { return true; }

  friend bool operator==(const CompositionMonoid&, const CompositionMonoid&) { return true; }
};

static_assert(grothendieck::CommutativeMonoid<CompositionMonoid>);

}  // namespace envar
