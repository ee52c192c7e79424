#pragma once

// Unitary measurement models: premeasurement by broadcasting the pointer
// index into environment records, Born weights from envariance after
// fine-graining, mutual-information curves over environment fragments, and
// the d²-ancilla bleach/recover pair.
//
// Every evolution map is built as an explicit dense unitary on the factors it
// touches and audited (‖U†U − I‖_max) before use. States are evolved without
// renormalization so that any norm loss is visible in the audit.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "envar/linalg.hpp"

namespace envar::collapse {

using Rational = boost::rational<std::int64_t>;

struct MapCheck {
  std::string name;
  std::size_t dim = 0;
  double unitarity_defect = 0.0;
};

struct EvolutionAudit {
  std::vector<MapCheck> maps;
  /// von Neumann entropy (bits) of the joint state after each step. For a
  /// state vector ψ the joint density matrix ψψ† has the single eigenvalue
  /// ‖ψ‖², so this stays 0 exactly when evolution preserves the norm.
  std::vector<double> global_entropy;

  double max_unitarity_defect() const;
  double max_global_entropy() const;
};

// -- premeasurement ---------------------------------------------------------

enum class RecordMode { perfect, imperfect };

struct Branch {
  std::size_t pointer = 0;
  Complex amplitude;
};

/// A system entangled with N environment records. Factor 0 is the system,
/// factors 1..N the environment.
struct BranchingState {
  StateVector joint;
  std::size_t system_dim = 0;
  std::size_t env_count = 0;
  std::size_t env_dim = 0;
  std::vector<Branch> branches;
  RecordMode mode = RecordMode::perfect;
  /// ⟨e_i|e_j⟩ of two distinct records on a single environment factor.
  double record_overlap = 0.0;
  EvolutionAudit audit;
};

/// Broadcasts the pointer index into `env_count` environment factors of the
/// system's dimension: |k⟩|0…0⟩ ↦ |k⟩|k…k⟩ by controlled shifts.
/// Throws BudgetExceeded when the joint dimension exceeds tol.max_total_dim.
BranchingState premeasure(const StateVector& system, std::size_t env_count,
                          const Tolerances& tol = kDefaultTolerances);

/// Qubit system, qubit records with overlap cos θ: |0⟩ ↦ |0⟩ and
/// |1⟩ ↦ cos θ|0⟩ + sin θ|1⟩ on each environment qubit.
BranchingState premeasure_imperfect(const StateVector& system, std::size_t env_count, double theta,
                                    const Tolerances& tol = kDefaultTolerances);

/// A GHZ-type branching state (|0⟩|0…0⟩ + |1⟩|1…1⟩)/√2 built by premeasure.
BranchingState ghz_branching(std::size_t env_count, const Tolerances& tol = kDefaultTolerances);

// -- Born rule from envariance ----------------------------------------------

/// Integer weights m_k ≥ 1 with Σ m_k = M.
class RationalWeights {
 public:
  /// Throws Error unless every m_k ≥ 1 and the sum equals `denominator`.
  RationalWeights(std::vector<std::int64_t> counts, std::int64_t denominator);

  const std::vector<std::int64_t>& counts() const noexcept { return counts_; }
  std::int64_t denominator() const noexcept { return denominator_; }
  std::size_t size() const noexcept { return counts_.size(); }

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t denominator_;
};

struct WeightApproximation {
  RationalWeights weights;
  /// max_k |p_k − m_k/M|.
  double max_error;
};

/// Rounds probabilities to counts over `denominator` (largest remainder,
/// every count at least 1). The achieved error is returned, not assumed.
WeightApproximation approximate_weights(std::span<const double> probabilities, std::int64_t denominator);

struct TranspositionCheck {
  std::size_t first = 0;
  std::size_t second = 0;
  double residual = 0.0;
};

struct BornResult {
  std::vector<Rational> probabilities;
  /// Squared Schmidt coefficients of Σ √(m_k/M)|s_k⟩|e_k⟩, descending.
  Eigen::VectorXd squared_schmidt;
  /// Factors (S, C, E, A): system, counterpart, environment, fine-graining ancilla.
  StateVector fine_grained;
  Dims register_dims;
  /// max over the M fine-grained branches of |amplitude − 1/√M|, and the
  /// norm of everything outside those branches.
  double amplitude_deviation = 0.0;
  double stray_norm = 0.0;
  std::vector<TranspositionCheck> transpositions;
  EvolutionAudit audit;
};

/// Prepares Σ_k √(m_k/M)|s_k⟩|e_k⟩, splits each environment record into m_k
/// equal-amplitude branches with an ancilla of dimension M, and correlates a
/// counterpart register C (dimension max m_k) with the branch label. The
/// result has M equal Schmidt coefficients across (S⊗C | E⊗A); every branch
/// transposition on S⊗C is checked to be undone on E⊗A.
BornResult born_from_envariance(const RationalWeights& weights, const Tolerances& tol = kDefaultTolerances);

// -- quantum Darwinism ------------------------------------------------------

struct CurvePoint {
  std::size_t fragment_size = 0;
  double mean_information = 0.0;  // bits
  std::size_t samples = 0;
};

struct MutualInformationCurve {
  std::vector<CurvePoint> points;  // f = 0 … N
  double system_entropy = 0.0;
  std::size_t env_count = 0;
};

/// I(S:F) = H(S) + H(F) − H(SF); `fragment` lists environment indices 0…N−1.
double mutual_information(const BranchingState& state, std::span<const std::size_t> fragment,
                          const Tolerances& tol = kDefaultTolerances);

/// Averages I(S:F) over fragments of each size. All C(N, f) fragments are used
/// when C(N, f) ≤ samples_per_size, otherwise samples_per_size distinct
/// fragments drawn uniformly with seed derive_seed(seed, f).
MutualInformationCurve darwinism_curve(const BranchingState& state, std::size_t samples_per_size,
                                       std::uint64_t seed, const Tolerances& tol = kDefaultTolerances);

/// N / f_δ with f_δ the smallest f ≥ 1 whose mean information reaches
/// (1 − δ)·H_S; 0 when no fragment does or H_S is 0.
double redundancy(const MutualInformationCurve& curve, double delta);

/// Writes `f,mean_I_bits,samples,H_S` rows.
void write_curve_csv(std::ostream& out, const MutualInformationCurve& curve);

// -- no-hiding --------------------------------------------------------------

/// Unitary on S ⊗ A1 ⊗ A2 (each of dimension d, ancilla A = A1 ⊗ A2 of
/// dimension d²): prepares both ancilla halves in uniform superposition, then
/// applies X^k controlled by A1 and Z^l controlled by A2 to S.
Operator bleaching_unitary(std::size_t d);

/// Unitary on A1 ⊗ A2 alone that leaves S maximally entangled with A1 and the
/// input state in A2.
Operator recovery_unitary(std::size_t d);

struct BleachResult {
  StateVector joint;  // factors (S, A1, A2)
  DensityMatrix system_state;
  std::size_t ancilla_dim = 0;
  EvolutionAudit audit;
};

BleachResult bleach(const StateVector& psi, const Tolerances& tol = kDefaultTolerances);

struct RecoveryResult {
  /// The input state as found in A2 after the ancilla-only recovery map.
  StateVector ancilla_register;
  /// The same state moved into S by the final swap S ↔ A2.
  StateVector system;
  /// 1 − (largest squared Schmidt coefficient across S | A1 A2) after the
  /// swap; 0 when S holds a pure state unentangled from the ancilla.
  double product_defect = 0.0;
  EvolutionAudit audit;
};

RecoveryResult recover(const StateVector& joint, const Tolerances& tol = kDefaultTolerances);

}  // namespace envar::collapse
