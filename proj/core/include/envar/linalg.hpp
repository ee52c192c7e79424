#pragma once

// Dense complex linear algebra over multi-factor finite-dimensional spaces.
//
// Flattening convention: row-major over factor order, leftmost factor most
// significant. For factor_dims (d0, d1, d2) the digit tuple (i0, i1, i2) sits
// at index (i0 * d1 + i1) * d2 + i2. Every routine in this library and the
// JSON format use this convention.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "envar/errors.hpp"

namespace envar {

using Complex = std::complex<double>;
using Dims = std::vector<std::size_t>;

/// Every numeric threshold used by the library, in one place.
struct Tolerances {
  double normalization = 1e-12;    // |‖ψ‖ − 1| after construction
  double unitarity = 1e-10;        // ‖U†U − I‖_max
  double schmidt = 1e-10;          // Σλ² = 1, basis orthonormality, reconstruction
  double rank_cutoff = 1e-12;      // singular values at or below are zero
  double density = 1e-10;          // hermiticity, unit trace, eigenvalue floor
  double entropy_floor = 1e-14;    // eigenvalues at or below contribute nothing
  double spectrum = 1e-9;          // Schmidt spectrum equality
  double degeneracy = 1e-9;        // coefficients closer than this share a block
  double witness = 1e-9;           // accepted witness residual
  std::size_t max_total_dim = std::size_t{1} << 14;
};

inline constexpr Tolerances kDefaultTolerances{};

std::size_t product(const Dims& dims);

/// Splits a flat index into per-factor digits.
std::vector<std::size_t> unflatten(std::size_t index, const Dims& dims);
std::size_t flatten(std::span<const std::size_t> digits, const Dims& dims);

/// Mixes a base seed with an index (splitmix64); used for per-trial seeds so
/// results do not depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

class StateVector {
 public:
  /// Normalizes on construction. Throws DimensionMismatch when the factor
  /// dimensions do not multiply to the amplitude count, Error on a zero vector.
  StateVector(Eigen::VectorXcd amplitudes, Dims factor_dims);
  explicit StateVector(Eigen::VectorXcd amplitudes);

  static StateVector basis(std::size_t dim, std::size_t index);
  static StateVector basis(const Dims& dims, std::span<const std::size_t> digits);

  const Eigen::VectorXcd& amplitudes() const noexcept { return amplitudes_; }
  const Dims& factor_dims() const noexcept { return factor_dims_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(amplitudes_.size()); }
  std::size_t num_factors() const noexcept { return factor_dims_.size(); }
  Complex operator[](std::size_t i) const { return amplitudes_(static_cast<Eigen::Index>(i)); }

  /// ⟨this|other⟩.
  Complex inner(const StateVector& other) const;

  /// Same amplitudes viewed under a different factorization.
  StateVector regrouped(Dims factor_dims) const;

 private:
  Eigen::VectorXcd amplitudes_;
  Dims factor_dims_;
};

class Operator {
 public:
  explicit Operator(Eigen::MatrixXcd entries);

  static Operator identity(std::size_t dim);

  const Eigen::MatrixXcd& matrix() const noexcept { return entries_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(entries_.rows()); }

  Operator adjoint() const { return Operator(entries_.adjoint()); }

  /// ‖U†U − I‖_max.
  double unitarity_defect() const;
  bool is_unitary(double tol = kDefaultTolerances.unitarity) const {
    return unitarity_defect() <= tol;
  }

  friend Operator operator*(const Operator& a, const Operator& b) {
    return Operator(a.entries_ * b.entries_);
  }

 private:
  Eigen::MatrixXcd entries_;
};

Operator kron(const Operator& a, const Operator& b);
Operator kron(std::span<const Operator> factors);

/// Permutation unitary on the factors: output factor i is input factor perm[i].
Operator factor_permutation(const Dims& dims, std::span<const std::size_t> perm);

class DensityMatrix {
 public:
  /// Validates hermiticity, unit trace and positivity against `tol.density`.
  explicit DensityMatrix(Eigen::MatrixXcd entries, const Tolerances& tol = kDefaultTolerances);
  static DensityMatrix pure(const StateVector& psi);

  const Eigen::MatrixXcd& matrix() const noexcept { return entries_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(entries_.rows()); }

  /// Eigenvalues in ascending order.
  Eigen::VectorXd eigenvalues() const;

 private:
  Eigen::MatrixXcd entries_;
};

struct SchmidtDecomposition {
  Eigen::VectorXd coefficients;  // descending, length min(dl, dr)
  Eigen::MatrixXcd left_basis;   // dl × min(dl, dr), orthonormal columns a_i
  Eigen::MatrixXcd right_basis;  // dr × min(dl, dr), orthonormal columns b_i
  std::pair<std::size_t, std::size_t> cut;

  /// Number of coefficients above the cutoff.
  std::size_t rank(double cutoff = kDefaultTolerances.rank_cutoff) const;

  /// Σ λ_i a_i ⊗ b_i as a flat amplitude vector.
  Eigen::VectorXcd reconstruct() const;
};

// -- tensor structure -------------------------------------------------------

StateVector tensor(const StateVector& u, const StateVector& v);

/// Reorders factors: output factor i is input factor perm[i].
StateVector permute_factors(const StateVector& psi, std::span<const std::size_t> perm);

/// Raw forms of the two operations above; no renormalization happens, so a
/// non-unitary `op` shows up as a norm change.
Eigen::VectorXcd permute_amplitudes(const Eigen::VectorXcd& amplitudes, const Dims& dims,
                                    std::span<const std::size_t> perm);
Eigen::VectorXcd apply_on_factors(const Eigen::VectorXcd& amplitudes, const Dims& dims,
                                  std::span<const std::size_t> targets, const Eigen::MatrixXcd& op);

/// Applies `op` to the listed factors (in the listed order), identity elsewhere.
StateVector apply_on_factors(const StateVector& psi, std::span<const std::size_t> targets,
                             const Operator& op);
StateVector apply_on_factor(const StateVector& psi, std::size_t target, const Operator& op);

/// Applies left ⊗ right across the cut (dim(left), dim(right)).
Eigen::VectorXcd apply_bipartite(const Eigen::VectorXcd& amplitudes, const Eigen::MatrixXcd& left,
                                 const Eigen::MatrixXcd& right);

/// Amplitudes as a dl × dr matrix, M(i, j) = ψ[i * dr + j].
Eigen::MatrixXcd reshape_bipartite(const Eigen::VectorXcd& amplitudes, std::size_t dl, std::size_t dr);

SchmidtDecomposition schmidt(const StateVector& psi, std::pair<std::size_t, std::size_t> cut,
                             const Tolerances& tol = kDefaultTolerances);

// -- reduced states and information measures --------------------------------

/// Reduced state on the kept factors, in ascending factor order.
DensityMatrix partial_trace(const StateVector& psi, std::span<const std::size_t> keep,
                            const Tolerances& tol = kDefaultTolerances);
DensityMatrix partial_trace(const DensityMatrix& rho, const Dims& dims,
                            std::span<const std::size_t> keep,
                            const Tolerances& tol = kDefaultTolerances);

/// von Neumann entropy in bits.
double entropy(const DensityMatrix& rho, const Tolerances& tol = kDefaultTolerances);
double entropy_of_spectrum(const Eigen::VectorXd& probabilities,
                           const Tolerances& tol = kDefaultTolerances);

/// Entropy of the kept factors of a pure state. Diagonalizes whichever side of
/// the cut is smaller, which is equivalent for pure states.
double subsystem_entropy(const StateVector& psi, std::span<const std::size_t> keep,
                         const Tolerances& tol = kDefaultTolerances);

/// min over φ of ‖a − e^{iφ} b‖ = √(2 − 2|⟨a|b⟩|).
double state_distance(const StateVector& a, const StateVector& b);
/// Frobenius norm of the difference.
double operator_distance(const Operator& a, const Operator& b);
/// ½‖ρ − σ‖₁.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);
/// |⟨a|b⟩|².
double fidelity(const StateVector& a, const StateVector& b);

// -- sampling ---------------------------------------------------------------

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// R's diagonal moved into Q.
Operator haar_unitary(std::size_t dim, std::uint64_t seed);
StateVector random_state(std::size_t dim, std::uint64_t seed);
StateVector random_state(const Dims& dims, std::uint64_t seed);

/// Extends d × r orthonormal columns to a d × d unitary whose leading columns
/// are exactly `columns`.
Eigen::MatrixXcd complete_basis(const Eigen::MatrixXcd& columns);

}  // namespace envar
