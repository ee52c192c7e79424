#include "envar/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace envar {

namespace {

using RowMajorMatrixXcd = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string dims_to_string(const Dims& dims) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << ')';
  return os.str();
}

Eigen::VectorXcd flatten_row_major(const Eigen::MatrixXcd& m) {
  RowMajorMatrixXcd rm = m;
  return Eigen::Map<const Eigen::VectorXcd>(rm.data(), rm.size());
}

void check_permutation(std::span<const std::size_t> perm, std::size_t n) {
  if (perm.size() != n) throw DimensionMismatch("permutation length does not match factor count");
  std::vector<bool> seen(n, false);
  for (std::size_t p : perm) {
    if (p >= n) throw IndexOutOfRange("permutation entry out of range");
    if (seen[p]) throw DimensionMismatch("permutation repeats a factor");
    seen[p] = true;
  }
}

// For each index of the permuted space, the index of the source space it reads.
std::vector<std::size_t> permutation_gather(const Dims& dims, std::span<const std::size_t> perm) {
  const std::size_t n = dims.size();
  Dims new_dims(n);
  for (std::size_t i = 0; i < n; ++i) new_dims[i] = dims[perm[i]];

  // Stride of each source factor in the source flattening.
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t i = n; i-- > 1;) stride[i - 1] = stride[i] * dims[i];

  const std::size_t total = product(dims);
  std::vector<std::size_t> gather(total);
  std::vector<std::size_t> digits(n, 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t src = 0;
    for (std::size_t i = 0; i < n; ++i) src += digits[i] * stride[perm[i]];
    gather[idx] = src;
    // Odometer increment over new_dims.
    for (std::size_t i = n; i-- > 0;) {
      if (++digits[i] < new_dims[i]) break;
      digits[i] = 0;
    }
  }
  return gather;
}

std::vector<std::size_t> normalized_subset(std::span<const std::size_t> keep, std::size_t n) {
  std::vector<std::size_t> out(keep.begin(), keep.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  for (std::size_t k : out) {
    if (k >= n) throw IndexOutOfRange("factor index " + std::to_string(k) + " out of range");
  }
  return out;
}

// keep (ascending) followed by the remaining factors (ascending).
std::vector<std::size_t> keep_first_order(const std::vector<std::size_t>& keep, std::size_t n) {
  std::vector<std::size_t> order = keep;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::binary_search(keep.begin(), keep.end(), i)) order.push_back(i);
  }
  return order;
}

}  // namespace

std::size_t product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

std::vector<std::size_t> unflatten(std::size_t index, const Dims& dims) {
  std::vector<std::size_t> digits(dims.size());
  for (std::size_t i = dims.size(); i-- > 0;) {
    digits[i] = index % dims[i];
    index /= dims[i];
  }
  return digits;
}

std::size_t flatten(std::span<const std::size_t> digits, const Dims& dims) {
  if (digits.size() != dims.size()) throw DimensionMismatch("digit count does not match factor count");
  std::size_t index = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (digits[i] >= dims[i]) throw IndexOutOfRange("digit exceeds factor dimension");
    index = index * dims[i] + digits[i];
  }
  return index;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// -- StateVector ------------------------------------------------------------

StateVector::StateVector(Eigen::VectorXcd amplitudes, Dims factor_dims)
    : amplitudes_(std::move(amplitudes)), factor_dims_(std::move(factor_dims)) {
  if (factor_dims_.empty()) throw DimensionMismatch("a state needs at least one factor");
  for (std::size_t d : factor_dims_) {
    if (d == 0) throw DimensionMismatch("factor dimensions must be positive");
  }
  if (product(factor_dims_) != static_cast<std::size_t>(amplitudes_.size())) {
    throw DimensionMismatch("factor dims " + dims_to_string(factor_dims_) + " do not multiply to " +
                            std::to_string(amplitudes_.size()));
  }
  const double norm = amplitudes_.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw Error("cannot normalize a zero or non-finite state");
  amplitudes_ /= norm;
}

StateVector::StateVector(Eigen::VectorXcd amplitudes)
    : StateVector(amplitudes, Dims{static_cast<std::size_t>(amplitudes.size())}) {}

StateVector StateVector::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) throw IndexOutOfRange("basis index out of range");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return StateVector(std::move(v), Dims{dim});
}

StateVector StateVector::basis(const Dims& dims, std::span<const std::size_t> digits) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(product(dims)));
  v(static_cast<Eigen::Index>(flatten(digits, dims))) = 1.0;
  return StateVector(std::move(v), dims);
}

Complex StateVector::inner(const StateVector& other) const {
  if (dim() != other.dim()) throw DimensionMismatch("inner product of states with different dimensions");
  return amplitudes_.dot(other.amplitudes_);  // Eigen's dot conjugates the left operand
}

StateVector StateVector::regrouped(Dims factor_dims) const {
  return StateVector(amplitudes_, std::move(factor_dims));
}

// -- Operator ---------------------------------------------------------------

Operator::Operator(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
    throw DimensionMismatch("operators must be non-empty square matrices");
  }
}

Operator Operator::identity(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return Operator(Eigen::MatrixXcd::Identity(n, n));
}

double Operator::unitarity_defect() const {
  const Eigen::MatrixXcd gram = entries_.adjoint() * entries_;
  return (gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

Operator kron(const Operator& a, const Operator& b) {
  return Operator(Eigen::kroneckerProduct(a.matrix(), b.matrix()).eval());
}

Operator kron(std::span<const Operator> factors) {
  if (factors.empty()) return Operator::identity(1);
  Eigen::MatrixXcd acc = factors.front().matrix();
  for (std::size_t i = 1; i < factors.size(); ++i) {
    acc = Eigen::kroneckerProduct(acc, factors[i].matrix()).eval();
  }
  return Operator(std::move(acc));
}

Operator factor_permutation(const Dims& dims, std::span<const std::size_t> perm) {
  check_permutation(perm, dims.size());
  const auto gather = permutation_gather(dims, perm);
  const auto n = static_cast<Eigen::Index>(gather.size());
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) p(i, static_cast<Eigen::Index>(gather[i])) = 1.0;
  return Operator(std::move(p));
}

// -- DensityMatrix ----------------------------------------------------------

DensityMatrix::DensityMatrix(Eigen::MatrixXcd entries, const Tolerances& tol)
    : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
    throw DimensionMismatch("density matrices must be non-empty and square");
  }
  const double herm = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol.density) throw Error("density matrix is not Hermitian");
  if (std::abs(entries_.trace() - Complex(1.0)) > tol.density) throw Error("density matrix trace is not 1");
  if (eigenvalues().minCoeff() < -tol.density) throw Error("density matrix has a negative eigenvalue");
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

Eigen::VectorXd DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(entries_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

// -- Schmidt ----------------------------------------------------------------

std::size_t SchmidtDecomposition::rank(double cutoff) const {
  return static_cast<std::size_t>((coefficients.array() > cutoff).count());
}

Eigen::VectorXcd SchmidtDecomposition::reconstruct() const {
  const Eigen::MatrixXcd m = left_basis * coefficients.cast<Complex>().asDiagonal() * right_basis.transpose();
  return flatten_row_major(m);
}

// -- tensor structure -------------------------------------------------------

StateVector tensor(const StateVector& u, const StateVector& v) {
  Eigen::VectorXcd out(u.amplitudes().size() * v.amplitudes().size());
  const Eigen::Index dv = v.amplitudes().size();
  for (Eigen::Index i = 0; i < u.amplitudes().size(); ++i) {
    out.segment(i * dv, dv) = u.amplitudes()(i) * v.amplitudes();
  }
  Dims dims = u.factor_dims();
  dims.insert(dims.end(), v.factor_dims().begin(), v.factor_dims().end());
  return StateVector(std::move(out), std::move(dims));
}

Eigen::VectorXcd permute_amplitudes(const Eigen::VectorXcd& amplitudes, const Dims& dims,
                                    std::span<const std::size_t> perm) {
  if (product(dims) != static_cast<std::size_t>(amplitudes.size())) {
    throw DimensionMismatch("factor dims do not match the amplitude count");
  }
  check_permutation(perm, dims.size());
  const auto gather = permutation_gather(dims, perm);
  Eigen::VectorXcd out(amplitudes.size());
  for (std::size_t i = 0; i < gather.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = amplitudes(static_cast<Eigen::Index>(gather[i]));
  }
  return out;
}

StateVector permute_factors(const StateVector& psi, std::span<const std::size_t> perm) {
  Eigen::VectorXcd out = permute_amplitudes(psi.amplitudes(), psi.factor_dims(), perm);
  Dims dims(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) dims[i] = psi.factor_dims()[perm[i]];
  return StateVector(std::move(out), std::move(dims));
}

Eigen::VectorXcd apply_on_factors(const Eigen::VectorXcd& amplitudes, const Dims& dims,
                                  std::span<const std::size_t> targets, const Eigen::MatrixXcd& op) {
  const std::size_t n = dims.size();
  std::vector<bool> is_target(n, false);
  std::size_t target_dim = 1;
  for (std::size_t t : targets) {
    if (t >= n) throw IndexOutOfRange("target factor out of range");
    if (is_target[t]) throw DimensionMismatch("target factors repeat");
    is_target[t] = true;
    target_dim *= dims[t];
  }
  if (static_cast<std::size_t>(op.rows()) != target_dim || op.rows() != op.cols()) {
    throw DimensionMismatch("operator dimension " + std::to_string(op.rows()) +
                            " does not match target dimension " + std::to_string(target_dim));
  }
  std::vector<std::size_t> order(targets.begin(), targets.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_target[i]) order.push_back(i);
  }
  std::vector<std::size_t> inverse(n);
  for (std::size_t i = 0; i < n; ++i) inverse[order[i]] = i;
  Dims front_dims(n);
  for (std::size_t i = 0; i < n; ++i) front_dims[i] = dims[order[i]];

  const Eigen::VectorXcd front = permute_amplitudes(amplitudes, dims, order);
  const std::size_t rest = static_cast<std::size_t>(amplitudes.size()) / target_dim;
  const Eigen::MatrixXcd m = op * reshape_bipartite(front, target_dim, rest);
  return permute_amplitudes(flatten_row_major(m), front_dims, inverse);
}

StateVector apply_on_factors(const StateVector& psi, std::span<const std::size_t> targets,
                             const Operator& op) {
  return StateVector(apply_on_factors(psi.amplitudes(), psi.factor_dims(), targets, op.matrix()),
                     psi.factor_dims());
}

StateVector apply_on_factor(const StateVector& psi, std::size_t target, const Operator& op) {
  const std::size_t t[] = {target};
  return apply_on_factors(psi, t, op);
}

Eigen::MatrixXcd reshape_bipartite(const Eigen::VectorXcd& amplitudes, std::size_t dl, std::size_t dr) {
  if (dl * dr != static_cast<std::size_t>(amplitudes.size())) {
    throw DimensionMismatch("cut (" + std::to_string(dl) + "," + std::to_string(dr) +
                            ") does not match dimension " + std::to_string(amplitudes.size()));
  }
  return Eigen::Map<const RowMajorMatrixXcd>(amplitudes.data(), static_cast<Eigen::Index>(dl),
                                             static_cast<Eigen::Index>(dr));
}

Eigen::VectorXcd apply_bipartite(const Eigen::VectorXcd& amplitudes, const Eigen::MatrixXcd& left,
                                 const Eigen::MatrixXcd& right) {
  const auto dl = static_cast<std::size_t>(left.rows());
  const auto dr = static_cast<std::size_t>(right.rows());
  return flatten_row_major(left * reshape_bipartite(amplitudes, dl, dr) * right.transpose());
}

SchmidtDecomposition schmidt(const StateVector& psi, std::pair<std::size_t, std::size_t> cut,
                             const Tolerances& tol) {
  const auto [dl, dr] = cut;
  const Eigen::MatrixXcd m = reshape_bipartite(psi.amplitudes(), dl, dr);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);

  SchmidtDecomposition out;
  out.coefficients = svd.singularValues();
  out.left_basis = svd.matrixU();
  out.right_basis = svd.matrixV().conjugate();
  out.cut = cut;
  for (Eigen::Index i = 0; i < out.coefficients.size(); ++i) {
    if (out.coefficients(i) <= tol.rank_cutoff) out.coefficients(i) = 0.0;
  }
  return out;
}

// -- reduced states ---------------------------------------------------------

DensityMatrix partial_trace(const StateVector& psi, std::span<const std::size_t> keep,
                            const Tolerances& tol) {
  const auto kept = normalized_subset(keep, psi.num_factors());
  if (kept.empty()) throw IndexOutOfRange("partial trace must keep at least one factor");
  const auto order = keep_first_order(kept, psi.num_factors());
  const StateVector front = permute_factors(psi, order);
  std::size_t dk = 1;
  for (std::size_t k : kept) dk *= psi.factor_dims()[k];
  const Eigen::MatrixXcd m = reshape_bipartite(front.amplitudes(), dk, psi.dim() / dk);
  return DensityMatrix(m * m.adjoint(), tol);
}

DensityMatrix partial_trace(const DensityMatrix& rho, const Dims& dims, std::span<const std::size_t> keep,
                            const Tolerances& tol) {
  if (product(dims) != rho.dim()) throw DimensionMismatch("factor dims do not match density matrix");
  const auto kept = normalized_subset(keep, dims.size());
  if (kept.empty()) throw IndexOutOfRange("partial trace must keep at least one factor");
  const auto order = keep_first_order(kept, dims.size());
  const auto gather = permutation_gather(dims, order);
  std::size_t dk = 1;
  for (std::size_t k : kept) dk *= dims[k];
  const std::size_t dr = rho.dim() / dk;

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  for (std::size_t i = 0; i < dk; ++i) {
    for (std::size_t j = 0; j < dk; ++j) {
      Complex acc = 0.0;
      for (std::size_t r = 0; r < dr; ++r) {
        acc += rho.matrix()(static_cast<Eigen::Index>(gather[i * dr + r]),
                            static_cast<Eigen::Index>(gather[j * dr + r]));
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
    }
  }
  return DensityMatrix(std::move(out), tol);
}

double entropy_of_spectrum(const Eigen::VectorXd& probabilities, const Tolerances& tol) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    const double p = probabilities(i);
    if (p > tol.entropy_floor) h -= p * std::log2(p);
  }
  return h;
}

double entropy(const DensityMatrix& rho, const Tolerances& tol) {
  return entropy_of_spectrum(rho.eigenvalues(), tol);
}

double subsystem_entropy(const StateVector& psi, std::span<const std::size_t> keep, const Tolerances& tol) {
  const auto kept = normalized_subset(keep, psi.num_factors());
  if (kept.empty() || kept.size() == psi.num_factors()) return 0.0;
  std::size_t dk = 1;
  for (std::size_t k : kept) dk *= psi.factor_dims()[k];
  if (dk * dk <= psi.dim()) return entropy(partial_trace(psi, kept, tol), tol);

  std::vector<std::size_t> complement;
  for (std::size_t i = 0; i < psi.num_factors(); ++i) {
    if (!std::binary_search(kept.begin(), kept.end(), i)) complement.push_back(i);
  }
  return entropy(partial_trace(psi, complement, tol), tol);
}

// -- distances --------------------------------------------------------------

double state_distance(const StateVector& a, const StateVector& b) {
  const double overlap = std::min(1.0, std::abs(a.inner(b)));
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * overlap));
}

double operator_distance(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("operator distance between different dimensions");
  return (a.matrix() - b.matrix()).norm();
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("trace distance between different dimensions");
  const Eigen::MatrixXcd diff = rho.matrix() - sigma.matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(diff, Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

double fidelity(const StateVector& a, const StateVector& b) { return std::norm(a.inner(b)); }

// -- sampling ---------------------------------------------------------------

Operator haar_unitary(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw DimensionMismatch("haar_unitary needs dim >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXcd z(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      z(i, j) = Complex(re, im);
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    const double mag = std::abs(d);
    q.col(j) *= (mag > 0.0) ? d / mag : Complex(1.0);
  }
  return Operator(std::move(q));
}

StateVector random_state(std::size_t dim, std::uint64_t seed) { return random_state(Dims{dim}, seed); }

StateVector random_state(const Dims& dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(product(dims)));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v(i) = Complex(re, im);
  }
  return StateVector(std::move(v), dims);
}

Eigen::MatrixXcd complete_basis(const Eigen::MatrixXcd& columns) {
  const Eigen::Index d = columns.rows();
  const Eigen::Index r = columns.cols();
  if (r > d) throw DimensionMismatch("more orthonormal columns than the space dimension");
  if (r == 0) return Eigen::MatrixXcd::Identity(d, d);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(columns);
  Eigen::MatrixXcd full = qr.householderQ();
  full.leftCols(r) = columns;
  return full;
}

}  // namespace envar
