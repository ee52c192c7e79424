#include "envar/envariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace envar {

namespace {

Eigen::VectorXcd kron_vec(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  Eigen::VectorXcd out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

Dims pair_dims(std::size_t dp, std::size_t dn, std::size_t da) {
  return da == 1 ? Dims{dp, dn} : Dims{dp, dn, da};
}

Eigen::MatrixXcd block_haar(const std::vector<std::pair<std::size_t, std::size_t>>& blocks, std::size_t dim,
                            std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto [begin, end] = blocks[b];
    const std::size_t size = end - begin;
    if (size == 0) continue;
    d.block(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(size),
            static_cast<Eigen::Index>(size)) = haar_unitary(size, derive_seed(seed, b)).matrix();
  }
  return d;
}

}  // namespace

// -- JointPairState ---------------------------------------------------------

JointPairState::JointPairState(const StateVector& joint, std::size_t dim_p, std::size_t dim_n,
                               std::size_t dim_ancilla)
    : joint_(joint.regrouped(pair_dims(dim_p, dim_n, dim_ancilla))),
      dim_p_(dim_p),
      dim_n_(dim_n),
      dim_ancilla_(dim_ancilla) {}

JointPairState::JointPairState(const StateVector& joint)
    : JointPairState(joint, joint.num_factors() >= 1 ? joint.factor_dims()[0] : 0,
                     joint.num_factors() >= 2 ? joint.factor_dims()[1] : 0,
                     joint.num_factors() == 3 ? joint.factor_dims()[2] : 1) {
  if (joint.num_factors() != 2 && joint.num_factors() != 3) {
    throw DimensionMismatch("a joint pair state needs 2 or 3 factors");
  }
}

JointPairState JointPairState::product(const StateVector& p, const StateVector& n) {
  return JointPairState(tensor(p, n), p.dim(), n.dim());
}

SchmidtDecomposition JointPairState::schmidt(const Tolerances& tol) const {
  return envar::schmidt(joint_, {dim_p_, dim_complement()}, tol);
}

Eigen::VectorXd JointPairState::spectrum(const Tolerances& tol) const { return schmidt(tol).coefficients; }

JointPairState JointPairState::with_ancilla(const StateVector& ancilla) const {
  const StateVector joint = tensor(joint_, ancilla);
  return JointPairState(joint, dim_p_, dim_n_, dim_ancilla_ * ancilla.dim());
}

JointPairState JointPairState::padded_ancilla(std::size_t dim_ancilla) const {
  if (dim_ancilla < dim_ancilla_) throw DimensionMismatch("cannot shrink an ancilla by padding");
  if (dim_ancilla == dim_ancilla_) return *this;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim_p_ * dim_n_ * dim_ancilla));
  for (std::size_t pn = 0; pn < dim_p_ * dim_n_; ++pn) {
    for (std::size_t a = 0; a < dim_ancilla_; ++a) {
      out(static_cast<Eigen::Index>(pn * dim_ancilla + a)) =
          joint_[pn * dim_ancilla_ + a];
    }
  }
  return JointPairState(StateVector(std::move(out), pair_dims(dim_p_, dim_n_, dim_ancilla)), dim_p_, dim_n_,
                        dim_ancilla);
}

// -- witnesses --------------------------------------------------------------

bool WitnessSet::accepted(const Tolerances& tol) const {
  if (!(residual <= tol.witness)) return false;
  if (!u_p.is_unitary(tol.unitarity) || !u_n.is_unitary(tol.unitarity)) return false;
  return !u_ancilla || u_ancilla->is_unitary(tol.unitarity);
}

std::vector<std::pair<std::size_t, std::size_t>> degenerate_blocks(const Eigen::VectorXd& coefficients,
                                                                   const Tolerances& tol) {
  std::vector<std::pair<std::size_t, std::size_t>> blocks;
  const auto n = static_cast<std::size_t>(coefficients.size());
  std::size_t begin = 0;
  while (begin < n) {
    const double head = coefficients(static_cast<Eigen::Index>(begin));
    std::size_t end = begin + 1;
    if (head <= tol.rank_cutoff) {
      end = n;
    } else {
      while (end < n && std::abs(coefficients(static_cast<Eigen::Index>(end)) - head) <= tol.degeneracy &&
             coefficients(static_cast<Eigen::Index>(end)) > tol.rank_cutoff) {
        ++end;
      }
    }
    blocks.emplace_back(begin, end);
    begin = end;
  }
  return blocks;
}

std::pair<Operator, Operator> synthesize_envariant(const JointPairState& psi, const PhaseSpec& spec,
                                                   const Tolerances& tol) {
  const SchmidtDecomposition sd = psi.schmidt(tol);
  const std::size_t r = sd.rank(tol.rank_cutoff);
  if (spec.phases.size() != r || (!spec.integer_shifts.empty() && spec.integer_shifts.size() != r)) {
    throw RankMismatch("phase list has " + std::to_string(spec.phases.size()) + " phases for Schmidt rank " +
                       std::to_string(r));
  }
  const auto rr = static_cast<Eigen::Index>(r);
  const Eigen::MatrixXcd a = sd.left_basis.leftCols(rr);
  const Eigen::MatrixXcd b = sd.right_basis.leftCols(rr);

  Eigen::VectorXcd forward(rr);
  Eigen::VectorXcd backward(rr);
  for (Eigen::Index k = 0; k < rr; ++k) {
    const double phi = spec.phases[static_cast<std::size_t>(k)];
    forward(k) = std::polar(1.0, phi) - 1.0;
    // e^{−i(φ + 2πl)} = e^{−iφ} exactly; the shift is not evaluated numerically.
    backward(k) = std::polar(1.0, -phi) - 1.0;
  }
  const auto dp = static_cast<Eigen::Index>(psi.dim_p());
  const auto dc = static_cast<Eigen::Index>(psi.dim_complement());
  Operator u_p(Eigen::MatrixXcd::Identity(dp, dp) + a * forward.asDiagonal() * a.adjoint());
  Operator u_n(Eigen::MatrixXcd::Identity(dc, dc) + b * backward.asDiagonal() * b.adjoint());
  return {std::move(u_p), std::move(u_n)};
}

WitnessSet undo_on_n(const JointPairState& psi, const Operator& u_p, const Tolerances& tol) {
  return undo_on_n(psi, psi.schmidt(tol), u_p, tol);
}

WitnessSet undo_on_n(const JointPairState& psi, const SchmidtDecomposition& sd, const Operator& u_p,
                     const Tolerances& tol) {
  if (u_p.dim() != psi.dim_p()) throw DimensionMismatch("U_p does not act on the p factor");
  if (sd.cut != std::pair{psi.dim_p(), psi.dim_complement()}) {
    throw DimensionMismatch("Schmidt decomposition is for a different cut");
  }
  const auto r = static_cast<Eigen::Index>(sd.rank(tol.rank_cutoff));
  const Eigen::VectorXd lambda = sd.coefficients.head(r);
  const Eigen::MatrixXcd a = sd.left_basis.leftCols(r);
  const Eigen::MatrixXcd b = sd.right_basis.leftCols(r);

  const Eigen::MatrixXcd ua = u_p.matrix() * a;
  Eigen::MatrixXcd g = a.adjoint() * ua;

  for (Eigen::Index k = 0; k < r; ++k) {
    if ((ua.col(k) - a * g.col(k)).norm() > tol.witness) {
      throw NotEnvariant("U_p moves the Schmidt vector with coefficient " + std::to_string(lambda(k)) +
                             " off the Schmidt support",
                         lambda(k), 0.0);
    }
  }
  const auto blocks = degenerate_blocks(lambda, tol);
  std::vector<std::size_t> block_of(static_cast<std::size_t>(r));
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    for (std::size_t k = blocks[bi].first; k < blocks[bi].second; ++k) block_of[k] = bi;
  }
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) {
      if (block_of[static_cast<std::size_t>(i)] == block_of[static_cast<std::size_t>(j)]) continue;
      if (std::abs(g(i, j)) > tol.witness) {
        throw NotEnvariant("U_p mixes Schmidt coefficients " + std::to_string(lambda(i)) + " and " +
                               std::to_string(lambda(j)),
                           lambda(i), lambda(j));
      }
      g(i, j) = 0.0;
    }
  }

  const auto dc = static_cast<Eigen::Index>(psi.dim_complement());
  Operator u_n(b * g.conjugate() * b.adjoint() + Eigen::MatrixXcd::Identity(dc, dc) - b * b.adjoint());
  const Eigen::VectorXcd& amps = psi.joint().amplitudes();
  const double residual = (apply_bipartite(amps, u_p.matrix(), u_n.matrix()) - amps).norm();
  return WitnessSet{u_p, std::move(u_n), std::nullopt, std::nullopt, residual, 0};
}

Operator sample_envariant_unitary(const JointPairState& psi, std::uint64_t seed, const Tolerances& tol) {
  const SchmidtDecomposition sd = psi.schmidt(tol);
  const std::size_t r = sd.rank(tol.rank_cutoff);
  const std::size_t dp = psi.dim_p();
  const Eigen::MatrixXcd full = complete_basis(sd.left_basis.leftCols(static_cast<Eigen::Index>(r)));

  auto blocks = degenerate_blocks(sd.coefficients.head(static_cast<Eigen::Index>(r)), tol);
  if (r < dp) blocks.emplace_back(r, dp);  // kernel of the reduced state
  const Eigen::MatrixXcd d = block_haar(blocks, dp, seed);
  return Operator(full * d * full.adjoint());
}

JointPairState related_state(const JointPairState& psi, std::uint64_t seed, const Tolerances& tol) {
  const Operator p = sample_envariant_unitary(psi, derive_seed(seed, 0), tol);
  const Operator b = haar_unitary(psi.dim_complement(), derive_seed(seed, 1));
  const StateVector moved(apply_bipartite(psi.joint().amplitudes(), p.matrix(), b.matrix()),
                          psi.joint().factor_dims());
  return JointPairState(moved, psi.dim_p(), psi.dim_n(), psi.dim_ancilla());
}

Operator stabilizer_unitary(const StateVector& ancilla, std::uint64_t seed) {
  const std::size_t d = ancilla.dim();
  if (d == 1) return Operator::identity(1);
  const Eigen::MatrixXcd full = complete_basis(ancilla.amplitudes());
  const Eigen::MatrixXcd d_mat = block_haar({{0, 1}, {1, d}}, d, seed);
  // The leading 1×1 block is a Haar phase; pin it to 1 so |ξ⟩ is fixed.
  Eigen::MatrixXcd fixed = d_mat;
  fixed(0, 0) = 1.0;
  return Operator(full * fixed * full.adjoint());
}

// -- equivalence ------------------------------------------------------------

EquivalenceVerdict pair_equivalent(const JointPairState& x, const JointPairState& y, std::size_t trials,
                                   std::uint64_t seed, QuantifierMode mode, const Tolerances& tol) {
  EquivalenceVerdict v;
  v.trials = trials;
  v.mode = mode;
  if (x.dim_p() != y.dim_p() || x.dim_n() != y.dim_n()) {
    v.spectrum_x = x.spectrum(tol);
    v.spectrum_y = y.spectrum(tol);
    v.spectrum_gap = std::numeric_limits<double>::infinity();
    v.detail = "(d_p, d_n) differ: (" + std::to_string(x.dim_p()) + "," + std::to_string(x.dim_n()) +
               ") vs (" + std::to_string(y.dim_p()) + "," + std::to_string(y.dim_n()) + ")";
    return v;
  }
  const std::size_t da = std::max(x.dim_ancilla(), y.dim_ancilla());
  const JointPairState xs = x.padded_ancilla(da);
  const JointPairState ys = y.padded_ancilla(da);

  const SchmidtDecomposition sx = xs.schmidt(tol);
  const SchmidtDecomposition sy = ys.schmidt(tol);
  v.spectrum_x = sx.coefficients;
  v.spectrum_y = sy.coefficients;
  v.spectrum_gap = (sx.coefficients - sy.coefficients).cwiseAbs().maxCoeff();
  if (!(v.spectrum_gap <= tol.spectrum)) {
    v.detail = "Schmidt spectra differ by " + std::to_string(v.spectrum_gap);
    return v;
  }

  Operator map_p(complete_basis(sx.left_basis) * complete_basis(sy.left_basis).adjoint());
  Operator map_n(complete_basis(sx.right_basis) * complete_basis(sy.right_basis).adjoint());
  const Eigen::VectorXcd& xa = xs.joint().amplitudes();
  const Eigen::VectorXcd& ya = ys.joint().amplitudes();
  v.map_residual = (apply_bipartite(ya, map_p.matrix(), map_n.matrix()) - xa).norm();
  bool ok = v.map_residual <= tol.witness && map_p.is_unitary(tol.unitarity) && map_n.is_unitary(tol.unitarity);

  for (std::size_t t = 0; t < trials; ++t) {
    const std::uint64_t s = derive_seed(seed, t);
    v.trial_seeds.push_back(s);
    Operator u_p = mode == QuantifierMode::envariant_subgroup
                       ? sample_envariant_unitary(xs, s, tol) * map_p
                       : haar_unitary(xs.dim_p(), s);
    try {
      const WitnessSet undo = undo_on_n(xs, u_p * map_p.adjoint(), tol);
      Operator u_n = undo.u_n * map_n;
      const double residual = (apply_bipartite(ya, u_p.matrix(), u_n.matrix()) - xa).norm();
      WitnessSet w{std::move(u_p), std::move(u_n), std::nullopt, std::nullopt, residual, s};
      ok = ok && w.accepted(tol);
      v.witnesses.push_back(std::move(w));
    } catch (const NotEnvariant&) {
      ++v.not_envariant_count;
      ok = false;
    }
  }
  v.map_p = std::move(map_p);
  v.map_n = std::move(map_n);
  v.related = ok;
  if (!ok) {
    v.detail = v.not_envariant_count > 0
                   ? std::to_string(v.not_envariant_count) + " sampled U_p admitted no U_n"
                   : "a witness residual exceeded tolerance";
  }
  return v;
}

// -- Link -------------------------------------------------------------------

Link::Link(JointPairState target, JointPairState source, StateVector ancilla, Operator ancilla_op,
           Operator map_p, Operator map_n, const Tolerances& tol)
    : target_(std::move(target)),
      source_(std::move(source)),
      ancilla_(std::move(ancilla)),
      ancilla_op_(std::move(ancilla_op)),
      map_p_(std::move(map_p)),
      map_n_(std::move(map_n)),
      tol_(tol) {}

Link Link::make(const JointPairState& target, const JointPairState& source, const StateVector& ancilla,
                const Operator& ancilla_op, const Tolerances& tol) {
  if (target.dim_ancilla() != 1 || source.dim_ancilla() != 1) {
    throw DimensionMismatch("link states carry their ancilla separately");
  }
  if (ancilla_op.dim() != ancilla.dim()) throw DimensionMismatch("ancilla operator does not act on the ancilla");
  if (!ancilla_op.is_unitary(tol.unitarity)) throw Error("ancilla operator is not unitary");
  if ((ancilla_op.matrix() * ancilla.amplitudes() - ancilla.amplitudes()).norm() > tol.witness) {
    throw Error("ancilla operator does not fix the ancilla state");
  }
  EquivalenceVerdict v = pair_equivalent(target, source, 0, 0, QuantifierMode::envariant_subgroup, tol);
  if (!v.related) throw Error("states are not related: " + v.detail);
  const StateVector flat_ancilla = ancilla.regrouped(Dims{ancilla.dim()});
  return Link(target, source, flat_ancilla, ancilla_op, std::move(*v.map_p), std::move(*v.map_n), tol);
}

Link Link::make(const JointPairState& target, const JointPairState& source, const Tolerances& tol) {
  return make(target, source, StateVector::basis(1, 0), Operator::identity(1), tol);
}

WitnessSet Link::witness_for(const Operator& u_p) const {
  if (u_p.dim() != target_.dim_p()) throw DimensionMismatch("U_p does not act on the p factor");
  const WitnessSet undo = undo_on_n(target_, u_p * map_p_.adjoint(), tol_);
  Operator u_n = undo.u_n * map_n_;
  const Eigen::VectorXcd lhs = kron_vec(target_.joint().amplitudes(), ancilla_.amplitudes());
  const Eigen::VectorXcd rhs = kron_vec(apply_bipartite(source_.joint().amplitudes(), u_p.matrix(), u_n.matrix()),
                                        ancilla_op_.matrix() * ancilla_.amplitudes());
  return WitnessSet{u_p, std::move(u_n), ancilla_op_, ancilla_, (lhs - rhs).norm(), 0};
}

Operator Link::sample_admissible_p(std::uint64_t seed) const {
  return sample_envariant_unitary(target_, seed, tol_) * map_p_;
}

WitnessSet symmetry_witness(const Link& forward, const Operator& v_p) {
  const WitnessSet fw = forward.witness_for(v_p.adjoint());
  Operator v_n = fw.u_n.adjoint();
  Operator v_anc = forward.ancilla_op().adjoint();
  const Eigen::VectorXcd& xi = forward.ancilla().amplitudes();
  const Eigen::VectorXcd lhs = kron_vec(forward.source().joint().amplitudes(), xi);
  const Eigen::VectorXcd rhs = kron_vec(
      apply_bipartite(forward.target().joint().amplitudes(), v_p.matrix(), v_n.matrix()), v_anc.matrix() * xi);
  return WitnessSet{v_p, std::move(v_n), std::move(v_anc), forward.ancilla(), (lhs - rhs).norm(), 0};
}

WitnessSet transitivity_witness(const Link& first, const Link& second, const Operator& w_p) {
  const std::size_t dp = first.target().dim_p();
  const std::size_t dn = first.target().dim_n();
  if (second.target().dim_p() != dp || second.target().dim_n() != dn) {
    throw DimensionMismatch("chained links act on different (d_p, d_n)");
  }
  if (w_p.dim() != dp) throw DimensionMismatch("W_p does not act on the p factor");

  const WitnessSet u = first.witness_for(w_p);   // W_n = U_n(W_p)
  const WitnessSet v = second.witness_for(w_p);  // V_n(W_p)
  const std::size_t dxi = first.ancilla().dim();
  const std::size_t deta = second.ancilla().dim();

  const Operator chi_ops[] = {v.u_n, w_p, first.ancilla_op(), second.ancilla_op()};
  Operator w_chi = kron(chi_ops);

  const Dims six{dp, dn, dxi, dp, dn, deta};
  // Slots of X = (a, d, ξ, c, f, η) and Y = (c, b, ξ, e, d, η).
  const StateVector x = tensor(tensor(first.target().joint(), first.ancilla()),
                               tensor(second.target().joint(), second.ancilla()))
                            .regrouped(six);
  const StateVector y = tensor(tensor(first.source().joint(), first.ancilla()),
                               tensor(second.source().joint(), second.ancilla()))
                            .regrouped(six);

  const std::size_t lhs_order[] = {0, 4, 1, 3, 2, 5};  // a, f, d, c, ξ, η
  const std::size_t rhs_order[] = {3, 1, 4, 0, 2, 5};  // e, b, d, c, ξ, η  = e ⊗ b ⊗ χ
  const StateVector lhs = permute_factors(x, lhs_order);
  const StateVector rhs_in = permute_factors(y, rhs_order);

  StateVector rhs = apply_on_factor(rhs_in, 0, w_p);
  rhs = apply_on_factor(rhs, 1, u.u_n);
  const std::size_t chi_slots[] = {2, 3, 4, 5};
  rhs = apply_on_factors(rhs, chi_slots, w_chi);
  // rhs now holds (c, d, f, a, ξ, η); bring it to the left-hand order.
  const std::size_t reorder[] = {3, 2, 1, 0, 4, 5};
  const StateVector rhs_aligned = permute_factors(rhs, reorder);
  const double residual = (lhs.amplitudes() - rhs_aligned.amplitudes()).norm();

  std::optional<StateVector> chi;
  const std::size_t chi_dim = dn * dp * dxi * deta;
  const SchmidtDecomposition split = schmidt(rhs_in, {dp * dn, chi_dim});
  if (split.rank(first.tolerances().rank_cutoff) == 1) {
    chi = StateVector(split.right_basis.col(0), Dims{dn, dp, dxi, deta});
  }
  return WitnessSet{w_p, u.u_n, std::move(w_chi), std::move(chi), residual, 0};
}

// -- CompositionMonoid ------------------------------------------------------

JointPairState CompositionMonoid::identity() const {
  return JointPairState(StateVector(Eigen::VectorXcd::Ones(1), Dims{1, 1}), 1, 1);
}

JointPairState CompositionMonoid::combine(const JointPairState& a, const JointPairState& b) const {
  if (a.dim_ancilla() != 1 || b.dim_ancilla() != 1) throw DimensionMismatch("composition expects no ancilla");
  const StateVector t = tensor(a.joint().regrouped({a.dim_p(), a.dim_n()}), b.joint().regrouped({b.dim_p(), b.dim_n()}));
  const std::size_t order[] = {0, 2, 1, 3};
  const StateVector grouped = permute_factors(t, order);
  const std::size_t dp = a.dim_p() * b.dim_p();
  const std::size_t dn = a.dim_n() * b.dim_n();
  return JointPairState(grouped.regrouped({dp, dn}), dp, dn);
}

bool CompositionMonoid::equal(const JointPairState& a, const JointPairState& b) const {
  if (a.dim_p() != b.dim_p() || a.dim_n() != b.dim_n()) return false;
  return pair_equivalent(a, b, trials, seed, QuantifierMode::envariant_subgroup, tol).related;
}

}  // namespace envar
