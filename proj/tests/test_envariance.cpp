#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "envar/envariance.hpp"
#include "support/oracles.hpp"

using namespace envar;

namespace {

JointPairState bell() {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
  v(0) = v(3) = 1.0;
  return JointPairState(StateVector(v, {2, 2}));
}

/// Σ_k coefficients[k] |k⟩|k⟩ rotated by local unitaries from `g`.
JointPairState with_spectrum(const std::vector<double>& coefficients, std::size_t dp, std::size_t dn,
                             oracle::Gen& g) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dp), static_cast<Eigen::Index>(dn));
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = coefficients[k];
  }
  const Eigen::MatrixXcd rotated = g.unitary(dp) * m * g.unitary(dn).transpose();
  Eigen::VectorXcd v(static_cast<Eigen::Index>(dp * dn));
  for (std::size_t i = 0; i < dp; ++i)
    for (std::size_t j = 0; j < dn; ++j)
      v(static_cast<Eigen::Index>(i * dn + j)) = rotated(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return JointPairState(StateVector(v, {dp, dn}));
}

double restoration(const JointPairState& psi, const Operator& u_p, const Operator& u_n) {
  const Eigen::VectorXcd& a = psi.joint().amplitudes();
  return (apply_bipartite(a, u_p.matrix(), u_n.matrix()) - a).norm();
}

}  // namespace

TEST(JointPairState, FactorsAndSpectrum) {
  const JointPairState b = bell();
  EXPECT_EQ(b.dim_p(), 2u);
  EXPECT_EQ(b.dim_n(), 2u);
  EXPECT_EQ(b.dim_ancilla(), 1u);
  EXPECT_NEAR(b.spectrum()(0), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_THROW(JointPairState(random_state(Dims{2, 2, 2, 2}, 1)), DimensionMismatch);
  EXPECT_THROW(JointPairState(random_state(Dims{6}, 1), 4, 2), DimensionMismatch);
}

TEST(JointPairState, SpectatorAncillaLeavesSpectrum) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    oracle::Gen g(seed);
    const JointPairState x(random_state(Dims{g.size(1, 4), g.size(1, 4)}, seed));
    const JointPairState with = x.with_ancilla(random_state(g.size(1, 3), seed + 1));
    EXPECT_EQ(with.dim_ancilla() * x.dim_n(), with.dim_complement());
    const Eigen::VectorXd a = x.spectrum(), b = with.spectrum();
    for (Eigen::Index k = 0; k < a.size(); ++k) EXPECT_NEAR(a(k), b(k), 1e-12);
    const JointPairState padded = with.padded_ancilla(with.dim_ancilla() + 2);
    EXPECT_NEAR((padded.spectrum().head(a.size()) - a).norm(), 0.0, 1e-12);
  }
}

TEST(DegenerateBlocks, GroupsCloseCoefficients) {
  const Eigen::VectorXd c = (Eigen::VectorXd(5) << 0.6, 0.6, 0.5, 0.1, 0.0).finished();
  const auto blocks = degenerate_blocks(c);
  ASSERT_EQ(blocks.size(), 4u);
  EXPECT_EQ(blocks[0], (std::pair<std::size_t, std::size_t>{0, 2}));
  EXPECT_EQ(blocks[3], (std::pair<std::size_t, std::size_t>{4, 5}));
}

TEST(Synthesize, BellPhasePair) {
  const JointPairState b = bell();
  const double theta = 0.9;
  const auto [u_p, u_n] = synthesize_envariant(b, {{0.0, theta}, {0, 0}});
  const SchmidtDecomposition sd = b.schmidt();
  const Complex e = std::polar(1.0, theta);
  EXPECT_LE((u_p.matrix() * sd.left_basis.col(0) - sd.left_basis.col(0)).norm(), 1e-14);
  EXPECT_LE((u_p.matrix() * sd.left_basis.col(1) - e * sd.left_basis.col(1)).norm(), 1e-14);
  EXPECT_LE((u_n.matrix() * sd.right_basis.col(1) - std::conj(e) * sd.right_basis.col(1)).norm(), 1e-14);
  EXPECT_LE(restoration(b, u_p, u_n), 1e-14);
}

TEST(Synthesize, ZeroPhasesGiveIdentity) {
  const JointPairState x(random_state(Dims{3, 4}, 5));
  const auto [u_p, u_n] = synthesize_envariant(x, {{0.0, 0.0, 0.0}, {}});
  EXPECT_LE((u_p.matrix() - Eigen::MatrixXcd::Identity(3, 3)).norm(), 1e-12);
  EXPECT_LE((u_n.matrix() - Eigen::MatrixXcd::Identity(4, 4)).norm(), 1e-12);
}

TEST(Synthesize, IntegerShiftsAreInert) {
  const JointPairState x(random_state(Dims{3, 3}, 6));
  const auto plain = synthesize_envariant(x, {{0.3, 1.1, 2.0}, {0, 0, 0}});
  const auto shifted = synthesize_envariant(x, {{0.3, 1.1, 2.0}, {4, -7, 1}});
  EXPECT_EQ(plain.second.matrix(), shifted.second.matrix());
  EXPECT_EQ(plain.first.matrix(), shifted.first.matrix());
}

TEST(Synthesize, RankMismatch) {
  EXPECT_THROW(synthesize_envariant(bell(), {{0.1}, {}}), RankMismatch);
  const JointPairState product(tensor(StateVector::basis(2, 0), StateVector::basis(2, 1)));
  EXPECT_THROW(synthesize_envariant(product, {{0.1, 0.2}, {}}), RankMismatch);
}

TEST(Synthesize, RestoresRandomStates) {
  const std::size_t dims[] = {2, 3, 4, 6};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SCOPED_TRACE(seed);
    oracle::Gen g(seed);
    const std::size_t dp = dims[g.size(0, 3)], dn = dims[g.size(0, 3)];
    const JointPairState x(StateVector(g.vector(dp * dn), {dp, dn}));
    PhaseSpec spec;
    for (std::size_t k = 0; k < x.schmidt().rank(); ++k) {
      spec.phases.push_back(g.uniform(0.0, 2.0 * std::numbers::pi));
      spec.integer_shifts.push_back(static_cast<std::int64_t>(g.size(0, 6)) - 3);
    }
    const auto [u_p, u_n] = synthesize_envariant(x, spec);
    EXPECT_LE(u_p.unitarity_defect(), 1e-10);
    EXPECT_LE(u_n.unitarity_defect(), 1e-10);
    EXPECT_LE(restoration(x, u_p, u_n), 1e-9);
  }
}

TEST(UndoOnN, BellSwap) {
  const JointPairState b = bell();
  Eigen::MatrixXcd swap(2, 2);
  swap << 0, 1, 1, 0;
  const WitnessSet w = undo_on_n(b, Operator(swap));
  EXPECT_LE(w.residual, 1e-14);
  EXPECT_LE(w.u_n.unitarity_defect(), 1e-12);
  EXPECT_TRUE(w.accepted());
}

TEST(UndoOnN, DistinctCoefficientsCannotBeSwapped) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
  v(0) = std::sqrt(0.9);
  v(3) = std::sqrt(0.1);
  const JointPairState x(StateVector(v, {2, 2}));
  Eigen::MatrixXcd swap(2, 2);
  swap << 0, 1, 1, 0;
  try {
    undo_on_n(x, Operator(swap));
    FAIL() << "swap of distinct coefficients was accepted";
  } catch (const NotEnvariant& e) {
    const auto [a, b] = e.violated_pair();
    EXPECT_NEAR(std::max(a, b), std::sqrt(0.9), 1e-12);
    EXPECT_NEAR(std::min(a, b), std::sqrt(0.1), 1e-12);
  }
}

TEST(UndoOnN, IdentityGivesIdentity) {
  const JointPairState x(random_state(Dims{3, 2}, 3));
  const WitnessSet w = undo_on_n(x, Operator::identity(3));
  EXPECT_LE((w.u_n.matrix() - Eigen::MatrixXcd::Identity(2, 2)).norm(), 1e-12);
  EXPECT_LE(w.residual, 1e-12);
}

TEST(UndoOnN, AnyUnitaryInsideADegenerateBlock) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SCOPED_TRACE(seed);
    oracle::Gen g(seed);
    const std::size_t d = g.size(2, 5);
    const JointPairState x = with_spectrum(std::vector<double>(d, 1.0 / std::sqrt(static_cast<double>(d))), d,
                                           d + g.size(0, 2), g);
    const WitnessSet w = undo_on_n(x, Operator(g.unitary(d)));
    EXPECT_LE(w.residual, 1e-9);
  }
}

TEST(UndoOnN, SampledEnvariantUnitariesCommuteWithReducedState) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    oracle::Gen g(seed);
    const JointPairState x = with_spectrum({0.8, 0.4, 0.4, std::sqrt(1.0 - 0.96)}, 5, 4, g);
    const Operator u = sample_envariant_unitary(x, seed);
    const std::size_t p[] = {0};
    const Eigen::MatrixXcd rho = partial_trace(x.joint(), p).matrix();
    EXPECT_LE((u.matrix() * rho - rho * u.matrix()).norm(), 1e-10);
    EXPECT_LE(undo_on_n(x, u).residual, 1e-9);
  }
}

TEST(Stabilizer, FixesTheAncilla) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const StateVector xi = random_state(1 + seed % 4, seed);
    const Operator u = stabilizer_unitary(xi, seed);
    EXPECT_LE(u.unitarity_defect(), 1e-12);
    EXPECT_LE((u.matrix() * xi.amplitudes() - xi.amplitudes()).norm(), 1e-12);
  }
}

TEST(PairEquivalent, Examples) {
  const JointPairState b = bell();
  const EquivalenceVerdict self = pair_equivalent(b, b, 3, 1);
  EXPECT_TRUE(self.related);
  EXPECT_EQ(self.witnesses.size(), 3u);
  for (const auto& w : self.witnesses) EXPECT_LE(w.residual, 1e-12);

  Eigen::MatrixXcd h(2, 2);
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  const JointPairState rotated(
      StateVector(apply_bipartite(b.joint().amplitudes(), Eigen::MatrixXcd::Identity(2, 2), h), {2, 2}));
  EXPECT_TRUE(pair_equivalent(b, rotated, 3, 2).related);

  const JointPairState product(tensor(StateVector::basis(2, 0), StateVector::basis(2, 1)));
  const EquivalenceVerdict v = pair_equivalent(b, product, 3, 3);
  EXPECT_FALSE(v.related);
  EXPECT_NEAR(v.spectrum_gap, 1.0 / std::sqrt(2.0), 1e-12);  // second entry: 0.707 vs 0
  EXPECT_FALSE(v.detail.empty());
}

TEST(PairEquivalent, WitnessesMapOneStateOntoTheOther) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    SCOPED_TRACE(seed);
    oracle::Gen g(seed);
    const std::size_t dp = g.size(1, 4), dn = g.size(1, 4);
    const JointPairState y(StateVector(g.vector(dp * dn), {dp, dn}));
    const JointPairState x(
        StateVector(apply_bipartite(y.joint().amplitudes(), g.unitary(dp), g.unitary(dn)), {dp, dn}));
    const EquivalenceVerdict v = pair_equivalent(x, y, 4, seed);
    ASSERT_TRUE(v.related) << v.detail;
    EXPECT_LE(v.map_residual, 1e-9);
    for (const auto& w : v.witnesses) {
      EXPECT_LE(w.residual, 1e-9);
      const Eigen::VectorXcd mapped = apply_bipartite(y.joint().amplitudes(), w.u_p.matrix(), w.u_n.matrix());
      EXPECT_LE((mapped - x.joint().amplitudes()).norm(), 1e-9);
    }
  }
}

TEST(PairEquivalent, PerturbedSpectraAreNeverRelated) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SCOPED_TRACE(seed);
    oracle::Gen g(seed);
    const double a = g.uniform(0.3, 0.6);
    const double eps = 2e-6 * (1.0 + static_cast<double>(seed % 5));
    const double b = a + eps;
    const JointPairState x = with_spectrum({std::sqrt(1.0 - a * a), a}, 2, 3, g);
    const JointPairState y = with_spectrum({std::sqrt(1.0 - b * b), b}, 2, 3, g);
    EXPECT_FALSE(pair_equivalent(x, y, 2, seed).related);
  }
}

TEST(PairEquivalent, VerdictSymmetryAndTransitivity) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    SCOPED_TRACE(seed);
    oracle::Gen g(seed);
    const JointPairState x(StateVector(g.vector(6), {2, 3}));
    const JointPairState y = related_state(x, derive_seed(seed, 1));
    const JointPairState z = related_state(y, derive_seed(seed, 2));
    ASSERT_TRUE(pair_equivalent(x, y, 1, seed).related);
    EXPECT_TRUE(pair_equivalent(y, x, 1, seed).related);
    ASSERT_TRUE(pair_equivalent(y, z, 1, seed).related);
    EXPECT_TRUE(pair_equivalent(x, z, 1, seed).related);
  }
}

TEST(PairEquivalent, LiteralModeCountsInadmissibleSamples) {
  const JointPairState x(random_state(Dims{3, 3}, 8));
  const EquivalenceVerdict v = pair_equivalent(x, x, 5, 1, QuantifierMode::literal);
  EXPECT_EQ(v.mode, QuantifierMode::literal);
  EXPECT_EQ(v.not_envariant_count, 5u);
  EXPECT_FALSE(v.related);
  // A maximally entangled state has one full-rank block: every U_p is admissible.
  oracle::Gen g(2);
  const JointPairState m = with_spectrum({1 / std::sqrt(3.0), 1 / std::sqrt(3.0), 1 / std::sqrt(3.0)}, 3, 3, g);
  const EquivalenceVerdict all = pair_equivalent(m, m, 5, 1, QuantifierMode::literal);
  EXPECT_EQ(all.not_envariant_count, 0u);
  EXPECT_TRUE(all.related);
}

TEST(Link, RejectsUnrelatedStates) {
  const JointPairState product(tensor(StateVector::basis(2, 0), StateVector::basis(2, 1)));
  EXPECT_THROW(Link::make(bell(), product), Error);
  const StateVector xi = random_state(2, 1);
  Eigen::MatrixXcd flip(2, 2);
  flip << 0, 1, 1, 0;
  EXPECT_THROW(Link::make(bell(), bell(), xi, Operator(flip)), Error);
}

TEST(SymmetryWitness, IdentityReverse) {
  const JointPairState x(random_state(Dims{2, 3}, 2));
  const Link self = Link::make(x, x);
  const WitnessSet w = symmetry_witness(self, Operator::identity(2));
  EXPECT_LE((w.u_n.matrix() - Eigen::MatrixXcd::Identity(3, 3)).norm(), 1e-10);
  EXPECT_LE(w.residual, 1e-12);
}

TEST(SymmetryWitness, BellPhase) {
  const Link self = Link::make(bell(), bell());
  Eigen::MatrixXcd v(2, 2);
  v << 1, 0, 0, std::polar(1.0, 0.7);
  const WitnessSet w = symmetry_witness(self, Operator(v));
  EXPECT_LE(w.residual, 1e-12);
}

TEST(SymmetryWitness, InvertsTheForwardWitness) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    oracle::Gen g(seed);
    const JointPairState x(StateVector(g.vector(12), {3, 4}));
    const JointPairState y = related_state(x, seed);
    const Link link = Link::make(x, y);
    const Operator u_p = link.sample_admissible_p(seed);
    const WitnessSet forward = link.witness_for(u_p);
    EXPECT_LE(forward.residual, 1e-9);
    const WitnessSet back = symmetry_witness(link, u_p.adjoint());
    EXPECT_LE(back.residual, 1e-9);
    EXPECT_LE((back.u_p.matrix() * forward.u_p.matrix() - Eigen::MatrixXcd::Identity(3, 3)).norm(), 1e-10);
    EXPECT_LE((back.u_n.matrix() * forward.u_n.matrix() - Eigen::MatrixXcd::Identity(4, 4)).norm(), 1e-10);
  }
}

TEST(TransitivityWitness, IdentityChain) {
  const JointPairState x(tensor(random_state(2, 1), random_state(2, 2)));
  const Link l = Link::make(x, x);
  const WitnessSet w = transitivity_witness(l, l, Operator::identity(2));
  EXPECT_LE(w.residual, 1e-12);
  ASSERT_TRUE(w.ancilla.has_value());
}

TEST(TransitivityWitness, QubitChainOnSixtyFourDimensions) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const JointPairState x1(random_state(Dims{2, 2}, seed));
    const JointPairState x2 = related_state(x1, derive_seed(seed, 1));
    const JointPairState x3 = related_state(x2, derive_seed(seed, 2));
    const Link first = Link::make(x1, x2), second = Link::make(x2, x3);
    const WitnessSet w = transitivity_witness(first, second, sample_envariant_unitary(x1, seed));
    EXPECT_LE(w.residual, 1e-10);
    EXPECT_EQ(w.u_ancilla->dim(), 4u);
  }
}

TEST(TransitivityWitness, ProductStatesExposeTheAncilla) {
  // With product states the chained ancilla is d ⊗ c ⊗ ξ ⊗ η. W_p must send
  // c to a and e to c for both links to admit it.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SCOPED_TRACE(seed);
    oracle::Gen g(seed);
    const std::size_t dp = 3, dn = 2;
    const Eigen::MatrixXcd w = g.unitary(dp);
    const StateVector c(g.vector(dp));
    const StateVector a(Eigen::VectorXcd(w * c.amplitudes()));
    const StateVector e(Eigen::VectorXcd(w.adjoint() * c.amplitudes()));
    const StateVector b(g.vector(dn)), d(g.vector(dn)), f(g.vector(dn));
    const StateVector xi(g.vector(2)), eta(g.vector(3));
    const Link first = Link::make(JointPairState::product(a, d), JointPairState::product(c, b), xi,
                                  stabilizer_unitary(xi, seed));
    const Link second = Link::make(JointPairState::product(c, f), JointPairState::product(e, d), eta,
                                   stabilizer_unitary(eta, seed + 1));
    const WitnessSet t = transitivity_witness(first, second, Operator(w));
    EXPECT_LE(t.residual, 1e-9);
    ASSERT_TRUE(t.ancilla.has_value());
    const StateVector chi = tensor(tensor(d, c), tensor(xi, eta));
    EXPECT_NEAR(fidelity(StateVector(t.ancilla->amplitudes()), StateVector(chi.amplitudes())), 1.0, 1e-10);
  }
}

TEST(TransitivityWitness, DimensionMismatch) {
  const Link l2 = Link::make(bell(), bell());
  const JointPairState x(random_state(Dims{3, 2}, 1));
  const Link l3 = Link::make(x, x);
  EXPECT_THROW(transitivity_witness(l2, l3, Operator::identity(2)), DimensionMismatch);
}

TEST(CompositionMonoid, GroupCompletionAxioms) {
  using G = grothendieck::GroupElement<CompositionMonoid>;
  const CompositionMonoid m;
  auto element = [&](std::uint64_t seed) {
    oracle::Gen g(seed);
    const std::size_t dp = g.size(1, 2), dn = g.size(1, 2);
    return JointPairState(StateVector(g.vector(dp * dn), {dp, dn}));
  };
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    SCOPED_TRACE(seed);
    const G x({element(6 * seed), element(6 * seed + 1)}, m);
    const G y({element(6 * seed + 2), element(6 * seed + 3)}, m);
    const G z({element(6 * seed + 4), element(6 * seed + 5)}, m);
    EXPECT_TRUE(x + grothendieck::group_zero(m) == x);
    EXPECT_TRUE(x + (-x) == grothendieck::group_zero(m));
    EXPECT_TRUE(x + y == y + x);
    EXPECT_TRUE((x + y) + z == x + (y + z));
  }
}

TEST(CompositionMonoid, EqualityIsLocalUnitaryEquivalence) {
  const CompositionMonoid m;
  const JointPairState a(random_state(Dims{2, 2}, 1));
  const JointPairState b(random_state(Dims{2, 3}, 2));
  EXPECT_TRUE(m.equal(m.combine(a, b), m.combine(b, a)));
  EXPECT_TRUE(m.equal(m.combine(a, m.identity()), a));
  EXPECT_TRUE(m.equal(m.combine(a, related_state(a, 3)), m.combine(related_state(a, 4), a)));
  EXPECT_FALSE(m.contains(a.with_ancilla(random_state(2, 1))));
}
