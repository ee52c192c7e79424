#pragma once

// Group completion of a commutative monoid.
//
// Elements of the completed group are pairs (pos, neg) of monoid elements,
// read as "pos minus neg". Two pairs (a, b) and (c, d) are identified when
// a + d + k = b + c + k for some monoid element k. For a cancellative monoid
// k = identity decides the relation; otherwise the monoid supplies a bounded
// stream of k candidates and the search may end undecided.

#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "envar/errors.hpp"

namespace envar::grothendieck {

template <class E>
struct MonoidPair {
  E pos;
  E neg;
};

/// Candidate k values for a non-cancellative monoid. `complete` states that
/// the list covers every element that could witness equivalence, so running
/// out of candidates means "not equivalent" instead of "unknown".
template <class E>
struct KCandidates {
  std::vector<E> values;
  bool complete = false;
};

template <class M>
concept CommutativeMonoid = requires(const M& m, const typename M::element_type& a) {
  typename M::element_type;
  { m.identity() } -> std::convertible_to<typename M::element_type>;
  { m.combine(a, a) } -> std::convertible_to<typename M::element_type>;
  { m.equal(a, a) } -> std::convertible_to<bool>;
  { m.contains(a) } -> std::convertible_to<bool>;
  { m.cancellative() } -> std::convertible_to<bool>;
  { m == m } -> std::convertible_to<bool>;
};

template <class M>
concept EnumeratesK = CommutativeMonoid<M> && requires(const M& m) {
  { m.k_candidates() } -> std::convertible_to<KCandidates<typename M::element_type>>;
};

template <class M>
concept Reducible = CommutativeMonoid<M> &&
    requires(const M& m, const MonoidPair<typename M::element_type>& p) {
  { m.reduce(p) } -> std::convertible_to<MonoidPair<typename M::element_type>>;
};

template <CommutativeMonoid M>
using PairOf = MonoidPair<typename M::element_type>;

template <CommutativeMonoid M>
void require_domain(const M& m, const PairOf<M>& x) {
  if (!m.contains(x.pos) || !m.contains(x.neg)) throw Error("pair element outside the monoid domain");
}

/// Decides (a, b) ~ (c, d). Throws SearchExhausted when a non-cancellative
/// monoid's k-stream runs out without a decision.
template <CommutativeMonoid M>
bool pair_equivalent(const PairOf<M>& x, const PairOf<M>& y, const M& m) {
  require_domain(m, x);
  require_domain(m, y);
  const auto lhs = m.combine(x.pos, y.neg);
  const auto rhs = m.combine(x.neg, y.pos);
  if (m.equal(lhs, rhs)) return true;
  if (m.cancellative()) return false;

  if constexpr (EnumeratesK<M>) {
    const KCandidates<typename M::element_type> ks = m.k_candidates();
    for (const auto& k : ks.values) {
      if (m.equal(m.combine(lhs, k), m.combine(rhs, k))) return true;
    }
    if (ks.complete) return false;
  }
  throw SearchExhausted("k-search exhausted without deciding the equivalence");
}

template <CommutativeMonoid M>
class GroupElement {
 public:
  using element_type = typename M::element_type;

  GroupElement(PairOf<M> representative, M monoid)
      : representative_(std::move(representative)), monoid_(std::move(monoid)) {
    require_domain(monoid_, representative_);
  }

  const PairOf<M>& representative() const noexcept { return representative_; }
  const M& monoid() const noexcept { return monoid_; }

 private:
  PairOf<M> representative_;
  M monoid_;
};

template <CommutativeMonoid M>
void require_same_monoid(const GroupElement<M>& x, const GroupElement<M>& y) {
  if (!(x.monoid() == y.monoid())) throw MixedMonoid("group elements come from different monoids");
}

template <CommutativeMonoid M>
GroupElement<M> group_zero(const M& m) {
  return GroupElement<M>({m.identity(), m.identity()}, m);
}

template <CommutativeMonoid M>
GroupElement<M> group_add(const GroupElement<M>& x, const GroupElement<M>& y) {
  require_same_monoid(x, y);
  const M& m = x.monoid();
  return GroupElement<M>({m.combine(x.representative().pos, y.representative().pos),
                          m.combine(x.representative().neg, y.representative().neg)},
                         m);
}

template <CommutativeMonoid M>
GroupElement<M> group_neg(const GroupElement<M>& x) {
  return GroupElement<M>({x.representative().neg, x.representative().pos}, x.monoid());
}

template <CommutativeMonoid M>
bool equivalent(const GroupElement<M>& x, const GroupElement<M>& y) {
  require_same_monoid(x, y);
  return pair_equivalent(x.representative(), y.representative(), x.monoid());
}

template <CommutativeMonoid M>
GroupElement<M> operator+(const GroupElement<M>& x, const GroupElement<M>& y) { return group_add(x, y); }

template <CommutativeMonoid M>
GroupElement<M> operator-(const GroupElement<M>& x) { return group_neg(x); }

template <CommutativeMonoid M>
GroupElement<M> operator-(const GroupElement<M>& x, const GroupElement<M>& y) { return group_add(x, group_neg(y)); }

template <CommutativeMonoid M>
bool operator==(const GroupElement<M>& x, const GroupElement<M>& y) { return equivalent(x, y); }

/// Distinguished representative of the class of x. Requires a cancellative
/// monoid with a registered reduction; throws UnsupportedMonoid otherwise.
template <CommutativeMonoid M>
PairOf<M> canonicalize(const GroupElement<M>& x) {
  if constexpr (Reducible<M>) {
    if (!x.monoid().cancellative()) throw UnsupportedMonoid("canonical forms need a cancellative monoid");
    return x.monoid().reduce(x.representative());
  } else {
    throw UnsupportedMonoid("no reduction registered for this monoid");
  }
}

// -- shipped instantiations -------------------------------------------------

namespace detail {

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw Error("monoid addition overflows 64 bits");
  return out;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_mul_overflow(a, b, &out)) throw Error("monoid multiplication overflows 64 bits");
  return out;
}

}  // namespace detail

/// (ℕ, +). Completes to the integers; (p, n) stands for p − n.
struct NaturalAddition {
  using element_type = std::uint64_t;

  std::uint64_t identity() const { return 0; }
  std::uint64_t combine(std::uint64_t a, std::uint64_t b) const { return detail::checked_add(a, b); }
  bool equal(std::uint64_t a, std::uint64_t b) const { return a == b; }
  bool contains(std::uint64_t) const { return true; }
  bool cancellative() const { return true; }

  MonoidPair<std::uint64_t> reduce(const MonoidPair<std::uint64_t>& p) const {
    const std::uint64_t common = std::min(p.pos, p.neg);
    return {p.pos - common, p.neg - common};
  }

  friend bool operator==(const NaturalAddition&, const NaturalAddition&) { return true; }
};

/// (ℕ⁺, ×), the monoid of Hilbert-space dimensions under tensor composition.
/// Completes to the positive rationals; (p, n) stands for p / n.
struct PositiveMultiplication {
  using element_type = std::uint64_t;

  std::uint64_t identity() const { return 1; }
  std::uint64_t combine(std::uint64_t a, std::uint64_t b) const { return detail::checked_mul(a, b); }
  bool equal(std::uint64_t a, std::uint64_t b) const { return a == b; }
  bool contains(std::uint64_t a) const { return a >= 1; }
  bool cancellative() const { return true; }

  MonoidPair<std::uint64_t> reduce(const MonoidPair<std::uint64_t>& p) const {
    const std::uint64_t g = std::gcd(p.pos, p.neg);
    return {p.pos / g, p.neg / g};
  }

  friend bool operator==(const PositiveMultiplication&, const PositiveMultiplication&) { return true; }
};

}  // namespace envar::grothendieck
