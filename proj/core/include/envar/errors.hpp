#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace envar {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class RankMismatch : public Error {
 public:
  using Error::Error;
};

/// Raised when a local unitary mixes distinct Schmidt coefficients, so no
/// unitary on the complementary factor can restore the state.
class NotEnvariant : public Error {
 public:
  NotEnvariant(std::string what, double coefficient_a, double coefficient_b)
      : Error(std::move(what)), violated_(coefficient_a, coefficient_b) {}

  /// The two Schmidt coefficients the operator mixes (0 stands for the kernel).
  const std::pair<double, double>& violated_pair() const noexcept { return violated_; }

 private:
  std::pair<double, double> violated_;
};

/// The bounded k-stream of a non-cancellative monoid ran out before a witness
/// was found; the equivalence is undecided rather than false.
class SearchExhausted : public Error {
 public:
  using Error::Error;
};

class UnsupportedMonoid : public Error {
 public:
  using Error::Error;
};

class MixedMonoid : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace envar
