#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace mcensus {

/// Exact integer used for every closed-form count.
using BigInt = boost::multiprecision::cpp_int;

/// Bad input: malformed parameters, broken invariants, schema violations.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An enumeration would exceed its configured work budget.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(std::string const& what, BigInt state_space)
      : std::runtime_error(what), state_space_(std::move(state_space)) {}

  BigInt const& state_space() const noexcept { return state_space_; }

 private:
  BigInt state_space_;
};

/// A result that the mathematics guarantees failed to hold (never expected).
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline BigInt big_pow(std::uint64_t base, unsigned exp) {
  return boost::multiprecision::pow(BigInt(base), exp);
}

inline std::string to_string(BigInt const& v) { return v.str(); }

}  // namespace mcensus
