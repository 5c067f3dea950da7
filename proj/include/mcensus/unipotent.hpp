#pragma once

// The groups U_n(F_p) of unipotent upper-triangular matrices and their
// central quotients, with an indexed (table-driven) form for enumeration.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mcensus/errors.hpp"
#include "mcensus/fp_linalg.hpp"

namespace mcensus {

inline constexpr int kMinUniSize = 2;
inline constexpr int kMaxUniSize = 6;
inline constexpr int kMaxUniEntries = kMaxUniSize * (kMaxUniSize - 1) / 2;

/// Exponent of a power node: a non-negative integer or p^infinity, which is
/// 0 by convention so that x^(p^inf) = 1.
class Exponent {
 public:
  static Exponent finite(std::uint64_t e) { return Exponent(false, e); }
  static Exponent p_infinity() { return Exponent(true, 0); }

  bool is_infinite() const noexcept { return infinite_; }
  /// Only meaningful for finite exponents.
  std::uint64_t value() const noexcept { return value_; }

  bool operator==(Exponent const&) const = default;

 private:
  Exponent(bool inf, std::uint64_t v) : infinite_(inf), value_(inf ? 0 : v) {}

  bool infinite_;
  std::uint64_t value_;
};

/// Number of strictly-upper-triangular positions of an n x n matrix.
constexpr int triangle_size(int n) { return n * (n - 1) / 2; }

/// Row-major position of (i, j), 1-based with i < j <= n.
constexpr int triangle_index(int n, int i, int j) {
  // Rows 1..i-1 contribute (n-1) + (n-2) + ... + (n-i+1) entries.
  return (i - 1) * n - (i - 1) * i / 2 + (j - i - 1);
}

/// An element of U_n(F_p); the diagonal is implicitly 1.
class UniMatrix {
 public:
  /// Identity of U_n(F_p).
  UniMatrix(int n, unsigned p);

  int size() const noexcept { return n_; }
  unsigned modulus() const noexcept { return p_; }

  /// Entry (i, j), 1-based, i < j. Throws outside the strict triangle.
  unsigned at(int i, int j) const;
  void set(int i, int j, std::int64_t value);

  /// Coefficients in row-major triangle order.
  std::span<const std::uint8_t> coords() const noexcept {
    return {data_.data(), static_cast<std::size_t>(triangle_size(n_))};
  }
  std::uint8_t coord(int k) const noexcept { return data_[k]; }
  void set_coord(int k, unsigned v) noexcept { data_[k] = static_cast<std::uint8_t>(v % p_); }

  bool is_identity() const noexcept;

  /// Matrix with the given superdiagonal and zeros above it.
  static UniMatrix from_superdiagonal(std::span<const unsigned> superdiag, unsigned p);

  bool operator==(UniMatrix const&) const = default;

 private:
  int n_;
  unsigned p_;
  std::array<std::uint8_t, kMaxUniEntries> data_{};
};

UniMatrix group_mul(UniMatrix const& a, UniMatrix const& b);
UniMatrix group_inv(UniMatrix const& a);
UniMatrix group_pow(UniMatrix const& a, Exponent e);
/// a^-1 b^-1 a b
UniMatrix group_comm(UniMatrix const& a, UniMatrix const& b);

FpScalar proj_entry(UniMatrix const& a, int i, int j);

/// Rank test on the (n-1) x d superdiagonal matrix: true iff the images
/// generate U_n(F_p).
bool is_surjective_assignment(std::span<const UniMatrix> images, int n, unsigned p);

/// |Aut(U_n(F_p))| for n in {2, 3, 4}.
BigInt aut_order(int n, unsigned p);

/// Element of the quotient of U_n(F_p) by its center, i.e. a unipotent
/// matrix whose (1, n) entry is omitted.
class UniBarMatrix {
 public:
  UniBarMatrix(int n, unsigned p) : m_(n, p) {}
  /// Image of a U_n element in the quotient.
  explicit UniBarMatrix(UniMatrix const& m);

  int size() const noexcept { return m_.size(); }
  unsigned modulus() const noexcept { return m_.modulus(); }
  unsigned at(int i, int j) const;
  void set(int i, int j, std::int64_t value);

  /// The representative with zero corner entry.
  UniMatrix const& lift() const noexcept { return m_; }

  UniBarMatrix operator*(UniBarMatrix const& rhs) const;
  UniBarMatrix inverse() const;

  bool operator==(UniBarMatrix const&) const = default;

 private:
  UniMatrix m_;
};

/// Element of M = ker(U_4 -> F_p^3, a -> (a12, a23, a34)).
struct KernelElemM {
  unsigned m13 = 0;
  unsigned m24 = 0;
  unsigned m14 = 0;

  UniMatrix to_matrix(unsigned p) const;
  /// Throws ValidationError when a is not in M.
  static KernelElemM from_matrix(UniMatrix const& a);

  bool operator==(KernelElemM const&) const = default;
};

/// U_n(F_p) (or its central quotient) with elements numbered 0..order-1.
///
/// The number of an element is its coordinate string read as a base-p
/// integer, first triangle coordinate most significant; for p = 2 this is a
/// bitmask. Small groups carry a full multiplication table.
class UnipotentGroup {
 public:
  using Elem = std::uint32_t;

  /// Groups up to this order get a Cayley table.
  static constexpr std::uint64_t kTableOrder = 1024;
  /// Groups above this order are refused.
  static constexpr std::uint64_t kMaxOrder = std::uint64_t{1} << 31;

  UnipotentGroup(int n, unsigned p, bool omit_corner = false);

  int size() const noexcept { return n_; }
  unsigned modulus() const noexcept { return p_; }
  bool omits_corner() const noexcept { return omit_corner_; }
  std::uint64_t order() const noexcept { return order_; }
  /// Number of stored coordinates (the corner is dropped in the quotient).
  int num_coords() const noexcept { return coords_; }

  Elem identity() const noexcept { return 0; }
  Elem encode(UniMatrix const& m) const;
  UniMatrix decode(Elem e) const;

  Elem mul(Elem a, Elem b) const {
    return table_.empty() ? mul_direct(a, b) : table_[std::size_t{a} * order_ + b];
  }
  Elem inv(Elem a) const { return inverse_.empty() ? inv_direct(a) : inverse_[a]; }
  Elem pow(Elem a, Exponent e) const;
  Elem comm(Elem a, Elem b) const { return mul(mul(inv(a), inv(b)), mul(a, b)); }

  /// Coordinate k (triangle order over all positions) of an element.
  unsigned coord(Elem e, int k) const;
  /// Superdiagonal entries (i, i+1), i = 1..n-1, as base-p digits.
  std::array<std::uint8_t, kMaxUniSize - 1> superdiagonal(Elem e) const;
  /// Element with every entry equal to the given per-position digits;
  /// positions are full-triangle indices, the corner is ignored in the quotient.
  Elem from_coords(std::span<const unsigned> full_coords) const;

  /// Rank of the superdiagonal matrix of the given elements.
  std::size_t superdiagonal_rank(std::span<const Elem> elems) const;

 private:
  Elem mul_direct(Elem a, Elem b) const;
  Elem inv_direct(Elem a) const;
  UniMatrix decode_full(Elem e) const;

  int n_;
  unsigned p_;
  bool omit_corner_;
  int coords_;
  std::uint64_t order_;
  std::vector<std::uint64_t> place_;  // place value per full-triangle coord (0 for the omitted corner)
  std::vector<Elem> table_;
  std::vector<Elem> inverse_;
  std::vector<std::uint32_t> superdiag_bits_;  // p = 2 fast path
};

}  // namespace mcensus
