#pragma once

// Dense linear algebra over a prime field F_p with small p.

#include <cstdint>
#include <iterator>
#include <span>
#include <vector>

#include "mcensus/errors.hpp"

namespace mcensus {

/// Largest modulus accepted by the containers (entries are stored as bytes).
inline constexpr unsigned kMaxPrime = 251;

/// Default cap on the number of vectors enumerate_vectors may produce.
inline constexpr std::uint64_t kDefaultVectorBudget = 100'000'000;

bool is_prime(unsigned p);

/// Throws ValidationError unless p is a prime not exceeding kMaxPrime.
void require_prime(unsigned p);

class FpScalar {
 public:
  FpScalar(std::int64_t value, unsigned p);

  unsigned value() const noexcept { return value_; }
  unsigned modulus() const noexcept { return p_; }

  FpScalar operator+(FpScalar rhs) const;
  FpScalar operator-(FpScalar rhs) const;
  FpScalar operator*(FpScalar rhs) const;
  FpScalar operator-() const;
  FpScalar inverse() const;

  bool operator==(FpScalar const&) const = default;

 private:
  std::uint8_t value_;
  std::uint8_t p_;
};

class FpVector {
 public:
  FpVector(std::vector<std::uint8_t> entries, unsigned p);
  static FpVector zero(std::size_t dim, unsigned p);
  /// The i-th standard basis vector (0-based index).
  static FpVector unit(std::size_t dim, std::size_t i, unsigned p);

  std::size_t dim() const noexcept { return entries_.size(); }
  unsigned modulus() const noexcept { return p_; }
  unsigned operator[](std::size_t i) const { return entries_[i]; }
  std::span<const std::uint8_t> entries() const noexcept { return entries_; }

  bool is_zero() const noexcept;

  FpVector operator+(FpVector const& rhs) const;
  FpVector operator-(FpVector const& rhs) const;
  FpVector scaled(unsigned c) const;
  unsigned dot(FpVector const& rhs) const;

  bool operator==(FpVector const&) const = default;
  auto operator<=>(FpVector const&) const = default;

 private:
  void check_compatible(FpVector const& rhs) const;

  std::vector<std::uint8_t> entries_;
  unsigned p_;
};

class FpMatrix {
 public:
  FpMatrix(std::size_t rows, std::size_t cols, unsigned p);
  FpMatrix(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> entries,
           unsigned p);
  static FpMatrix identity(std::size_t n, unsigned p);
  static FpMatrix from_rows(std::span<const FpVector> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  unsigned modulus() const noexcept { return p_; }

  unsigned operator()(std::size_t r, std::size_t c) const {
    return entries_[r * cols_ + c];
  }
  void set(std::size_t r, std::size_t c, std::int64_t value);

  FpVector row(std::size_t r) const;
  FpVector apply(FpVector const& v) const;

  bool operator==(FpMatrix const&) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::uint8_t> entries_;
  unsigned p_;
};

/// Row rank over F_p by Gaussian elimination.
std::size_t mat_rank(FpMatrix const& m);

/// Rank over F_2 of rows packed one per word, bit c = column c.
std::size_t rank_f2_packed(std::span<const std::uint64_t> rows);

/// Packs an F_2 vector with dim <= 64 into one word, bit i = entry i.
std::uint64_t pack_f2(FpVector const& v);
FpVector unpack_f2(std::uint64_t bits, std::size_t dim);

enum class DiagonalProfile { all_zero, first_one };

/// Matrix of a skew-symmetric bilinear form; (x, y) = x^T M y.
class GramForm {
 public:
  /// Validates skew-symmetry off the diagonal and the diagonal profile.
  GramForm(FpMatrix matrix, DiagonalProfile profile);

  std::size_t dim() const noexcept { return matrix_.rows(); }
  unsigned modulus() const noexcept { return matrix_.modulus(); }
  FpMatrix const& matrix() const noexcept { return matrix_; }
  DiagonalProfile diagonal_profile() const noexcept { return profile_; }

  /// True when (v, v) = 0 for every v.
  bool is_alternate() const;

  static GramForm zero(std::size_t dim, unsigned p);
  /// Standard symplectic form: blocks (e_{2i-1}, e_{2i}) = 1; dim must be even.
  static GramForm standard_symplectic(std::size_t dim, unsigned p);

 private:
  FpMatrix matrix_;
  DiagonalProfile profile_;
};

FpScalar form_eval(GramForm const& f, FpVector const& x, FpVector const& y);
bool is_nondegenerate(GramForm const& f);

/// Decodes the index-th vector of F_p^dim in lexicographic order (entry 0 is
/// the most significant base-p digit).
FpVector vector_from_index(std::uint64_t index, std::size_t dim, unsigned p);
std::uint64_t index_of_vector(FpVector const& v);

/// Forward range over all p^d vectors of F_p^d in lexicographic order.
class VectorStream {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = FpVector;
    using difference_type = std::ptrdiff_t;
    using pointer = FpVector const*;
    using reference = FpVector const&;

    iterator() = default;
    iterator(VectorStream const* owner, std::uint64_t index);

    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    iterator& operator++();
    iterator operator++(int) {
      auto copy = *this;
      ++*this;
      return copy;
    }
    bool operator==(iterator const& rhs) const { return index_ == rhs.index_; }

   private:
    VectorStream const* owner_ = nullptr;
    std::uint64_t index_ = 0;
    FpVector current_ = FpVector::zero(0, 2);
  };

  iterator begin() const { return {this, 0}; }
  iterator end() const { return {this, size_}; }
  std::uint64_t size() const noexcept { return size_; }
  std::size_t dim() const noexcept { return dim_; }
  unsigned modulus() const noexcept { return p_; }

 private:
  friend VectorStream enumerate_vectors(std::size_t, unsigned, std::uint64_t);
  VectorStream(std::size_t dim, unsigned p, std::uint64_t size)
      : dim_(dim), p_(p), size_(size) {}

  std::size_t dim_;
  unsigned p_;
  std::uint64_t size_;
};

/// All p^d vectors; throws BudgetError when p^d exceeds the budget.
VectorStream enumerate_vectors(std::size_t d, unsigned p,
                               std::uint64_t budget = kDefaultVectorBudget);

/// p^e as a 64-bit integer; throws BudgetError on overflow.
std::uint64_t checked_pow(std::uint64_t p, unsigned e);

}  // namespace mcensus
