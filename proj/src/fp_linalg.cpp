#include "mcensus/fp_linalg.hpp"

#include <bit>
#include <limits>
#include <string>
#include <utility>

namespace mcensus {

namespace {

unsigned reduce(std::int64_t v, unsigned p) {
  auto r = v % static_cast<std::int64_t>(p);
  return static_cast<unsigned>(r < 0 ? r + p : r);
}

unsigned inverse_mod(unsigned a, unsigned p) {
  // p is prime and small: Fermat.
  unsigned result = 1, base = a % p, e = p - 2;
  while (e) {
    if (e & 1u) result = result * base % p;
    base = base * base % p;
    e >>= 1u;
  }
  return result;
}

void require_same_modulus(unsigned a, unsigned b) {
  if (a != b)
    throw ValidationError("modulus mismatch: " + std::to_string(a) + " vs " +
                          std::to_string(b));
}

}  // namespace

bool is_prime(unsigned p) {
  if (p < 2) return false;
  for (unsigned d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

void require_prime(unsigned p) {
  if (!is_prime(p) || p > kMaxPrime)
    throw ValidationError("modulus must be a prime <= " +
                          std::to_string(kMaxPrime) + ", got " +
                          std::to_string(p));
}

std::uint64_t checked_pow(std::uint64_t p, unsigned e) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < e; ++i) {
    if (r > std::numeric_limits<std::uint64_t>::max() / p)
      throw BudgetError("p^e overflows 64 bits", big_pow(p, e));
    r *= p;
  }
  return r;
}

// ---------------------------------------------------------------- FpScalar

FpScalar::FpScalar(std::int64_t value, unsigned p) {
  require_prime(p);
  value_ = static_cast<std::uint8_t>(reduce(value, p));
  p_ = static_cast<std::uint8_t>(p);
}

FpScalar FpScalar::operator+(FpScalar rhs) const {
  require_same_modulus(p_, rhs.p_);
  return {static_cast<std::int64_t>(value_) + rhs.value_, p_};
}

FpScalar FpScalar::operator-(FpScalar rhs) const {
  require_same_modulus(p_, rhs.p_);
  return {static_cast<std::int64_t>(value_) - rhs.value_, p_};
}

FpScalar FpScalar::operator*(FpScalar rhs) const {
  require_same_modulus(p_, rhs.p_);
  return {static_cast<std::int64_t>(value_) * rhs.value_, p_};
}

FpScalar FpScalar::operator-() const { return {-static_cast<std::int64_t>(value_), p_}; }

FpScalar FpScalar::inverse() const {
  if (value_ == 0) throw ValidationError("inverse of zero in F_p");
  return {inverse_mod(value_, p_), p_};
}

// ---------------------------------------------------------------- FpVector

FpVector::FpVector(std::vector<std::uint8_t> entries, unsigned p)
    : entries_(std::move(entries)), p_(p) {
  require_prime(p);
  for (auto& e : entries_) e = static_cast<std::uint8_t>(e % p);
}

FpVector FpVector::zero(std::size_t dim, unsigned p) {
  return {std::vector<std::uint8_t>(dim, 0), p};
}

FpVector FpVector::unit(std::size_t dim, std::size_t i, unsigned p) {
  std::vector<std::uint8_t> e(dim, 0);
  e.at(i) = 1;
  return {std::move(e), p};
}

bool FpVector::is_zero() const noexcept {
  for (auto e : entries_)
    if (e) return false;
  return true;
}

void FpVector::check_compatible(FpVector const& rhs) const {
  require_same_modulus(p_, rhs.p_);
  if (dim() != rhs.dim())
    throw ValidationError("vector dimension mismatch: " +
                          std::to_string(dim()) + " vs " +
                          std::to_string(rhs.dim()));
}

FpVector FpVector::operator+(FpVector const& rhs) const {
  check_compatible(rhs);
  std::vector<std::uint8_t> out(dim());
  for (std::size_t i = 0; i < dim(); ++i)
    out[i] = static_cast<std::uint8_t>((entries_[i] + rhs.entries_[i]) % p_);
  return {std::move(out), p_};
}

FpVector FpVector::operator-(FpVector const& rhs) const {
  check_compatible(rhs);
  std::vector<std::uint8_t> out(dim());
  for (std::size_t i = 0; i < dim(); ++i)
    out[i] = static_cast<std::uint8_t>((entries_[i] + p_ - rhs.entries_[i]) % p_);
  return {std::move(out), p_};
}

FpVector FpVector::scaled(unsigned c) const {
  std::vector<std::uint8_t> out(dim());
  for (std::size_t i = 0; i < dim(); ++i)
    out[i] = static_cast<std::uint8_t>(entries_[i] * (c % p_) % p_);
  return {std::move(out), p_};
}

unsigned FpVector::dot(FpVector const& rhs) const {
  check_compatible(rhs);
  unsigned acc = 0;
  for (std::size_t i = 0; i < dim(); ++i) acc = (acc + entries_[i] * rhs.entries_[i]) % p_;
  return acc;
}

// ---------------------------------------------------------------- FpMatrix

FpMatrix::FpMatrix(std::size_t rows, std::size_t cols, unsigned p)
    : rows_(rows), cols_(cols), entries_(rows * cols, 0), p_(p) {
  require_prime(p);
}

FpMatrix::FpMatrix(std::size_t rows, std::size_t cols,
                   std::vector<std::uint8_t> entries, unsigned p)
    : rows_(rows), cols_(cols), entries_(std::move(entries)), p_(p) {
  require_prime(p);
  if (entries_.size() != rows * cols)
    throw ValidationError("matrix entry count " +
                          std::to_string(entries_.size()) + " != " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  for (auto& e : entries_) e = static_cast<std::uint8_t>(e % p);
}

FpMatrix FpMatrix::identity(std::size_t n, unsigned p) {
  FpMatrix m(n, n, p);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1);
  return m;
}

FpMatrix FpMatrix::from_rows(std::span<const FpVector> rows) {
  if (rows.empty()) throw ValidationError("from_rows needs at least one row");
  auto const p = rows.front().modulus();
  auto const cols = rows.front().dim();
  FpMatrix m(rows.size(), cols, p);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require_same_modulus(p, rows[r].modulus());
    if (rows[r].dim() != cols) throw ValidationError("ragged rows in from_rows");
    for (std::size_t c = 0; c < cols; ++c) m.set(r, c, rows[r][c]);
  }
  return m;
}

void FpMatrix::set(std::size_t r, std::size_t c, std::int64_t value) {
  if (r >= rows_ || c >= cols_) throw ValidationError("matrix index out of range");
  entries_[r * cols_ + c] = static_cast<std::uint8_t>(reduce(value, p_));
}

FpVector FpMatrix::row(std::size_t r) const {
  return {std::vector<std::uint8_t>(entries_.begin() + r * cols_,
                                    entries_.begin() + (r + 1) * cols_),
          p_};
}

FpVector FpMatrix::apply(FpVector const& v) const {
  require_same_modulus(p_, v.modulus());
  if (v.dim() != cols_) throw ValidationError("matrix-vector dimension mismatch");
  std::vector<std::uint8_t> out(rows_, 0);
  for (std::size_t r = 0; r < rows_; ++r) {
    unsigned acc = 0;
    for (std::size_t c = 0; c < cols_; ++c) acc += (*this)(r, c) * v[c];
    out[r] = static_cast<std::uint8_t>(acc % p_);
  }
  return {std::move(out), p_};
}

std::size_t mat_rank(FpMatrix const& m) {
  auto const p = m.modulus();
  auto const rows = m.rows(), cols = m.cols();
  std::vector<unsigned> a(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) a[r * cols + c] = m(r, c);

  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && a[pivot * cols + c] == 0) ++pivot;
    if (pivot == rows) continue;
    if (pivot != rank)
      for (std::size_t k = 0; k < cols; ++k)
        std::swap(a[pivot * cols + k], a[rank * cols + k]);
    auto const inv = inverse_mod(a[rank * cols + c], p);
    for (std::size_t k = c; k < cols; ++k) a[rank * cols + k] = a[rank * cols + k] * inv % p;
    for (std::size_t r = rank + 1; r < rows; ++r) {
      auto const f = a[r * cols + c];
      if (!f) continue;
      for (std::size_t k = c; k < cols; ++k)
        a[r * cols + k] = (a[r * cols + k] + (p - f) * a[rank * cols + k]) % p;
    }
    ++rank;
  }
  return rank;
}

std::size_t rank_f2_packed(std::span<const std::uint64_t> rows) {
  // XOR basis keyed by leading bit.
  std::uint64_t basis[64] = {};
  std::size_t rank = 0;
  for (auto v : rows) {
    while (v) {
      int const top = 63 - std::countl_zero(v);
      if (!basis[top]) {
        basis[top] = v;
        ++rank;
        break;
      }
      v ^= basis[top];
    }
  }
  return rank;
}

std::uint64_t pack_f2(FpVector const& v) {
  if (v.modulus() != 2) throw ValidationError("pack_f2 needs an F_2 vector");
  if (v.dim() > 64) throw ValidationError("pack_f2 supports dim <= 64");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < v.dim(); ++i)
    if (v[i]) bits |= std::uint64_t{1} << i;
  return bits;
}

FpVector unpack_f2(std::uint64_t bits, std::size_t dim) {
  std::vector<std::uint8_t> e(dim);
  for (std::size_t i = 0; i < dim; ++i) e[i] = static_cast<std::uint8_t>((bits >> i) & 1u);
  return {std::move(e), 2};
}

// ---------------------------------------------------------------- GramForm

GramForm::GramForm(FpMatrix matrix, DiagonalProfile profile)
    : matrix_(std::move(matrix)), profile_(profile) {
  auto const d = matrix_.rows();
  auto const p = matrix_.modulus();
  if (matrix_.cols() != d) throw ValidationError("Gram matrix must be square");
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      if ((matrix_(i, j) + matrix_(j, i)) % p != 0)
        throw ValidationError("Gram matrix is not skew-symmetric at (" +
                              std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
  for (std::size_t i = 0; i < d; ++i) {
    unsigned const want = (profile == DiagonalProfile::first_one && i == 0) ? 1 : 0;
    if (matrix_(i, i) != want)
      throw ValidationError("Gram diagonal entry " + std::to_string(i + 1) +
                            " contradicts the diagonal profile");
  }
  if (profile == DiagonalProfile::first_one && p != 2)
    throw ValidationError("a skew-symmetric form with (v1,v1)=1 needs p = 2");
}

bool GramForm::is_alternate() const {
  // (v,v) = sum_i v_i^2 m_ii + sum_{i<j} v_i v_j (m_ij + m_ji); the second
  // sum vanishes by skew-symmetry, so alternation is a diagonal property.
  for (std::size_t i = 0; i < dim(); ++i)
    if (matrix_(i, i)) return false;
  return true;
}

GramForm GramForm::zero(std::size_t dim, unsigned p) {
  return {FpMatrix(dim, dim, p), DiagonalProfile::all_zero};
}

GramForm GramForm::standard_symplectic(std::size_t dim, unsigned p) {
  if (dim % 2) throw ValidationError("standard symplectic form needs even dim");
  FpMatrix m(dim, dim, p);
  for (std::size_t i = 0; i + 1 < dim; i += 2) {
    m.set(i, i + 1, 1);
    m.set(i + 1, i, -1);
  }
  return {std::move(m), DiagonalProfile::all_zero};
}

FpScalar form_eval(GramForm const& f, FpVector const& x, FpVector const& y) {
  if (x.dim() != f.dim() || y.dim() != f.dim())
    throw ValidationError("form_eval: vector dims " + std::to_string(x.dim()) +
                          "," + std::to_string(y.dim()) + " vs form dim " +
                          std::to_string(f.dim()));
  require_same_modulus(f.modulus(), x.modulus());
  require_same_modulus(f.modulus(), y.modulus());
  return {static_cast<std::int64_t>(x.dot(f.matrix().apply(y))), f.modulus()};
}

bool is_nondegenerate(GramForm const& f) { return mat_rank(f.matrix()) == f.dim(); }

// ---------------------------------------------------------------- enumeration

FpVector vector_from_index(std::uint64_t index, std::size_t dim, unsigned p) {
  std::vector<std::uint8_t> e(dim);
  for (std::size_t i = dim; i-- > 0;) {
    e[i] = static_cast<std::uint8_t>(index % p);
    index /= p;
  }
  return {std::move(e), p};
}

std::uint64_t index_of_vector(FpVector const& v) {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < v.dim(); ++i) idx = idx * v.modulus() + v[i];
  return idx;
}

VectorStream::iterator::iterator(VectorStream const* owner, std::uint64_t index)
    : owner_(owner), index_(index) {
  if (index_ < owner_->size_) current_ = vector_from_index(index_, owner_->dim_, owner_->p_);
}

VectorStream::iterator& VectorStream::iterator::operator++() {
  ++index_;
  if (index_ < owner_->size_) current_ = vector_from_index(index_, owner_->dim_, owner_->p_);
  return *this;
}

VectorStream enumerate_vectors(std::size_t d, unsigned p, std::uint64_t budget) {
  require_prime(p);
  if (d == 0) throw ValidationError("enumerate_vectors needs d >= 1");
  auto const count = big_pow(p, static_cast<unsigned>(d));
  if (count > budget)
    throw BudgetError("enumerating " + count.str() + " vectors exceeds budget " +
                          std::to_string(budget),
                      count);
  return {d, p, static_cast<std::uint64_t>(count)};
}

}  // namespace mcensus
