#include "mcensus/unipotent.hpp"

#include <string>

namespace mcensus {

namespace {

void check_size(int n) {
  if (n < kMinUniSize || n > kMaxUniSize)
    throw ValidationError("unipotent size n must be in [" + std::to_string(kMinUniSize) +
                          ", " + std::to_string(kMaxUniSize) + "], got " +
                          std::to_string(n));
}

void check_compatible(UniMatrix const& a, UniMatrix const& b) {
  if (a.size() != b.size() || a.modulus() != b.modulus())
    throw ValidationError("unipotent size/modulus mismatch: U_" + std::to_string(a.size()) +
                          "(F_" + std::to_string(a.modulus()) + ") vs U_" +
                          std::to_string(b.size()) + "(F_" + std::to_string(b.modulus()) +
                          ")");
}

}  // namespace

// ---------------------------------------------------------------- UniMatrix

UniMatrix::UniMatrix(int n, unsigned p) : n_(n), p_(p) {
  check_size(n);
  require_prime(p);
}

unsigned UniMatrix::at(int i, int j) const {
  if (i < 1 || j > n_ || i >= j)
    throw ValidationError("entry (" + std::to_string(i) + "," + std::to_string(j) +
                          ") is outside the strict upper triangle of U_" +
                          std::to_string(n_));
  return data_[triangle_index(n_, i, j)];
}

void UniMatrix::set(int i, int j, std::int64_t value) {
  (void)at(i, j);
  auto r = value % static_cast<std::int64_t>(p_);
  if (r < 0) r += p_;
  data_[triangle_index(n_, i, j)] = static_cast<std::uint8_t>(r);
}

bool UniMatrix::is_identity() const noexcept {
  for (int k = 0; k < triangle_size(n_); ++k)
    if (data_[k]) return false;
  return true;
}

UniMatrix UniMatrix::from_superdiagonal(std::span<const unsigned> superdiag, unsigned p) {
  UniMatrix m(static_cast<int>(superdiag.size()) + 1, p);
  for (std::size_t i = 0; i < superdiag.size(); ++i)
    m.set(static_cast<int>(i) + 1, static_cast<int>(i) + 2, superdiag[i]);
  return m;
}

UniMatrix group_mul(UniMatrix const& a, UniMatrix const& b) {
  check_compatible(a, b);
  int const n = a.size();
  unsigned const p = a.modulus();
  UniMatrix c(n, p);
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      unsigned acc = a.coord(triangle_index(n, i, j)) + b.coord(triangle_index(n, i, j));
      for (int k = i + 1; k < j; ++k)
        acc += a.coord(triangle_index(n, i, k)) * b.coord(triangle_index(n, k, j));
      c.set_coord(triangle_index(n, i, j), acc);
    }
  return c;
}

UniMatrix group_inv(UniMatrix const& a) {
  // Row i of the inverse depends on rows below it.
  int const n = a.size();
  unsigned const p = a.modulus();
  UniMatrix x(n, p);
  for (int i = n - 1; i >= 1; --i)
    for (int j = i + 1; j <= n; ++j) {
      unsigned acc = a.coord(triangle_index(n, i, j));
      for (int k = i + 1; k < j; ++k)
        acc += a.coord(triangle_index(n, i, k)) * x.coord(triangle_index(n, k, j));
      x.set_coord(triangle_index(n, i, j), (p - acc % p) % p);
    }
  return x;
}

UniMatrix group_pow(UniMatrix const& a, Exponent e) {
  UniMatrix result(a.size(), a.modulus());
  if (e.is_infinite()) return result;
  UniMatrix base = a;
  for (auto k = e.value(); k; k >>= 1u) {
    if (k & 1u) result = group_mul(result, base);
    if (k > 1) base = group_mul(base, base);
  }
  return result;
}

UniMatrix group_comm(UniMatrix const& a, UniMatrix const& b) {
  return group_mul(group_mul(group_inv(a), group_inv(b)), group_mul(a, b));
}

FpScalar proj_entry(UniMatrix const& a, int i, int j) {
  return {static_cast<std::int64_t>(a.at(i, j)), a.modulus()};
}

bool is_surjective_assignment(std::span<const UniMatrix> images, int n, unsigned p) {
  check_size(n);
  if (images.empty()) return false;
  FpMatrix m(static_cast<std::size_t>(n - 1), images.size(), p);
  for (std::size_t g = 0; g < images.size(); ++g) {
    if (images[g].size() != n || images[g].modulus() != p)
      throw ValidationError("image " + std::to_string(g + 1) + " is not in U_" +
                            std::to_string(n) + "(F_" + std::to_string(p) + ")");
    for (int k = 1; k < n; ++k) m.set(static_cast<std::size_t>(k - 1), g, images[g].at(k, k + 1));
  }
  return mat_rank(m) == static_cast<std::size_t>(n - 1);
}

BigInt aut_order(int n, unsigned p) {
  require_prime(p);
  BigInt const P(p);
  switch (n) {
    case 2:
      return P - 1;
    case 3:
      if (p == 2) return 8;
      return P * P * P * (P * P - 1) * (P - 1);
    case 4:
      if (p == 2) return 3 * BigInt(128);
      return 2 * (P - 1) * (P - 1) * (P - 1) * big_pow(p, 8);
    default:
      throw ValidationError("aut_order supports n in {2,3,4}, got " + std::to_string(n));
  }
}

// ---------------------------------------------------------------- UniBarMatrix

UniBarMatrix::UniBarMatrix(UniMatrix const& m) : m_(m) { m_.set(1, m.size(), 0); }

unsigned UniBarMatrix::at(int i, int j) const {
  if (i == 1 && j == size())
    throw ValidationError("the (1,n) entry is omitted in the quotient");
  return m_.at(i, j);
}

void UniBarMatrix::set(int i, int j, std::int64_t value) {
  if (i == 1 && j == size())
    throw ValidationError("the (1,n) entry is omitted in the quotient");
  m_.set(i, j, value);
}

UniBarMatrix UniBarMatrix::operator*(UniBarMatrix const& rhs) const {
  return UniBarMatrix(group_mul(m_, rhs.m_));
}

UniBarMatrix UniBarMatrix::inverse() const { return UniBarMatrix(group_inv(m_)); }

// ---------------------------------------------------------------- KernelElemM

UniMatrix KernelElemM::to_matrix(unsigned p) const {
  UniMatrix m(4, p);
  m.set(1, 3, m13);
  m.set(2, 4, m24);
  m.set(1, 4, m14);
  return m;
}

KernelElemM KernelElemM::from_matrix(UniMatrix const& a) {
  if (a.size() != 4) throw ValidationError("M lives in U_4");
  if (a.at(1, 2) || a.at(2, 3) || a.at(3, 4))
    throw ValidationError("matrix has nonzero superdiagonal, not in M");
  return {a.at(1, 3), a.at(2, 4), a.at(1, 4)};
}

// ---------------------------------------------------------------- UnipotentGroup

UnipotentGroup::UnipotentGroup(int n, unsigned p, bool omit_corner)
    : n_(n), p_(p), omit_corner_(omit_corner) {
  check_size(n);
  require_prime(p);
  if (omit_corner && n < 3)
    throw ValidationError("central quotient needs n >= 3");
  int const total = triangle_size(n);
  coords_ = omit_corner ? total - 1 : total;
  auto const big_order = big_pow(p, static_cast<unsigned>(coords_));
  if (big_order > kMaxOrder)
    throw BudgetError("group order " + big_order.str() + " too large to index", big_order);
  order_ = static_cast<std::uint64_t>(big_order);

  int const corner = triangle_index(n, 1, n);
  place_.assign(static_cast<std::size_t>(total), 0);
  std::uint64_t place = 1;
  for (int k = total - 1; k >= 0; --k) {
    if (omit_corner && k == corner) continue;
    place_[k] = place;
    place *= p;
  }

  if (p == 2 && order_ <= (std::uint64_t{1} << 22)) {
    superdiag_bits_.resize(order_);
    for (std::uint64_t e = 0; e < order_; ++e) {
      std::uint32_t bits = 0;
      for (int i = 1; i < n; ++i)
        if (coord(static_cast<Elem>(e), triangle_index(n, i, i + 1))) bits |= 1u << (i - 1);
      superdiag_bits_[e] = bits;
    }
  }

  if (order_ <= kTableOrder) {
    inverse_.resize(order_);
    for (std::uint64_t a = 0; a < order_; ++a) inverse_[a] = inv_direct(static_cast<Elem>(a));
    table_.resize(order_ * order_);
    for (std::uint64_t a = 0; a < order_; ++a) {
      auto const ma = decode_full(static_cast<Elem>(a));
      for (std::uint64_t b = 0; b < order_; ++b)
        table_[a * order_ + b] = encode(group_mul(ma, decode_full(static_cast<Elem>(b))));
    }
  }
}

unsigned UnipotentGroup::coord(Elem e, int k) const {
  auto const place = place_[k];
  if (!place) return 0;
  return static_cast<unsigned>((e / place) % p_);
}

UnipotentGroup::Elem UnipotentGroup::encode(UniMatrix const& m) const {
  if (m.size() != n_ || m.modulus() != p_)
    throw ValidationError("matrix does not belong to this group");
  std::uint64_t idx = 0;
  for (int k = 0; k < triangle_size(n_); ++k) idx += place_[k] * m.coord(k);
  return static_cast<Elem>(idx);
}

UniMatrix UnipotentGroup::decode_full(Elem e) const {
  UniMatrix m(n_, p_);
  for (int k = 0; k < triangle_size(n_); ++k) m.set_coord(k, coord(e, k));
  return m;
}

UniMatrix UnipotentGroup::decode(Elem e) const {
  if (e >= order_) throw ValidationError("element index out of range");
  return decode_full(e);
}

UnipotentGroup::Elem UnipotentGroup::mul_direct(Elem a, Elem b) const {
  return encode(group_mul(decode_full(a), decode_full(b)));
}

UnipotentGroup::Elem UnipotentGroup::inv_direct(Elem a) const {
  // In the quotient the corner of the inverse is irrelevant: encode drops it.
  return encode(group_inv(decode_full(a)));
}

UnipotentGroup::Elem UnipotentGroup::pow(Elem a, Exponent e) const {
  if (e.is_infinite()) return identity();
  Elem result = identity(), base = a;
  for (auto k = e.value(); k; k >>= 1u) {
    if (k & 1u) result = mul(result, base);
    if (k > 1) base = mul(base, base);
  }
  return result;
}

std::array<std::uint8_t, kMaxUniSize - 1> UnipotentGroup::superdiagonal(Elem e) const {
  std::array<std::uint8_t, kMaxUniSize - 1> out{};
  for (int i = 1; i < n_; ++i)
    out[i - 1] = static_cast<std::uint8_t>(coord(e, triangle_index(n_, i, i + 1)));
  return out;
}

UnipotentGroup::Elem UnipotentGroup::from_coords(std::span<const unsigned> full_coords) const {
  if (full_coords.size() != static_cast<std::size_t>(triangle_size(n_)))
    throw ValidationError("from_coords: wrong coordinate count");
  std::uint64_t idx = 0;
  for (std::size_t k = 0; k < full_coords.size(); ++k) idx += place_[k] * (full_coords[k] % p_);
  return static_cast<Elem>(idx);
}

std::size_t UnipotentGroup::superdiagonal_rank(std::span<const Elem> elems) const {
  if (!superdiag_bits_.empty() && elems.size() <= 64) {
    std::uint64_t rows[64];
    std::size_t count = 0;
    for (auto e : elems) rows[count++] = superdiag_bits_[e];
    return rank_f2_packed({rows, count});
  }
  FpMatrix m(elems.size(), static_cast<std::size_t>(n_ - 1), p_);
  for (std::size_t g = 0; g < elems.size(); ++g) {
    auto const sd = superdiagonal(elems[g]);
    for (int i = 0; i < n_ - 1; ++i) m.set(g, static_cast<std::size_t>(i), sd[i]);
  }
  return mat_rank(m);
}

}  // namespace mcensus
