#include <doctest.h>

#include <vector>

#include "mcensus/unipotent.hpp"

using namespace mcensus;

namespace {

using Dense = std::vector<std::vector<unsigned>>;

Dense dense(UniMatrix const& m) {
  int const n = m.size();
  Dense d(n, std::vector<unsigned>(n, 0));
  for (int i = 0; i < n; ++i) {
    d[i][i] = 1;
    for (int j = i + 1; j < n; ++j) d[i][j] = m.at(i + 1, j + 1);
  }
  return d;
}

Dense dense_mul(Dense const& a, Dense const& b, unsigned p) {
  std::size_t const n = a.size();
  Dense c(n, std::vector<unsigned>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] = (c[i][j] + a[i][k] * b[k][j]) % p;
  return c;
}

std::vector<UniMatrix> all_elements(int n, unsigned p) {
  std::vector<UniMatrix> out;
  int const t = triangle_size(n);
  std::uint64_t total = 1;
  for (int i = 0; i < t; ++i) total *= p;
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    UniMatrix m(n, p);
    std::uint64_t r = idx;
    for (int k = 0; k < t; ++k) {
      m.set_coord(k, static_cast<unsigned>(r % p));
      r /= p;
    }
    out.push_back(m);
  }
  return out;
}

UniMatrix elementary(int n, unsigned p, int i, int j) {
  UniMatrix m(n, p);
  m.set(i, j, 1);
  return m;
}

}  // namespace

TEST_CASE("multiplication matches dense matrix products in U_3(F_3)") {
  auto const elems = all_elements(3, 3);
  for (std::size_t a = 0; a < elems.size(); a += 5)
    for (std::size_t b = 0; b < elems.size(); b += 3)
      CHECK(dense(group_mul(elems[a], elems[b])) == dense_mul(dense(elems[a]), dense(elems[b]), 3));
}

TEST_CASE("group axioms in U_4(F_2)") {
  auto const elems = all_elements(4, 2);
  REQUIRE(elems.size() == 64);
  UniMatrix const id(4, 2);
  CHECK(group_mul(id, id) == id);
  for (auto const& x : elems) {
    CHECK(group_mul(x, group_inv(x)).is_identity());
    CHECK(group_pow(x, Exponent::finite(4)).is_identity());
    CHECK(group_pow(x, Exponent::p_infinity()).is_identity());
  }
  for (std::size_t a = 0; a < 64; a += 7)
    for (std::size_t b = 0; b < 64; b += 5)
      for (std::size_t c = 0; c < 64; c += 11)
        CHECK(group_mul(group_mul(elems[a], elems[b]), elems[c]) ==
              group_mul(elems[a], group_mul(elems[b], elems[c])));
}

TEST_CASE("cube of the superdiagonal-ones element of U_4(F_3)") {
  std::vector<unsigned> const ones{1, 1, 1};
  auto const x = UniMatrix::from_superdiagonal(ones, 3);
  auto const cube = group_pow(x, Exponent::finite(3));
  CHECK_FALSE(cube.is_identity());
  CHECK(cube.at(1, 4) == 1);
  CHECK(cube.at(1, 2) == 0);
  CHECK(cube.at(1, 3) == 0);
}

TEST_CASE("projections") {
  UniMatrix const id(4, 2);
  CHECK(proj_entry(id, 1, 2).value() == 0);
  std::vector<unsigned> const ones{1, 1, 1};
  CHECK(proj_entry(UniMatrix::from_superdiagonal(ones, 2), 2, 3).value() == 1);

  auto const elems = all_elements(3, 2);
  for (auto const& x : elems)
    for (auto const& y : elems)
      for (int i = 1; i < 3; ++i)
        CHECK(proj_entry(group_mul(x, y), i, i + 1) == proj_entry(x, i, i + 1) + proj_entry(y, i, i + 1));
}

TEST_CASE("commutator of elementary matrices") {
  auto const c = group_comm(elementary(4, 2, 1, 2), elementary(4, 2, 2, 3));
  for (int i = 1; i <= 4; ++i)
    for (int j = i + 1; j <= 4; ++j) CHECK(c.at(i, j) == (i == 1 && j == 3 ? 1u : 0u));
}

TEST_CASE("surjectivity of generator images") {
  std::vector<UniMatrix> imgs;
  for (int g = 0; g < 3; ++g) imgs.push_back(elementary(4, 2, g + 1, g + 2));
  CHECK(is_surjective_assignment(imgs, 4, 2));
  std::vector<UniMatrix> const ids(3, UniMatrix(4, 2));
  CHECK_FALSE(is_surjective_assignment(ids, 4, 2));
  std::vector<UniMatrix> five;
  for (int g = 0; g < 3; ++g) five.push_back(elementary(5, 2, g + 1, g + 2));
  CHECK_FALSE(is_surjective_assignment(five, 5, 2));
}

TEST_CASE("automorphism group orders") {
  CHECK(aut_order(4, 2) == 384);
  CHECK(aut_order(3, 2) == 8);
  CHECK(aut_order(4, 3) == 104976);
  CHECK(aut_order(2, 2) == 1);
  CHECK(aut_order(2, 5) == 4);
  CHECK_THROWS_AS(aut_order(5, 2), ValidationError);
}

TEST_CASE("encoded group agrees with matrix arithmetic") {
  for (unsigned p : {2u, 3u}) {
    UnipotentGroup const g(4, p);
    CHECK(g.order() == (p == 2 ? 64u : 729u));
    for (std::uint32_t a = 0; a < g.order(); a += 13)
      for (std::uint32_t b = 0; b < g.order(); b += 17) {
        CHECK(g.decode(g.mul(a, b)) == group_mul(g.decode(a), g.decode(b)));
        CHECK(g.decode(g.inv(a)) == group_inv(g.decode(a)));
        CHECK(g.decode(g.comm(a, b)) == group_comm(g.decode(a), g.decode(b)));
      }
    for (std::uint32_t a = 0; a < g.order(); ++a) CHECK(g.encode(g.decode(a)) == a);
  }
}

TEST_CASE("corner-free quotient drops the (1,n) entry") {
  UnipotentGroup const bar(4, 2, true);
  CHECK(bar.order() == 32);
  for (std::uint32_t a = 0; a < bar.order(); a += 3)
    for (std::uint32_t b = 0; b < bar.order(); b += 5) {
      UniBarMatrix const x(bar.decode(a)), y(bar.decode(b));
      CHECK(UniBarMatrix(bar.decode(bar.mul(a, b))) == x * y);
    }
}

TEST_CASE("kernel elements round-trip") {
  KernelElemM const k{1, 0, 1};
  auto const m = k.to_matrix(2);
  CHECK(m.at(1, 3) == 1);
  CHECK(m.at(1, 4) == 1);
  CHECK(KernelElemM::from_matrix(m) == k);
}
