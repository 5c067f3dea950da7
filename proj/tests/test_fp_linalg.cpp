#include <doctest.h>

#include <random>
#include <set>

#include "mcensus/fp_linalg.hpp"

using namespace mcensus;

namespace {

FpVector vec(std::vector<std::uint8_t> e, unsigned p) { return FpVector(std::move(e), p); }

// Rank as log_p of the size of the row span, found by closing under addition.
std::size_t rank_by_span(FpMatrix const& m) {
  unsigned const p = m.modulus();
  std::set<FpVector> span{FpVector::zero(m.cols(), p)};
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::set<FpVector> next;
    for (auto const& v : span)
      for (unsigned c = 0; c < p; ++c) next.insert(v + m.row(r).scaled(c));
    span = std::move(next);
  }
  std::size_t rank = 0;
  for (std::size_t size = 1; size < span.size(); size *= p) ++rank;
  return rank;
}

}  // namespace

TEST_CASE("scalar arithmetic reduces mod p") {
  FpScalar const a(5, 3), b(-1, 3);
  CHECK(a.value() == 2);
  CHECK(b.value() == 2);
  CHECK((a + b).value() == 1);
  CHECK((a * b).value() == 1);
  CHECK((a * a.inverse()).value() == 1);
  CHECK_THROWS_AS(FpScalar(0, 3).inverse(), ValidationError);
}

TEST_CASE("rank examples") {
  CHECK(mat_rank(FpMatrix::identity(3, 2)) == 3);
  CHECK(mat_rank(FpMatrix(3, 5, 3)) == 0);
  std::vector<FpVector> rows{vec({1, 1, 0}, 2), vec({0, 1, 1}, 2), vec({1, 0, 1}, 2)};
  CHECK(mat_rank(FpMatrix::from_rows(rows)) == 2);
}

TEST_CASE("rank agrees with span size on random matrices") {
  std::mt19937 rng(7);
  for (unsigned p : {2u, 3u, 5u}) {
    for (int trial = 0; trial < 40; ++trial) {
      std::size_t const r = 1 + rng() % 4, c = 1 + rng() % 4;
      FpMatrix m(r, c, p);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m.set(i, j, rng() % p);
      CHECK(mat_rank(m) == rank_by_span(m));
      CHECK(mat_rank(m) <= std::min(r, c));
    }
  }
}

TEST_CASE("packed F_2 rank matches generic rank") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t const r = 1 + rng() % 6, c = 1 + rng() % 6;
    FpMatrix m(r, c, 2);
    std::vector<std::uint64_t> packed;
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) m.set(i, j, rng() % 2);
      packed.push_back(pack_f2(m.row(i)));
      CHECK(unpack_f2(packed.back(), c) == m.row(i));
    }
    CHECK(rank_f2_packed(packed) == mat_rank(m));
  }
}

TEST_CASE("form evaluation") {
  auto const s = GramForm::standard_symplectic(2, 3);
  CHECK(form_eval(s, vec({1, 0}, 3), vec({0, 1}, 3)).value() == 1);
  CHECK(form_eval(s, vec({0, 1}, 3), vec({1, 0}, 3)).value() == 2);
  CHECK(form_eval(s, FpVector::zero(2, 3), FpVector::zero(2, 3)).value() == 0);

  FpMatrix m(3, 3, 2);
  m.set(0, 0, 1);
  m.set(1, 2, 1);
  m.set(2, 1, 1);
  GramForm const g(m, DiagonalProfile::first_one);
  CHECK(form_eval(g, vec({1, 0, 0}, 2), vec({1, 0, 0}, 2)).value() == 1);
  CHECK(is_nondegenerate(g));
  CHECK_FALSE(g.is_alternate());
}

TEST_CASE("form is bilinear and skew on random inputs") {
  std::mt19937 rng(3);
  auto const f = GramForm::standard_symplectic(4, 5);
  auto rnd = [&] {
    std::vector<std::uint8_t> e(4);
    for (auto& x : e) x = static_cast<std::uint8_t>(rng() % 5);
    return FpVector(e, 5);
  };
  for (int t = 0; t < 100; ++t) {
    auto const x = rnd(), y = rnd(), z = rnd();
    unsigned const c = rng() % 5;
    CHECK(form_eval(f, x + y, z) == form_eval(f, x, z) + form_eval(f, y, z));
    CHECK(form_eval(f, x.scaled(c), z) == form_eval(f, x, z) * FpScalar(c, 5));
    CHECK(form_eval(f, x, y) == -form_eval(f, y, x));
  }
}

TEST_CASE("Gram constructor rejects non-skew matrices") {
  FpMatrix m(2, 2, 3);
  m.set(0, 1, 1);
  m.set(1, 0, 1);
  CHECK_THROWS_AS(GramForm(m, DiagonalProfile::all_zero), ValidationError);
}

TEST_CASE("nondegeneracy") {
  CHECK(is_nondegenerate(GramForm::standard_symplectic(4, 2)));
  CHECK_FALSE(is_nondegenerate(GramForm::zero(3, 2)));
}

TEST_CASE("vector enumeration") {
  auto const one = enumerate_vectors(1, 2);
  std::vector<FpVector> got(one.begin(), one.end());
  REQUIRE(got.size() == 2);
  CHECK(got[0] == vec({0}, 2));
  CHECK(got[1] == vec({1}, 2));

  auto const two = enumerate_vectors(2, 2);
  std::vector<FpVector> all(two.begin(), two.end());
  REQUIRE(all.size() == 4);
  CHECK(all.front() == vec({0, 0}, 2));
  CHECK(all.back() == vec({1, 1}, 2));

  auto const three = enumerate_vectors(3, 3);
  CHECK(three.size() == 27);
  std::set<FpVector> distinct(three.begin(), three.end());
  CHECK(distinct.size() == 27);
  for (std::uint64_t i = 0; i < 27; ++i) CHECK(index_of_vector(vector_from_index(i, 3, 3)) == i);

  CHECK_THROWS_AS(enumerate_vectors(30, 2, 1000), BudgetError);
}

TEST_CASE("checked power overflows into a budget error") {
  CHECK(checked_pow(3, 4) == 81);
  CHECK_THROWS_AS(checked_pow(2, 64), BudgetError);
}

TEST_CASE("invalid moduli are rejected") {
  CHECK_THROWS_AS(require_prime(4), ValidationError);
  CHECK_THROWS_AS(require_prime(257), ValidationError);
  CHECK_NOTHROW(require_prime(251));
}
