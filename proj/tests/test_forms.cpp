#include <doctest.h>

#include <random>

#include "mcensus/forms.hpp"

using namespace mcensus;

namespace {

DemushkinSpec ds(int d, unsigned s, DemushkinCase c, std::optional<unsigned> f = std::nullopt) {
  return {d, s ? QInvariant::finite(s) : QInvariant::infinite(), c, f};
}

void check_consecutive(GramForm const& g) {
  auto const basis = consecutive_orthogonal_basis(g);
  REQUIRE(basis.size() == g.dim());
  CHECK(mat_rank(FpMatrix::from_rows(basis)) == g.dim());
  for (std::size_t i = 0; i + 1 < basis.size(); ++i) CHECK(form_eval(g, basis[i], basis[i + 1]).value() == 0);
}

FpVector e(std::size_t dim, std::size_t i, unsigned p) { return FpVector::unit(dim, i, p); }

}  // namespace

TEST_CASE("Gram matrices of the standard relators") {
  auto const d1 = gram_from_demushkin(ds(4, 2, DemushkinCase::D1), 2);
  CHECK(d1.is_alternate());
  CHECK(is_nondegenerate(d1));
  for (std::size_t i = 0; i < 4; ++i) CHECK(d1.matrix()(i, i) == 0);

  auto const d2 = gram_from_demushkin(ds(3, 1, DemushkinCase::D2), 2);
  FpMatrix want(3, 3, 2);
  want.set(0, 0, 1);
  want.set(1, 2, 1);
  want.set(2, 1, 1);
  CHECK(d2.matrix() == want);
  CHECK(is_nondegenerate(d2));

  auto const small = gram_from_demushkin(ds(2, 1, DemushkinCase::D1), 3);
  CHECK(small.matrix()(0, 1) == 1);
  CHECK(small.matrix()(1, 0) == 2);
  CHECK(small.matrix()(0, 0) == 0);
}

TEST_CASE("every legal relator has a nondegenerate cup form") {
  std::vector<std::pair<DemushkinSpec, unsigned>> const cases{
      {ds(3, 1, DemushkinCase::D2, 2), 2}, {ds(5, 1, DemushkinCase::D2), 2},   {ds(4, 0, DemushkinCase::D1), 2},
      {ds(4, 1, DemushkinCase::D3, 3), 2}, {ds(6, 1, DemushkinCase::D4, 2), 2}, {ds(4, 1, DemushkinCase::D1), 3},
      {ds(6, 2, DemushkinCase::D1), 5}};
  for (auto const& [s, p] : cases) {
    auto const g = gram_from_demushkin(s, p);
    CHECK(is_nondegenerate(g));
    // Odd p, or even powers at p = 2, give an alternate form.
    CHECK(g.is_alternate() == !(p == 2 && s.q.is_two(2)));
  }
}

TEST_CASE("consecutive orthogonal bases") {
  check_consecutive(GramForm::zero(3, 2));
  check_consecutive(GramForm::standard_symplectic(4, 2));
  check_consecutive(GramForm::standard_symplectic(6, 3));
  check_consecutive(gram_from_demushkin(ds(3, 1, DemushkinCase::D2), 2));
  check_consecutive(gram_from_demushkin(ds(5, 1, DemushkinCase::D2, 2), 2));
  check_consecutive(gram_from_demushkin(ds(4, 1, DemushkinCase::D3), 2));
  check_consecutive(gram_from_demushkin(ds(6, 1, DemushkinCase::D4, 3), 2));
  CHECK_THROWS_AS(consecutive_orthogonal_basis(GramForm::standard_symplectic(2, 2)), ValidationError);
}

TEST_CASE("consecutive bases for random skew forms") {
  std::mt19937 rng(17);
  for (unsigned p : {2u, 3u, 5u})
    for (std::size_t d = 3; d <= 6; ++d)
      for (int t = 0; t < 10; ++t) {
        FpMatrix m(d, d, p);
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = i + 1; j < d; ++j) {
            auto const v = rng() % p;
            m.set(i, j, v);
            m.set(j, i, -static_cast<std::int64_t>(v));
          }
        check_consecutive(GramForm(m, DiagonalProfile::all_zero));
      }
}

TEST_CASE("cup products on free products vanish block by block") {
  DemushkinSpec const s = ds(3, 1, DemushkinCase::D2);
  auto const fp = free_product({demushkin_presentation(s, 2), free_presentation(2)});
  auto const cup = cup_structure(fp, 2);
  CHECK(cup.dim() == 5);
  CHECK(cup.blocks().size() == 2);
  CHECK(cup.offset(1) == 3);
  CHECK_FALSE(cup.vanishes(e(5, 0, 2), e(5, 0, 2)));
  CHECK(cup.vanishes(e(5, 3, 2), e(5, 4, 2)));
  CHECK(cup.vanishes(e(5, 0, 2), e(5, 3, 2)));
  auto const v = cup.cup(e(5, 1, 2), e(5, 2, 2));
  REQUIRE(v.size() == 2);
  CHECK(v[0] == 1);
  CHECK(v[1] == 0);
}

TEST_CASE("cup-product identity for the commutator relator") {
  // For [x1,x2][x3,x4] the cup form pairs (1,2) and (3,4) only.
  auto const g = gram_from_demushkin(ds(4, 0, DemushkinCase::D1), 3);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      auto const val = form_eval(g, e(4, i, 3), e(4, j, 3)).value();
      bool const paired = (i / 2 == j / 2) && i != j;
      CHECK((val != 0) == paired);
    }
}

TEST_CASE("trilinear trace of the Borromean relators") {
  auto const data = *preset("borromean").relator_data;
  TrilinearForm const t(data);
  CHECK(t.trace(e(3, 0, 2), e(3, 1, 2), e(3, 2, 2), 1).value() == 1);
  CHECK(t.trace(e(3, 0, 2), e(3, 1, 2), e(3, 2, 2), 2).value() == 0);

  TrilinearForm const zero(RamifiedRelatorData(3, 2, 2));
  CHECK(zero.all_vanish(e(3, 0, 2), e(3, 1, 2), e(3, 2, 2)));
}

TEST_CASE("trace agrees with its expanded form on random tensors") {
  std::mt19937 rng(23);
  for (unsigned p : {2u, 3u}) {
    RamifiedRelatorData data(4, 2, p);
    for (int m = 1; m <= 2; ++m)
      for (int i = 1; i <= 4; ++i)
        for (int j = i + 1; j <= 4; ++j)
          for (int k = 1; k <= j; ++k) data.set(i, j, k, m, rng() % p);
    TrilinearForm const t(data);
    auto rnd = [&] {
      std::vector<std::uint8_t> v(4);
      for (auto& x : v) x = static_cast<std::uint8_t>(rng() % p);
      return FpVector(v, p);
    };
    for (int trial = 0; trial < 100; ++trial) {
      auto const a = rnd(), b = rnd(), c = rnd();
      for (int m = 1; m <= 2; ++m) CHECK(t.trace(a, b, c, m) == t.trace_expanded(a, b, c, m));
    }
  }
}

TEST_CASE("Redei tables") {
  auto const doc = PositionedJson::parse(R"({"primes": [5, 13, 17],
    "symbols": [{"triple": [1, 2, 3], "value": -1}], "default": 1})");
  auto const data = redei_relator_data(doc);
  CHECK(data.n() == 3);
  CHECK(data.modulus() == 2);
  bool any = false;
  for (int m = 1; m <= data.relator_count(); ++m) any = any || !data.terms(m).empty();
  CHECK(any);

  auto const permuted = redei_relator_data(PositionedJson::parse(R"({"primes": [5, 13, 17],
    "symbols": [{"triple": [3, 1, 2], "value": -1}], "default": 1})"));
  for (int m = 1; m <= data.relator_count(); ++m) CHECK(permuted.terms(m) == data.terms(m));

  CHECK_THROWS_AS(redei_relator_data(PositionedJson::parse(R"({"primes": [5, 7]})")), ValidationError);
  CHECK_THROWS_AS(redei_relator_data(PositionedJson::parse(R"({"primes": [5, 13, 17]})")), ValidationError);
}
