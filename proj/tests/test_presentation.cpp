#include <doctest.h>

#include <random>

#include "mcensus/presentation.hpp"

using namespace mcensus;

namespace {

UniMatrix random_element(std::mt19937& rng, int n, unsigned p) {
  UniMatrix m(n, p);
  for (int k = 0; k < triangle_size(n); ++k) m.set_coord(k, rng() % p);
  return m;
}

GroupWord x(int i) { return GroupWord::gen(i); }

// Evaluates both words on many random assignments.
bool same_function(GroupWord const& a, GroupWord const& b, int rank, int n, unsigned p) {
  std::mt19937 rng(5);
  for (int t = 0; t < 200; ++t) {
    std::vector<UniMatrix> imgs;
    for (int g = 0; g < rank; ++g) imgs.push_back(random_element(rng, n, p));
    if (!(evaluate_word(a, imgs) == evaluate_word(b, imgs))) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("standard relator D1 at d=4, q=4") {
  DemushkinSpec const s{4, QInvariant::finite(2), DemushkinCase::D1, std::nullopt};
  auto const pres = demushkin_presentation(s, 2);
  REQUIRE(pres.relators().size() == 1);
  CHECK(pres.rank() == 4);
  auto const expected = GroupWord::prod({GroupWord::pow(x(1), Exponent::finite(4)), GroupWord::comm(x(1), x(2)),
                                         GroupWord::comm(x(3), x(4))});
  CHECK(same_function(pres.relators()[0], expected, 4, 4, 2));
  CHECK(pres.relators()[0].to_string() == "x1^4*[x1,x2]*[x3,x4]");
}

TEST_CASE("D2 with f infinite drops the second power") {
  DemushkinSpec const s{3, QInvariant::finite(1), DemushkinCase::D2, std::nullopt};
  auto const pres = demushkin_presentation(s, 2);
  auto const expected = GroupWord::prod({GroupWord::pow(x(1), Exponent::finite(2)), GroupWord::comm(x(2), x(3))});
  CHECK(same_function(pres.relators()[0], expected, 3, 4, 2));
}

TEST_CASE("case constraints") {
  CHECK_THROWS_AS((DemushkinSpec{3, QInvariant::finite(1), DemushkinCase::D1, std::nullopt}.validate(3)),
                  ValidationError);
  CHECK_THROWS_AS((DemushkinSpec{4, QInvariant::finite(1), DemushkinCase::D1, std::nullopt}.validate(2)),
                  ValidationError);
  CHECK_THROWS_AS((DemushkinSpec{4, QInvariant::finite(1), DemushkinCase::D2, std::nullopt}.validate(2)),
                  ValidationError);
  CHECK_THROWS_AS((DemushkinSpec{4, QInvariant::finite(1), DemushkinCase::D4, std::nullopt}.validate(2)),
                  ValidationError);
  CHECK_THROWS_AS((DemushkinSpec{3, QInvariant::finite(1), DemushkinCase::D2, 1u}.validate(2)), ValidationError);
  CHECK_NOTHROW((DemushkinSpec{4, QInvariant::finite(1), DemushkinCase::D4, 2u}.validate(2)));
  CHECK_NOTHROW((DemushkinSpec{2, QInvariant::finite(1), DemushkinCase::D1, std::nullopt}.validate(3)));
}

TEST_CASE("word evaluation") {
  std::vector<UniMatrix> const ids(2, UniMatrix(4, 2));
  CHECK(evaluate_word(GroupWord::comm(x(1), x(2)), ids).is_identity());

  UniMatrix a(4, 2), b(4, 2);
  a.set(1, 2, 1);
  b.set(2, 3, 1);
  std::vector<UniMatrix> const imgs{a, b};
  auto const c = evaluate_word(GroupWord::comm(x(1), x(2)), imgs);
  for (int i = 1; i <= 4; ++i)
    for (int j = i + 1; j <= 4; ++j) CHECK(c.at(i, j) == (i == 1 && j == 3 ? 1u : 0u));

  std::mt19937 rng(1);
  std::vector<UniMatrix> const r{random_element(rng, 4, 3)};
  CHECK(evaluate_word(GroupWord::pow(x(1), Exponent::p_infinity()), r).is_identity());
  CHECK_THROWS_AS(evaluate_word(x(2), r), ValidationError);
}

TEST_CASE("presets") {
  auto const b = preset("borromean");
  CHECK(b.presentation.rank() == 3);
  CHECK(b.presentation.relators().size() == 2);
  auto const r = preset("ram01");
  CHECK(r.presentation.rank() == 3);
  CHECK(r.presentation.relators().empty());
  auto const c = preset("counterexample1");
  CHECK(c.presentation.rank() == 4);
  REQUIRE(c.presentation.relators().size() == 1);
  CHECK(same_function(c.presentation.relators()[0], GroupWord::comm(GroupWord::comm(x(2), x(3)), x(1)), 4, 4, 2));
  CHECK_THROWS_AS(preset("nope"), ValidationError);
}

TEST_CASE("presentation JSON round trip") {
  DemushkinSpec const s{4, QInvariant::finite(1), DemushkinCase::D4, 3u};
  auto const pres = demushkin_presentation(s, 2);
  auto const doc = PositionedJson::parse(pres.to_json().dump());
  auto const back = Presentation::from_json(doc);
  CHECK(back.rank() == pres.rank());
  REQUIRE(back.relators().size() == 1);
  CHECK(back.relators()[0] == pres.relators()[0]);
}

TEST_CASE("malformed presentations name their position") {
  auto const bad = PositionedJson::parse("{\n  \"rank\": 2,\n  \"relators\": [[\"gen\", 3]]\n}", "bad.json");
  try {
    (void)Presentation::from_json(bad);
    FAIL("expected a validation error");
  } catch (ValidationError const& e) {
    std::string const what = e.what();
    CHECK(what.find("bad.json:3") != std::string::npos);
  }
  CHECK_THROWS_AS(PositionedJson::parse("{\"rank\": "), ValidationError);
}

TEST_CASE("free products shift generators") {
  DemushkinSpec const s{3, QInvariant::finite(1), DemushkinCase::D2, std::nullopt};
  auto const fp = free_product({demushkin_presentation(s, 2), free_presentation(2)});
  CHECK(fp.rank() == 5);
  REQUIRE(fp.relators().size() == 1);
  CHECK(fp.relators()[0].max_generator() == 3);
}

TEST_CASE("q-invariant parsing") {
  CHECK(QInvariant::parse("4", 2) == QInvariant::finite(2));
  CHECK(QInvariant::parse("inf", 3).is_infinite());
  CHECK(QInvariant::parse("2", 2).is_two(2));
  CHECK_THROWS_AS(QInvariant::parse("6", 2), ValidationError);
  CHECK(QInvariant::finite(2).to_string(3) == "9");
}

TEST_CASE("relator data") {
  RamifiedRelatorData data(3, 1, 2);
  data.set(2, 3, 1, 1, 3);
  CHECK(data.get(2, 3, 1, 1) == 1);
  CHECK_THROWS_AS(data.set(3, 2, 1, 1, 1), ValidationError);
  CHECK_THROWS_AS(data.set(1, 2, 3, 1, 1), ValidationError);
  auto const pres = data.to_presentation();
  CHECK(same_function(pres.relators()[0], GroupWord::comm(GroupWord::comm(x(2), x(3)), x(1)), 3, 4, 2));
  auto const back = RamifiedRelatorData::from_json(PositionedJson::parse(data.to_json().dump()));
  CHECK(back.terms(1) == data.terms(1));
}
