#include <doctest.h>

#include <set>

#include "mcensus/census.hpp"

using namespace mcensus;

namespace {

DemushkinSpec ds(int d, unsigned s, DemushkinCase c, std::optional<unsigned> f = std::nullopt) {
  return {d, s ? QInvariant::finite(s) : QInvariant::infinite(), c, f};
}

// Independent TMP count: all triples, rank 3, (x,y) = (y,z) = 0 in every block.
std::set<TmpTriple> brute_tmp(CupStructure const& cup) {
  std::set<TmpTriple> out;
  auto const vs = enumerate_vectors(cup.dim(), cup.modulus());
  std::vector<FpVector> all(vs.begin(), vs.end());
  for (auto const& x : all)
    for (auto const& y : all) {
      if (!cup.vanishes(x, y)) continue;
      for (auto const& z : all) {
        if (!cup.vanishes(y, z)) continue;
        std::vector<FpVector> const rows{x, y, z};
        if (mat_rank(FpMatrix::from_rows(rows)) == 3) out.insert({x, y, z});
      }
    }
  return out;
}

BigInt P(unsigned p, int k) { return big_pow(p, static_cast<unsigned>(k)); }

}  // namespace

TEST_CASE("TMP counts from the worked examples") {
  CHECK(tmp_enumerate(SThreeModel{*preset("borromean").relator_data, "borromean"}, 2).count == 6);
  CHECK(tmp_enumerate(FreeModel{3}, 2).count == 168);
  CHECK(tmp_enumerate(DemushkinModel{ds(3, 1, DemushkinCase::D2)}, 2).count == 24);
  CHECK(tmp_enumerate(DemushkinModel{ds(4, 2, DemushkinCase::D1)}, 2).count == 360);
  auto const dd = ds(2, 2, DemushkinCase::D1);
  CHECK(tmp_enumerate(FreeProductDDModel{dd, dd}, 2).count == 144);
}

TEST_CASE("TMP enumeration equals an independent triple search") {
  std::vector<std::pair<GroupModel, unsigned>> const cases{
      {DemushkinModel{ds(3, 1, DemushkinCase::D2, 2)}, 2}, {DemushkinModel{ds(4, 1, DemushkinCase::D3)}, 2},
      {DemushkinModel{ds(4, 0, DemushkinCase::D1)}, 2},    {DemushkinModel{ds(4, 1, DemushkinCase::D1)}, 3},
      {FreeProductDFModel{ds(3, 1, DemushkinCase::D2), 1}, 2}};
  for (auto const& [m, p] : cases) {
    auto const t = tmp_enumerate(m, p, {.list = true});
    auto const want = brute_tmp(model_cup(m, p));
    CHECK(t.count == want.size());
    CHECK(std::is_sorted(t.triples.begin(), t.triples.end()));
    CHECK(std::set<TmpTriple>(t.triples.begin(), t.triples.end()) == want);
    std::uint64_t by_class = 0;
    for (auto const& [c, n] : t.by_class) by_class += n;
    CHECK(by_class == t.count);
    CHECK(BigInt(t.count) == tmp_closed(m, p));
  }
}

TEST_CASE("threads do not change TMP results") {
  GroupModel const m = DemushkinModel{ds(4, 1, DemushkinCase::D1)};
  auto const one = tmp_enumerate(m, 3, {.list = true});
  auto const many = tmp_enumerate(m, 3, {.threads = 4, .list = true});
  CHECK(one.count == many.count);
  CHECK(one.triples == many.triples);
}

TEST_CASE("TMP budget") {
  CHECK_THROWS_AS(tmp_enumerate(DemushkinModel{ds(6, 1, DemushkinCase::D1)}, 5, {.budget = 1000}), BudgetError);
}

TEST_CASE("closed-form TMP counts") {
  for (int d : {3, 4, 5, 6})
    CHECK(tmp_closed(FreeModel{d}, 2) == (P(2, d) - 1) * (P(2, d) - 2) * (P(2, d) - 4));
  // Alternate profile: (p^d - 1)(p^{d-1} - p)(p^{d-1} - p^2).
  CHECK(tmp_closed(DemushkinModel{ds(4, 1, DemushkinCase::D1)}, 5) == BigInt(624) * 120 * 100);
  // First-one profile at p = 2: (2^{d-1} - 1)(2^{d-1} - 2)(2^d - 4).
  CHECK(tmp_closed(DemushkinModel{ds(5, 1, DemushkinCase::D2)}, 2) == BigInt(15) * 14 * 28);
  CHECK_THROWS_AS(tmp_closed(DemushkinModel{ds(2, 2, DemushkinCase::D1)}, 2), ValidationError);
}

TEST_CASE("cocycle counts") {
  GroupModel const d3 = DemushkinModel{ds(3, 1, DemushkinCase::D2)};
  CHECK(z1_closed(d3, 2, parse_image_class("noncentral")) == 256);
  CHECK(z1_closed(d3, 2, parse_image_class("central")) == 512);
  CHECK(z1_closed(FreeModel{3}, 2, parse_image_class("any")) == 512);
  GroupModel const df = FreeProductDFModel{ds(3, 1, DemushkinCase::D2), 1};
  CHECK(z1_closed(df, 2, parse_image_class("noncentral")) == P(2, 11));
  CHECK(z1_closed(df, 2, parse_image_class("central")) == P(2, 12));
  CHECK_THROWS_AS(z1_closed(DemushkinModel{ds(2, 2, DemushkinCase::D1)}, 2, parse_image_class("noncentral")),
                  ValidationError);
}

TEST_CASE("image classes") {
  CHECK(image_class_name(parse_image_class("central,noncentral")) == "central,noncentral");
  CHECK_THROWS_AS(parse_image_class("sideways"), ValidationError);
  GroupModel const m = DemushkinModel{ds(3, 1, DemushkinCase::D2)};
  auto const t = tmp_enumerate(m, 2, {.list = true});
  for (auto const& tr : t.triples) CHECK(image_class_name(classify_triple(m, tr)) == "noncentral");
}

TEST_CASE("epimorphism counts by formula and by TMP sums") {
  GroupModel const d3 = DemushkinModel{ds(3, 1, DemushkinCase::D2)};
  CHECK(epi_count(d3, 2, 4, EpiMethod::formula).epi == 6144);
  CHECK(epi_count(d3, 2, 4, EpiMethod::tmp_sum).epi == 6144);
  CHECK(epi_count(SThreeModel{*preset("borromean").relator_data, "b"}, 2, 4, EpiMethod::formula).epi == 3072);
  GroupModel const df = FreeProductDFModel{ds(3, 1, DemushkinCase::D2), 1};
  CHECK(epi_count(df, 2, 4, EpiMethod::formula).epi == 1327104);
  CHECK(epi_count(df, 2, 4, EpiMethod::tmp_sum).epi == 1327104);
  for (auto const& s : {ds(4, 2, DemushkinCase::D1), ds(4, 1, DemushkinCase::D3, 2), ds(4, 1, DemushkinCase::D4, 3)})
    CHECK(epi_count(DemushkinModel{s}, 2, 4, EpiMethod::formula).epi ==
          epi_count(DemushkinModel{s}, 2, 4, EpiMethod::tmp_sum).epi);
  CHECK(epi_count(DemushkinModel{ds(4, 1, DemushkinCase::D1)}, 3, 4, EpiMethod::formula).epi ==
        epi_count(DemushkinModel{ds(4, 1, DemushkinCase::D1)}, 3, 4, EpiMethod::tmp_sum).epi);
  CHECK_THROWS_AS(epi_count(d3, 2, 5, EpiMethod::formula), ValidationError);
}

TEST_CASE("pairs for U_3") {
  CHECK(cp_count(DemushkinModel{ds(3, 1, DemushkinCase::D2)}, 2, CpMethod::enumerate) == 18);
  CHECK(cp_count(DemushkinModel{ds(4, 2, DemushkinCase::D1)}, 2, CpMethod::enumerate) == 90);
  CHECK(cp_count(DemushkinModel{ds(4, 2, DemushkinCase::D1)}, 2, CpMethod::closed) == 90);
  CHECK(cp_count(FreeModel{2}, 3, CpMethod::enumerate) == 48);
  CHECK(cp_count(FreeModel{2}, 3, CpMethod::closed) == 48);
}

TEST_CASE("extension counts of local fields") {
  auto const q2 = QInvariant::finite(1);
  CHECK(local_nu_formula(1, 2, q2, 4) == 16);
  CHECK(local_nu_formula(1, 2, q2, 3) == 18);
  CHECK(local_nu_formula(1, 2, q2, 2) == 7);
  GroupModel const m = DemushkinModel{local_field_model(1, 2, q2)};
  for (int n = 2; n <= 4; ++n) CHECK(*nu_extensions(m, 2, n, EpiMethod::formula).nu == local_nu_formula(1, 2, q2, n));
  for (int deg = 1; deg <= 4; ++deg)
    for (auto const& q : {QInvariant::finite(1), QInvariant::finite(2), QInvariant::infinite()}) {
      if (!q.is_two(2) && deg % 2 == 1) continue;  // D1 needs even rank
      GroupModel const k = DemushkinModel{local_field_model(deg, 2, q)};
      CHECK(*nu_extensions(k, 2, 4, EpiMethod::formula).nu == local_nu_formula(deg, 2, q, 4));
    }
  CHECK_THROWS_AS(local_field_model(1, 3, QInvariant::finite(1)), ValidationError);
}

TEST_CASE("U_n quotient decision") {
  CHECK(un_quotient_decision(3, 4));
  CHECK_FALSE(un_quotient_decision(3, 5));
  CHECK(un_quotient_decision(1, 2));
  CHECK(un_quotient_decision(DemushkinModel{ds(3, 1, DemushkinCase::D2)}, 4));
  for (int d = 1; d <= 3; ++d)
    for (int n = 2; n <= 5; ++n) CHECK(un_quotient_decision(d, n) == superdiagonal_rank_feasible(d, n, 3));
  CHECK_THROWS_AS(superdiagonal_rank_feasible(4, 6, 5), BudgetError);
}

TEST_CASE("report serialization keeps counts as strings") {
  auto const r = nu_extensions(DemushkinModel{ds(3, 1, DemushkinCase::D2)}, 2, 4, EpiMethod::formula);
  auto const j = r.to_json();
  CHECK(j["epi"] == "6144");
  CHECK(j["nu"] == "16");
  CHECK(j["p"] == 2);
  CHECK(CensusReport::csv_header() == "model,p,target,method,tmp,epi,nu,ms");
  CHECK(r.csv_row().rfind("demushkin-D2-d3-q2-finf,2,4,formula,24,6144,16,", 0) == 0);
}
