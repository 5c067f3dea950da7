#pragma once

// Counting pathways: TMP and CP enumeration, closed forms, cocycle counts,
// epimorphism counts onto U_n(F_p) and the resulting extension counts.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mcensus/forms.hpp"
#include "mcensus/oracle.hpp"
#include "mcensus/presentation.hpp"

namespace mcensus {

struct DemushkinModel {
  DemushkinSpec spec;
};
struct FreeModel {
  int d = 0;
};
/// Demushkin group of rank spec.d free product a free group of rank e.
struct FreeProductDFModel {
  DemushkinSpec spec;
  int e = 0;
};
/// Free product of two Demushkin groups.
struct FreeProductDDModel {
  DemushkinSpec first;
  DemushkinSpec second;
};
/// Relators congruent to products of triple commutators.
struct SThreeModel {
  RamifiedRelatorData data;
  std::string name;
};

using GroupModel =
    std::variant<DemushkinModel, FreeModel, FreeProductDFModel, FreeProductDDModel, SThreeModel>;

/// Validates case constraints (and factor ranks) for this p.
void validate_model(GroupModel const& model, unsigned p);
int model_rank(GroupModel const& model);
std::string model_name(GroupModel const& model, unsigned p);
Json model_to_json(GroupModel const& model, unsigned p);
Presentation model_presentation(GroupModel const& model, unsigned p);
/// Block cup form; SThree models have an identically zero cup product.
CupStructure model_cup(GroupModel const& model, unsigned p);

/// Image class of a triple: one flag per Demushkin factor, true when the
/// triple restricted to that factor has x = z = 0.
using ImageClass = std::vector<bool>;
std::string image_class_name(ImageClass const& c);
/// Parses "central", "noncentral", "any" or a comma-separated list per factor.
ImageClass parse_image_class(std::string const& text);

struct TmpTriple {
  FpVector x, y, z;
  bool operator==(TmpTriple const&) const = default;
  auto operator<=>(TmpTriple const&) const = default;
};

ImageClass classify_triple(GroupModel const& model, TmpTriple const& t);

inline constexpr std::uint64_t kDefaultTmpBudget = 100'000'000;

struct TmpOptions {
  /// Cap on primitive form evaluations and candidate triple checks.
  std::uint64_t budget = kDefaultTmpBudget;
  unsigned threads = 1;
  /// Also return the triples, sorted lexicographically by (x, y, z).
  bool list = false;
};

struct TmpResult {
  std::uint64_t count = 0;
  std::map<ImageClass, std::uint64_t> by_class;
  std::vector<TmpTriple> triples;
};

TmpResult tmp_enumerate(GroupModel const& model, unsigned p, TmpOptions const& opts = {});
BigInt tmp_closed(GroupModel const& model, unsigned p);

BigInt z1_closed(GroupModel const& model, unsigned p, ImageClass const& image_class);

enum class CpMethod { enumerate, closed };
BigInt cp_count(GroupModel const& model, unsigned p, CpMethod method,
                std::uint64_t budget = kDefaultTmpBudget);

enum class EpiMethod { formula, oracle, tmp_sum };
std::string to_string(EpiMethod m);
EpiMethod parse_epi_method(std::string const& text);

struct CensusOptions {
  TmpOptions tmp;
  OracleOptions oracle;
};

struct ClassTally {
  std::uint64_t triples = 0;
  BigInt z1 = 0;
};

struct CensusReport {
  Json model;
  std::string model_name;
  unsigned p = 2;
  int target = 4;
  std::optional<BigInt> tmp;
  std::map<std::string, ClassTally> z1_breakdown;
  BigInt epi = 0;
  std::optional<BigInt> nu;
  EpiMethod method = EpiMethod::formula;
  double ms = 0;
  /// Notes such as "exploratory" for parameter points outside the theory.
  std::vector<std::string> notes;

  /// Counts are decimal strings; p, target and ms are integers.
  Json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

/// |Epi(G, U_target(F_p))| for target in {2, 3, 4}.
CensusReport epi_count(GroupModel const& model, unsigned p, int target, EpiMethod method,
                       CensusOptions const& opts = {});

/// Adds nu = epi / |Aut(U_target)|; throws ConsistencyError if inexact.
CensusReport nu_extensions(GroupModel const& model, unsigned p, int target, EpiMethod method,
                           CensusOptions const& opts = {});

/// Demushkin model of G_K(p) for K of degree n over Q_p with q-invariant q.
DemushkinSpec local_field_model(int degree, unsigned p, QInvariant q);
/// Closed form for the number of Galois U_target-extensions of such K.
BigInt local_nu_formula(int degree, unsigned p, QInvariant q, int target);

/// True iff U_n(F_p) is a quotient: n <= d + 1 with d the total rank.
bool un_quotient_decision(GroupModel const& model, int n);
bool un_quotient_decision(int total_rank, int n);
/// Exhaustively searches for (n-1) x d superdiagonal matrices of rank n-1.
bool superdiagonal_rank_feasible(int d, int n, unsigned p);

}  // namespace mcensus
