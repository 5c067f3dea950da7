#pragma once

// Group words, pro-p presentations and the standard Demushkin relators.

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mcensus/json_io.hpp"
#include "mcensus/unipotent.hpp"

namespace mcensus {

/// Expression tree over generators x_1..x_d.
class GroupWord {
 public:
  enum class Kind { gen, prod, pow, comm };

  static GroupWord gen(int index);
  static GroupWord prod(std::vector<GroupWord> factors);
  static GroupWord pow(GroupWord base, Exponent e);
  /// [a, b] = a^-1 b^-1 a b
  static GroupWord comm(GroupWord a, GroupWord b);

  Kind kind() const noexcept { return kind_; }
  int generator() const noexcept { return gen_; }
  std::vector<GroupWord> const& children() const noexcept { return children_; }
  Exponent exponent() const noexcept { return exp_; }

  /// Largest generator index used (0 for an empty product).
  int max_generator() const;
  /// Same word with every generator index increased by offset.
  GroupWord shifted(int offset) const;

  /// Human-readable form, e.g. "x1^4*[x1,x2]*[x3,x4]".
  std::string to_string() const;

  /// Wire format: ["gen",i] | ["prod",w...] | ["pow",w,e|"p-inf"] | ["comm",a,b].
  Json to_json() const;
  static GroupWord from_json(PositionedJson const& doc, std::string const& pointer);

  bool operator==(GroupWord const& rhs) const;

 private:
  GroupWord(Kind k) : kind_(k) {}

  Kind kind_;
  int gen_ = 0;
  std::vector<GroupWord> children_;
  Exponent exp_ = Exponent::finite(1);
};

/// Substitutes images[i-1] for x_i and evaluates in U_n(F_p).
UniMatrix evaluate_word(GroupWord const& w, std::span<const UniMatrix> images);

/// q-invariant of a Demushkin group: q = p^s, or p^inf (= 0).
class QInvariant {
 public:
  static QInvariant finite(unsigned s);
  static QInvariant infinite() { return QInvariant(std::nullopt); }
  /// Parses "4" (a power of p) or "inf".
  static QInvariant parse(std::string const& text, unsigned p);

  bool is_infinite() const noexcept { return !s_; }
  unsigned log_p() const { return s_.value(); }
  /// True iff q = 2.
  bool is_two(unsigned p) const noexcept { return p == 2 && s_ == 1u; }
  Exponent as_exponent(unsigned p) const;
  std::string to_string(unsigned p) const;

  bool operator==(QInvariant const&) const = default;

 private:
  explicit QInvariant(std::optional<unsigned> s) : s_(s) {}
  std::optional<unsigned> s_;
};

enum class DemushkinCase { D1, D2, D3, D4 };

std::string to_string(DemushkinCase c);
DemushkinCase parse_demushkin_case(std::string const& text);

/// Parameters of one standard Demushkin relator; f unset means f = infinity.
struct DemushkinSpec {
  int d = 0;
  QInvariant q = QInvariant::infinite();
  DemushkinCase kind = DemushkinCase::D1;
  std::optional<unsigned> f;

  /// Throws ValidationError naming the violated constraint.
  void validate(unsigned p) const;
  bool operator==(DemushkinSpec const&) const = default;
};

class Presentation;

struct DemushkinTag {
  DemushkinSpec spec;
};
struct FreeTag {};
struct CustomTag {};
struct FreeProductTag {
  std::vector<Presentation> factors;
};

using PresentationTag = std::variant<DemushkinTag, FreeTag, CustomTag, FreeProductTag>;

class Presentation {
 public:
  Presentation(int rank, std::vector<GroupWord> relators, PresentationTag tag,
               std::string name = {});

  int rank() const noexcept { return rank_; }
  std::vector<GroupWord> const& relators() const noexcept { return relators_; }
  PresentationTag const& tag() const noexcept { return tag_; }
  std::string const& name() const noexcept { return name_; }

  Json to_json() const;
  /// {"rank": d, "relators": [word, ...], "name": optional string}
  static Presentation from_json(PositionedJson const& doc);
  static Presentation load_file(std::string const& path);

 private:
  int rank_;
  std::vector<GroupWord> relators_;
  PresentationTag tag_;
  std::string name_;
};

Presentation demushkin_presentation(DemushkinSpec const& spec, unsigned p);
Presentation free_presentation(int rank);
/// Disjoint union of generators and relators, factor by factor.
Presentation free_product(std::vector<Presentation> factors);

/// Exponents e_{i,j,k,m} of relators rho_m congruent to a product of triple
/// commutators [[x_i,x_j],x_k] (i < j, k <= j) modulo the fourth Zassenhaus
/// term.
class RamifiedRelatorData {
 public:
  struct Term {
    int i, j, k;
    unsigned e;
    bool operator==(Term const&) const = default;
  };

  RamifiedRelatorData(int n, int relator_count, unsigned p);

  int n() const noexcept { return n_; }
  int relator_count() const noexcept { return static_cast<int>(terms_.size()); }
  unsigned modulus() const noexcept { return p_; }

  /// Sets e_{i,j,k,m} (1-based m); validates the index ranges.
  void set(int i, int j, int k, int m, std::int64_t e);
  unsigned get(int i, int j, int k, int m) const;
  /// Nonzero terms of relator m in (i, j, k) lexicographic order.
  std::vector<Term> const& terms(int m) const;

  /// Relators prod [[x_i,x_j],x_k]^e as group words.
  Presentation to_presentation(std::string name = {}) const;

  /// {"n": 3, "p": 2, "relators": [{"m": 1, "terms": [{"i":2,"j":3,"k":1,"e":1}]}]}
  static RamifiedRelatorData from_json(PositionedJson const& doc, unsigned default_p = 2);
  Json to_json() const;

 private:
  void check(int i, int j, int k, int m) const;

  int n_;
  unsigned p_;
  std::vector<std::vector<Term>> terms_;
};

struct Preset {
  Presentation presentation;
  /// Present when every relator lies in the third Zassenhaus term.
  std::optional<RamifiedRelatorData> relator_data;
};

/// Names: ram01, borromean, borromean3 (three-relator form), counterexample1.
Preset preset(std::string const& name);
std::vector<std::string> preset_names();

}  // namespace mcensus
