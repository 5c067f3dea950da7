#pragma once

// Cup-product forms of Demushkin groups and their free products, bases with
// consecutive orthogonality, and the trilinear trace of relators lying in the
// third Zassenhaus term.

#include <optional>
#include <vector>

#include "mcensus/fp_linalg.hpp"
#include "mcensus/json_io.hpp"
#include "mcensus/presentation.hpp"

namespace mcensus {

GramForm gram_from_demushkin(DemushkinSpec const& spec, unsigned p);
/// Throws ValidationError unless pres carries a Demushkin tag.
GramForm gram_from_demushkin(Presentation const& pres, unsigned p);

/// Basis w_1..w_d with (w_i, w_{i+1}) = 0 for all i. Requires dim >= 3.
std::vector<FpVector> consecutive_orthogonal_basis(GramForm const& f);

/// Cup product on H^1 of a free product: one Gram block per factor, blocks
/// laid out along consecutive coordinates. A product vanishes iff it
/// vanishes in every block.
class CupStructure {
 public:
  explicit CupStructure(std::vector<GramForm> blocks);

  std::size_t dim() const noexcept { return dim_; }
  unsigned modulus() const noexcept { return p_; }
  std::vector<GramForm> const& blocks() const noexcept { return blocks_; }
  std::size_t offset(std::size_t block) const { return offsets_.at(block); }

  /// Per-block values (x, y)_b.
  std::vector<unsigned> cup(FpVector const& x, FpVector const& y) const;
  bool vanishes(FpVector const& x, FpVector const& y) const;

  /// Everything vanishes: rank-d free group, or relators inside S_(3).
  static CupStructure zero(std::size_t dim, unsigned p);

 private:
  std::vector<GramForm> blocks_;
  std::vector<std::size_t> offsets_;
  std::size_t dim_ = 0;
  unsigned p_ = 2;
};

/// Cup structure of a Demushkin, free, or free-product presentation.
/// Custom presentations need relator data (their cup form is then zero).
CupStructure cup_structure(Presentation const& pres, unsigned p);

/// Trace of the triple Massey product for relators congruent to products of
/// triple commutators.
class TrilinearForm {
 public:
  explicit TrilinearForm(RamifiedRelatorData data) : data_(std::move(data)) {}

  RamifiedRelatorData const& data() const noexcept { return data_; }
  int n() const noexcept { return data_.n(); }
  unsigned modulus() const noexcept { return data_.modulus(); }

  /// sum over i<j, k<=j of (a_i b_j c_k - a_j b_i c_k + a_k b_j c_i - a_k b_i c_j) e_{i,j,k,m}
  FpScalar trace(FpVector const& a, FpVector const& b, FpVector const& c, int m) const;
  /// Same quantity via the split into k<j with i!=k, i=k<j, and i<j=k.
  FpScalar trace_expanded(FpVector const& a, FpVector const& b, FpVector const& c, int m) const;

  /// True iff every relator's trace vanishes.
  bool all_vanish(FpVector const& a, FpVector const& b, FpVector const& c) const;

 private:
  void check_dims(FpVector const& a, FpVector const& b, FpVector const& c) const;

  RamifiedRelatorData data_;
};

/// Builds the e-tensor over F_2 from a table of Redei symbols:
/// {"primes": [l1, ..., ln], "symbols": [{"triple": [i,j,k], "value": -1}, ...],
///  "default": 1 (optional)}.
/// Rows of the case table are tried in order and the first match wins.
RamifiedRelatorData redei_relator_data(PositionedJson const& doc);

}  // namespace mcensus
