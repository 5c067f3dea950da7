#include "mcensus/forms.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>

namespace mcensus {

namespace {

void set_pair(FpMatrix& m, int a, int b) {
  // 1-based indices; the form is skew off the diagonal.
  m.set(static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1), 1);
  m.set(static_cast<std::size_t>(b - 1), static_cast<std::size_t>(a - 1), -1);
}

void set_pairs_from(FpMatrix& m, int first, int d) {
  for (int i = first; i + 1 <= d; i += 2) set_pair(m, i, i + 1);
}

}  // namespace

GramForm gram_from_demushkin(DemushkinSpec const& spec, unsigned p) {
  spec.validate(p);
  int const d = spec.d;
  FpMatrix m(static_cast<std::size_t>(d), static_cast<std::size_t>(d), p);
  switch (spec.kind) {
    case DemushkinCase::D1:
      set_pairs_from(m, 1, d);
      break;
    case DemushkinCase::D2:
      m.set(0, 0, 1);
      set_pairs_from(m, 2, d);
      break;
    case DemushkinCase::D3:
      m.set(0, 0, 1);
      set_pairs_from(m, 1, d);
      break;
    case DemushkinCase::D4:
      m.set(0, 0, 1);
      set_pairs_from(m, 1, d);
      break;
  }
  auto const profile = spec.q.is_two(p) ? DiagonalProfile::first_one : DiagonalProfile::all_zero;
  return GramForm(std::move(m), profile);
}

GramForm gram_from_demushkin(Presentation const& pres, unsigned p) {
  auto const* tag = std::get_if<DemushkinTag>(&pres.tag());
  if (!tag)
    throw ValidationError("presentation '" + pres.name() + "' is not a Demushkin presentation");
  return gram_from_demushkin(tag->spec, p);
}

// ---------------------------------------------------------------- bases

namespace {

unsigned pair(GramForm const& f, FpVector const& x, FpVector const& y) {
  return form_eval(f, x, y).value();
}

unsigned neg(unsigned v, unsigned p) { return (p - v % p) % p; }

struct Symplectic {
  std::vector<std::pair<FpVector, FpVector>> hyperbolic;  // (u, w) with (u, w) = 1
  std::vector<FpVector> radical;
};

/// Splits span(vectors) into hyperbolic pairs plus the radical of f on it.
/// Requires f to be alternate on the span.
Symplectic symplectic_split(GramForm const& f, std::vector<FpVector> rest) {
  unsigned const p = f.modulus();
  Symplectic out;
  while (true) {
    std::optional<std::pair<std::size_t, std::size_t>> hit;
    for (std::size_t a = 0; a < rest.size() && !hit; ++a)
      for (std::size_t b = a + 1; b < rest.size(); ++b)
        if (pair(f, rest[a], rest[b])) {
          hit = {a, b};
          break;
        }
    if (!hit) break;
    auto const [a, b] = *hit;
    FpVector u = rest[a];
    FpVector w = rest[b].scaled(FpScalar(pair(f, rest[a], rest[b]), p).inverse().value());
    std::vector<FpVector> next;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      if (i == a || i == b) continue;
      auto const& v = rest[i];
      // v - (v,w) u + (v,u) w is orthogonal to u and w.
      next.push_back(v + u.scaled(neg(pair(f, v, w), p)) + w.scaled(pair(f, v, u)));
    }
    out.hyperbolic.emplace_back(std::move(u), std::move(w));
    rest = std::move(next);
  }
  out.radical = std::move(rest);
  return out;
}

std::vector<FpVector> standard_basis(std::size_t d, unsigned p) {
  std::vector<FpVector> b;
  for (std::size_t i = 0; i < d; ++i) b.push_back(FpVector::unit(d, i, p));
  return b;
}

std::vector<FpVector> alternate_basis(GramForm const& f) {
  auto split = symplectic_split(f, standard_basis(f.dim(), f.modulus()));
  auto const r = split.hyperbolic.size();
  std::vector<FpVector> out;
  if (r == 0) return split.radical;
  if (r == 1) {
    out.push_back(split.hyperbolic[0].first);
    for (auto& z : split.radical) out.push_back(z);
    out.push_back(split.hyperbolic[0].second);
    return out;
  }
  for (auto const& h : split.hyperbolic) out.push_back(h.first);
  for (auto const& h : split.hyperbolic) out.push_back(h.second);
  for (auto& z : split.radical) out.push_back(z);
  return out;
}

/// p = 2 and some (v, v) = 1: produce a fully orthogonal basis.
std::vector<FpVector> orthogonal_basis_f2(GramForm const& f) {
  std::vector<FpVector> diagonal;
  std::vector<FpVector> rest = standard_basis(f.dim(), 2);
  while (true) {
    auto it = std::find_if(rest.begin(), rest.end(),
                           [&](FpVector const& v) { return pair(f, v, v) == 1; });
    if (it == rest.end()) break;
    FpVector s = *it;
    rest.erase(it);
    for (auto& v : rest)
      if (pair(f, v, s)) v = v + s;
    diagonal.push_back(std::move(s));
  }
  auto split = symplectic_split(f, std::move(rest));
  for (auto const& [u, w] : split.hyperbolic) {
    // v, u, w become three mutually orthogonal vectors of norm 1.
    FpVector const v = diagonal.back();
    diagonal.back() = v + u;
    diagonal.push_back(v + w);
    diagonal.push_back(v + u + w);
  }
  for (auto& z : split.radical) diagonal.push_back(std::move(z));
  return diagonal;
}

}  // namespace

std::vector<FpVector> consecutive_orthogonal_basis(GramForm const& f) {
  if (f.dim() < 3)
    throw ValidationError("consecutive_orthogonal_basis needs dim >= 3, got " +
                          std::to_string(f.dim()));
  auto basis = f.is_alternate() ? alternate_basis(f) : orthogonal_basis_f2(f);

  if (basis.size() != f.dim() || mat_rank(FpMatrix::from_rows(basis)) != f.dim())
    throw ConsistencyError("constructed vectors do not form a basis");
  for (std::size_t i = 0; i + 1 < basis.size(); ++i)
    if (pair(f, basis[i], basis[i + 1]))
      throw ConsistencyError("constructed basis fails consecutive orthogonality at position " +
                             std::to_string(i + 1));
  return basis;
}

// ---------------------------------------------------------------- CupStructure

CupStructure::CupStructure(std::vector<GramForm> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw ValidationError("cup structure needs at least one block");
  p_ = blocks_[0].modulus();
  for (auto const& b : blocks_) {
    if (b.modulus() != p_) throw ValidationError("cup structure blocks have mixed moduli");
    offsets_.push_back(dim_);
    dim_ += b.dim();
  }
}

std::vector<unsigned> CupStructure::cup(FpVector const& x, FpVector const& y) const {
  if (x.dim() != dim_ || y.dim() != dim_)
    throw ValidationError("cup: vector dimension " + std::to_string(x.dim()) + "/" +
                          std::to_string(y.dim()) + " does not match " + std::to_string(dim_));
  std::vector<unsigned> out;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    auto const& m = blocks_[b].matrix();
    std::size_t const off = offsets_[b];
    unsigned acc = 0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (!x[off + i]) continue;
      unsigned row = 0;
      for (std::size_t j = 0; j < m.cols(); ++j) row += m(i, j) * y[off + j];
      acc += x[off + i] * (row % p_);
    }
    out.push_back(acc % p_);
  }
  return out;
}

bool CupStructure::vanishes(FpVector const& x, FpVector const& y) const {
  auto const values = cup(x, y);
  return std::all_of(values.begin(), values.end(), [](unsigned v) { return v == 0; });
}

CupStructure CupStructure::zero(std::size_t dim, unsigned p) {
  return CupStructure({GramForm::zero(dim, p)});
}

CupStructure cup_structure(Presentation const& pres, unsigned p) {
  return std::visit(
      [&](auto const& tag) -> CupStructure {
        using T = std::decay_t<decltype(tag)>;
        if constexpr (std::is_same_v<T, DemushkinTag>) {
          return CupStructure({gram_from_demushkin(tag.spec, p)});
        } else if constexpr (std::is_same_v<T, FreeTag>) {
          return CupStructure::zero(static_cast<std::size_t>(pres.rank()), p);
        } else if constexpr (std::is_same_v<T, FreeProductTag>) {
          std::vector<GramForm> blocks;
          for (auto const& f : tag.factors) {
            auto sub = cup_structure(f, p);
            for (auto const& b : sub.blocks()) blocks.push_back(b);
          }
          return CupStructure(std::move(blocks));
        } else {
          throw ValidationError("cup form of custom presentation '" + pres.name() +
                                "' is unknown; use relator data or a preset");
        }
      },
      pres.tag());
}

// ---------------------------------------------------------------- TrilinearForm

void TrilinearForm::check_dims(FpVector const& a, FpVector const& b, FpVector const& c) const {
  auto const n = static_cast<std::size_t>(data_.n());
  if (a.dim() != n || b.dim() != n || c.dim() != n)
    throw ValidationError("trilinear trace expects vectors of dimension " + std::to_string(n));
  unsigned const p = modulus();
  if (a.modulus() != p || b.modulus() != p || c.modulus() != p)
    throw ValidationError("trilinear trace: vector modulus differs from the tensor's");
}

FpScalar TrilinearForm::trace(FpVector const& a, FpVector const& b, FpVector const& c, int m) const {
  check_dims(a, b, c);
  std::int64_t sum = 0;
  for (auto const& t : data_.terms(m)) {
    auto const i = static_cast<std::size_t>(t.i - 1);
    auto const j = static_cast<std::size_t>(t.j - 1);
    auto const k = static_cast<std::size_t>(t.k - 1);
    std::int64_t const bracket = std::int64_t{a[i]} * b[j] * c[k] - std::int64_t{a[j]} * b[i] * c[k] +
                                 std::int64_t{a[k]} * b[j] * c[i] - std::int64_t{a[k]} * b[i] * c[j];
    sum += bracket * t.e;
  }
  return FpScalar(sum, modulus());
}

FpScalar TrilinearForm::trace_expanded(FpVector const& a, FpVector const& b, FpVector const& c,
                                       int m) const {
  check_dims(a, b, c);
  int const n = data_.n();
  auto A = [&](int i) { return std::int64_t{a[static_cast<std::size_t>(i - 1)]}; };
  auto B = [&](int i) { return std::int64_t{b[static_cast<std::size_t>(i - 1)]}; };
  auto C = [&](int i) { return std::int64_t{c[static_cast<std::size_t>(i - 1)]}; };
  std::int64_t sum = 0;
  // i < j, k < j, i != k
  for (int j = 1; j <= n; ++j)
    for (int i = 1; i < j; ++i)
      for (int k = 1; k < j; ++k) {
        if (i == k) continue;
        auto const e = data_.get(i, j, k, m);
        if (e) sum += (A(i) * B(j) * C(k) - A(j) * B(i) * C(k) + A(k) * B(j) * C(i) - A(k) * B(i) * C(j)) * e;
      }
  // i = k < j
  for (int j = 1; j <= n; ++j)
    for (int i = 1; i < j; ++i) {
      auto const e = data_.get(i, j, i, m);
      if (e) sum += (2 * A(i) * B(j) * C(i) - A(j) * B(i) * C(i) - A(i) * B(i) * C(j)) * e;
    }
  // i < j = k
  for (int j = 1; j <= n; ++j)
    for (int i = 1; i < j; ++i) {
      auto const e = data_.get(i, j, j, m);
      if (e) sum += (A(i) * B(j) * C(j) - 2 * A(j) * B(i) * C(j) + A(j) * B(j) * C(i)) * e;
    }
  return FpScalar(sum, modulus());
}

bool TrilinearForm::all_vanish(FpVector const& a, FpVector const& b, FpVector const& c) const {
  for (int m = 1; m <= data_.relator_count(); ++m)
    if (trace(a, b, c, m).value()) return false;
  return true;
}

// ---------------------------------------------------------------- Redei ingestion

namespace {

bool is_prime_u64(std::int64_t v) {
  if (v < 2) return false;
  for (std::int64_t q = 2; q * q <= v; ++q)
    if (v % q == 0) return false;
  return true;
}

}  // namespace

RamifiedRelatorData redei_relator_data(PositionedJson const& doc) {
  Json const& root = doc.root();
  if (!root.is_object()) doc.fail("", "Redei table must be a JSON object");
  if (!root.contains("primes") || !root["primes"].is_array() || root["primes"].size() < 2)
    doc.fail("", "Redei table needs a \"primes\" array with at least two entries");
  auto const& primes = root["primes"];
  int const n = static_cast<int>(primes.size());
  for (std::size_t i = 0; i < primes.size(); ++i) {
    auto const ptr = "/primes/" + std::to_string(i);
    if (!primes[i].is_number_integer()) doc.fail(ptr, "prime must be an integer");
    auto const l = primes[i].get<std::int64_t>();
    if (!is_prime_u64(l) || l % 4 != 1) doc.fail(ptr, "each prime must satisfy l = 1 mod 4");
  }

  std::optional<int> fallback;
  if (root.contains("default")) {
    if (!root["default"].is_number_integer() ||
        (root["default"].get<int>() != 1 && root["default"].get<int>() != -1))
      doc.fail("/default", "\"default\" must be 1 or -1");
    fallback = root["default"].get<int>();
  }

  std::map<std::array<int, 3>, int> symbols;
  if (root.contains("symbols")) {
    if (!root["symbols"].is_array()) doc.fail("/symbols", "\"symbols\" must be an array");
    for (std::size_t s = 0; s < root["symbols"].size(); ++s) {
      auto const ptr = "/symbols/" + std::to_string(s);
      auto const& entry = root["symbols"][s];
      if (!entry.is_object() || !entry.contains("triple") || !entry.contains("value"))
        doc.fail(ptr, "symbol entry needs \"triple\" and \"value\"");
      auto const& triple = entry["triple"];
      if (!triple.is_array() || triple.size() != 3) doc.fail(ptr + "/triple", "triple must have three indices");
      std::array<int, 3> key{};
      for (std::size_t t = 0; t < 3; ++t) {
        if (!triple[t].is_number_integer()) doc.fail(ptr + "/triple/" + std::to_string(t), "index must be an integer");
        key[t] = triple[t].get<int>();
        if (key[t] < 1 || key[t] > n)
          doc.fail(ptr + "/triple/" + std::to_string(t), "index outside [1, " + std::to_string(n) + "]");
      }
      auto const& value = entry["value"];
      if (!value.is_number_integer() || (value.get<int>() != 1 && value.get<int>() != -1))
        doc.fail(ptr + "/value", "symbol value must be 1 or -1");
      if (symbols.count(key)) doc.fail(ptr, "duplicate triple");
      symbols[key] = value.get<int>();
    }
  }

  // The symbol is symmetric in its three entries, so any listed permutation
  // of the triple is accepted.
  auto lookup = [&](int i, int j, int k) -> int {
    std::array<int, 3> key{i, j, k};
    std::sort(key.begin(), key.end());
    do {
      if (auto it = symbols.find(key); it != symbols.end()) return it->second;
    } while (std::next_permutation(key.begin(), key.end()));
    if (fallback) return *fallback;
    throw ValidationError(doc.source_name() + ": no Redei symbol given for triple (" + std::to_string(i) +
                          "," + std::to_string(j) + "," + std::to_string(k) + ") and no \"default\"");
  };

  RamifiedRelatorData data(n, n, 2);
  for (int m = 1; m <= n; ++m)
    for (int j = 1; j <= n; ++j)
      for (int i = 1; i < j; ++i)
        for (int k = 1; k <= j; ++k) {
          bool const uses_symbol = (m == j && m != k) || (m != j && m == k) ||
                                   (m == i && j == k) || (m == j && j == k);
          if (uses_symbol && lookup(i, j, k) == -1) data.set(i, j, k, m, 1);
        }
  return data;
}

}  // namespace mcensus
