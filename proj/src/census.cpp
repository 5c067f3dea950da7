#include "mcensus/census.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <sstream>
#include <thread>
#include <tuple>

namespace mcensus {

namespace {

BigInt P(unsigned p, int e) {
  if (e < 0) throw ConsistencyError("negative exponent in closed form");
  return big_pow(p, static_cast<unsigned>(e));
}

DiagonalProfile profile_of(DemushkinSpec const& s, unsigned p) {
  return s.q.is_two(p) ? DiagonalProfile::first_one : DiagonalProfile::all_zero;
}

Json spec_json(DemushkinSpec const& s, unsigned p) {
  Json j;
  j["d"] = s.d;
  j["q"] = s.q.to_string(p);
  j["case"] = to_string(s.kind);
  if (s.kind != DemushkinCase::D1) j["f"] = s.f ? std::to_string(*s.f) : std::string("inf");
  return j;
}

/// Coordinate ranges of the factors that carry a relator.
std::vector<std::pair<std::size_t, std::size_t>> relator_blocks(GroupModel const& model) {
  return std::visit(
      [](auto const& m) -> std::vector<std::pair<std::size_t, std::size_t>> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DemushkinModel>)
          return {{0, static_cast<std::size_t>(m.spec.d)}};
        else if constexpr (std::is_same_v<T, FreeProductDFModel>)
          return {{0, static_cast<std::size_t>(m.spec.d)}};
        else if constexpr (std::is_same_v<T, FreeProductDDModel>)
          return {{0, static_cast<std::size_t>(m.first.d)},
                  {static_cast<std::size_t>(m.first.d), static_cast<std::size_t>(m.second.d)}};
        else
          return {};
      },
      model);
}

}  // namespace

// ---------------------------------------------------------------- models

void validate_model(GroupModel const& model, unsigned p) {
  require_prime(p);
  std::visit(
      [&](auto const& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DemushkinModel>) {
          m.spec.validate(p);
        } else if constexpr (std::is_same_v<T, FreeModel>) {
          if (m.d < 1) throw ValidationError("free model needs rank d >= 1");
        } else if constexpr (std::is_same_v<T, FreeProductDFModel>) {
          m.spec.validate(p);
          if (m.e < 1) throw ValidationError("free factor needs rank e >= 1");
        } else if constexpr (std::is_same_v<T, FreeProductDDModel>) {
          m.first.validate(p);
          m.second.validate(p);
        } else {
          if (m.data.modulus() != p)
            throw ValidationError("relator data is over F_" + std::to_string(m.data.modulus()) +
                                  ", not F_" + std::to_string(p));
        }
      },
      model);
}

int model_rank(GroupModel const& model) {
  return std::visit(
      [](auto const& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DemushkinModel>) return m.spec.d;
        else if constexpr (std::is_same_v<T, FreeModel>) return m.d;
        else if constexpr (std::is_same_v<T, FreeProductDFModel>) return m.spec.d + m.e;
        else if constexpr (std::is_same_v<T, FreeProductDDModel>) return m.first.d + m.second.d;
        else return m.data.n();
      },
      model);
}

Json model_to_json(GroupModel const& model, unsigned p) {
  return std::visit(
      [&](auto const& m) -> Json {
        using T = std::decay_t<decltype(m)>;
        Json j;
        if constexpr (std::is_same_v<T, DemushkinModel>) {
          j = spec_json(m.spec, p);
          j["kind"] = "demushkin";
        } else if constexpr (std::is_same_v<T, FreeModel>) {
          j["kind"] = "free";
          j["d"] = m.d;
        } else if constexpr (std::is_same_v<T, FreeProductDFModel>) {
          j = spec_json(m.spec, p);
          j["kind"] = "df";
          j["e"] = m.e;
        } else if constexpr (std::is_same_v<T, FreeProductDDModel>) {
          j["kind"] = "dd";
          j["first"] = spec_json(m.first, p);
          j["second"] = spec_json(m.second, p);
        } else {
          j["kind"] = "sthree";
          j["name"] = m.name;
          j["n"] = m.data.n();
          j["relators"] = m.data.relator_count();
        }
        return j;
      },
      model);
}

std::string model_name(GroupModel const& model, unsigned p) {
  return model_presentation(model, p).name();
}

Presentation model_presentation(GroupModel const& model, unsigned p) {
  validate_model(model, p);
  return std::visit(
      [&](auto const& m) -> Presentation {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DemushkinModel>)
          return demushkin_presentation(m.spec, p);
        else if constexpr (std::is_same_v<T, FreeModel>)
          return free_presentation(m.d);
        else if constexpr (std::is_same_v<T, FreeProductDFModel>)
          return free_product({demushkin_presentation(m.spec, p), free_presentation(m.e)});
        else if constexpr (std::is_same_v<T, FreeProductDDModel>)
          return free_product({demushkin_presentation(m.first, p), demushkin_presentation(m.second, p)});
        else
          return m.data.to_presentation(m.name.empty() ? std::string("sthree") : m.name);
      },
      model);
}

CupStructure model_cup(GroupModel const& model, unsigned p) {
  if (auto const* s = std::get_if<SThreeModel>(&model))
    return CupStructure::zero(static_cast<std::size_t>(s->data.n()), p);
  return cup_structure(model_presentation(model, p), p);
}

std::string image_class_name(ImageClass const& c) {
  if (c.empty()) return "any";
  std::string out;
  for (std::size_t i = 0; i < c.size(); ++i) out += (i ? "," : "") + std::string(c[i] ? "central" : "noncentral");
  return out;
}

ImageClass parse_image_class(std::string const& text) {
  if (text == "any" || text.empty()) return {};
  ImageClass out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part == "central")
      out.push_back(true);
    else if (part == "noncentral")
      out.push_back(false);
    else
      throw ValidationError("image class must be central, noncentral, any, or a comma list; got \"" +
                            text + "\"");
  }
  return out;
}

ImageClass classify_triple(GroupModel const& model, TmpTriple const& t) {
  ImageClass out;
  for (auto const& [off, dim] : relator_blocks(model)) {
    bool central = true;
    for (std::size_t i = off; i < off + dim; ++i)
      if (t.x[i] || t.z[i]) central = false;
    out.push_back(central);
  }
  return out;
}

// ---------------------------------------------------------------- TMP enumeration

namespace {

/// All vectors of F_p^d by index, with their digits.
struct VectorTable {
  std::size_t d;
  unsigned p;
  std::uint64_t size;
  std::vector<std::uint8_t> digits;  // size * d
  std::vector<std::uint64_t> place;  // place value of digit i

  VectorTable(std::size_t dim, unsigned mod) : d(dim), p(mod), size(checked_pow(mod, static_cast<unsigned>(dim))) {
    digits.resize(size * d);
    place.assign(d, 1);
    for (std::size_t i = d; i-- > 1;) place[i - 1] = place[i] * p;
    for (std::uint64_t v = 0; v < size; ++v) {
      auto rest = v;
      for (std::size_t i = d; i-- > 0;) {
        digits[v * d + i] = static_cast<std::uint8_t>(rest % p);
        rest /= p;
      }
    }
  }
  std::uint8_t const* of(std::uint64_t v) const { return &digits[v * d]; }
  FpVector vec(std::uint64_t v) const { return FpVector({of(v), of(v) + d}, p); }

  /// Indices of a*u + b*w for all a, b.
  void span(std::uint64_t u, std::uint64_t w, std::vector<std::uint64_t>& out) const {
    out.clear();
    auto const* du = of(u);
    auto const* dw = of(w);
    for (unsigned a = 0; a < p; ++a)
      for (unsigned b = 0; b < p; ++b) {
        std::uint64_t idx = 0;
        for (std::size_t i = 0; i < d; ++i) idx += ((a * du[i] + b * dw[i]) % p) * place[i];
        out.push_back(idx);
      }
  }
};

struct Block {
  std::size_t off, dim;
  std::vector<std::uint8_t> m;  // dim x dim
};

std::vector<Block> blocks_of(CupStructure const& cup) {
  std::vector<Block> out;
  for (std::size_t b = 0; b < cup.blocks().size(); ++b) {
    auto const& f = cup.blocks()[b].matrix();
    Block blk{cup.offset(b), f.rows(), {}};
    bool nonzero = false;
    for (std::size_t i = 0; i < f.rows(); ++i)
      for (std::size_t j = 0; j < f.cols(); ++j) {
        blk.m.push_back(static_cast<std::uint8_t>(f(i, j)));
        nonzero |= f(i, j) != 0;
      }
    if (nonzero) out.push_back(std::move(blk));
  }
  return out;
}

/// Linear functionals whose common kernel is X(y) = {x : (x, y) = 0} (left)
/// or Z(y) = {z : (y, z) = 0} (right), one per nonzero block.
std::vector<std::vector<unsigned>> functionals(std::vector<Block> const& blocks, VectorTable const& vt,
                                               std::uint64_t y, bool left) {
  std::vector<std::vector<unsigned>> out;
  auto const* dy = vt.of(y);
  for (auto const& b : blocks) {
    std::vector<unsigned> f(vt.d, 0);
    bool nonzero = false;
    for (std::size_t i = 0; i < b.dim; ++i) {
      unsigned acc = 0;
      for (std::size_t j = 0; j < b.dim; ++j)
        acc += left ? b.m[i * b.dim + j] * dy[b.off + j] : dy[b.off + j] * b.m[j * b.dim + i];
      f[b.off + i] = acc % vt.p;
      nonzero |= f[b.off + i] != 0;
    }
    if (nonzero) out.push_back(std::move(f));
  }
  return out;
}

bool in_kernel(std::vector<std::vector<unsigned>> const& fs, VectorTable const& vt, std::uint64_t v) {
  auto const* dv = vt.of(v);
  for (auto const& f : fs) {
    unsigned acc = 0;
    for (std::size_t i = 0; i < vt.d; ++i) acc += f[i] * dv[i];
    if (acc % vt.p) return false;
  }
  return true;
}

using IndexTriple = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>;

struct WorkerState {
  std::uint64_t count = 0;
  std::vector<std::uint64_t> by_mask;
  std::vector<std::uint32_t> stamp_y, stamp_xy;
  std::uint32_t token = 0;
  std::vector<std::uint64_t> span;
};

template <typename PerY>
void parallel_over_y(std::uint64_t size, unsigned threads, std::vector<WorkerState>& states, PerY per_y) {
  std::atomic<std::uint64_t> next{1};
  auto run = [&](WorkerState& st) {
    while (true) {
      auto const y = next.fetch_add(1);
      if (y >= size) break;
      per_y(st, y);
    }
  };
  if (threads <= 1) {
    run(states[0]);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back([&, t] { run(states[t]); });
  for (auto& th : pool) th.join();
}

unsigned effective_threads(unsigned requested, std::uint64_t work_items) {
  unsigned t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::clamp<std::uint64_t>(work_items, 1, t));
}

TmpResult finish(std::vector<WorkerState> const& states, std::vector<std::vector<IndexTriple>>& lists,
                 std::size_t relator_block_count, VectorTable const& vt, bool list) {
  TmpResult out;
  std::vector<std::uint64_t> by_mask(std::size_t{1} << relator_block_count, 0);
  for (auto const& st : states) {
    out.count += st.count;
    for (std::size_t m = 0; m < by_mask.size(); ++m) by_mask[m] += st.by_mask[m];
  }
  for (std::size_t mask = 0; mask < by_mask.size(); ++mask) {
    if (!by_mask[mask]) continue;
    ImageClass c;
    for (std::size_t b = 0; b < relator_block_count; ++b) c.push_back((mask >> b) & 1u);
    out.by_class[c] = by_mask[mask];
  }
  if (list) {
    std::vector<IndexTriple> all;
    for (auto& l : lists) all.insert(all.end(), l.begin(), l.end());
    std::sort(all.begin(), all.end());
    out.triples.reserve(all.size());
    for (auto const& [x, y, z] : all) out.triples.push_back({vt.vec(x), vt.vec(y), vt.vec(z)});
  }
  return out;
}

TmpResult tmp_enumerate_cup(GroupModel const& model, CupStructure const& cup, unsigned p,
                            TmpOptions const& opts) {
  std::size_t const d = cup.dim();
  BigInt const size_big = big_pow(p, static_cast<unsigned>(d));
  auto const blocks = blocks_of(cup);
  BigInt const filter_work = 2 * size_big * size_big * std::max<std::size_t>(1, blocks.size());
  if (filter_work > opts.budget)
    throw BudgetError("tmp_enumerate: " + filter_work.str() +
                          " form evaluations exceed the budget; use the closed form",
                      filter_work);
  VectorTable vt(d, p);

  // Second guard: the number of candidate (x, y, z) checks.
  BigInt pair_work = 0;
  for (std::uint64_t y = 1; y < vt.size; ++y) {
    auto const left = functionals(blocks, vt, y, true).size();
    auto const right = functionals(blocks, vt, y, false).size();
    pair_work += (size_big / big_pow(p, static_cast<unsigned>(left))) *
                 (size_big / big_pow(p, static_cast<unsigned>(right)));
  }
  if (pair_work > opts.budget)
    throw BudgetError("tmp_enumerate: " + pair_work.str() +
                          " candidate triples exceed the budget; use the closed form",
                      pair_work);

  auto const rblocks = relator_blocks(model);
  std::vector<std::uint32_t> zero_mask(vt.size, 0);
  for (std::uint64_t v = 0; v < vt.size; ++v)
    for (std::size_t b = 0; b < rblocks.size(); ++b) {
      bool zero = true;
      for (std::size_t i = rblocks[b].first; i < rblocks[b].first + rblocks[b].second; ++i)
        if (vt.of(v)[i]) zero = false;
      if (zero) zero_mask[v] |= 1u << b;
    }

  unsigned const threads = effective_threads(opts.threads, vt.size);
  std::vector<WorkerState> states(threads);
  for (auto& st : states) {
    st.by_mask.assign(std::size_t{1} << rblocks.size(), 0);
    st.stamp_y.assign(vt.size, 0);
    st.stamp_xy.assign(vt.size, 0);
  }
  std::vector<std::vector<IndexTriple>> lists(opts.list ? vt.size : 0);

  parallel_over_y(vt.size, threads, states, [&](WorkerState& st, std::uint64_t y) {
    auto const fx = functionals(blocks, vt, y, true);
    auto const fz = functionals(blocks, vt, y, false);
    std::vector<std::uint64_t> xs, zs;
    for (std::uint64_t v = 0; v < vt.size; ++v) {
      if (in_kernel(fx, vt, v)) xs.push_back(v);
      if (in_kernel(fz, vt, v)) zs.push_back(v);
    }
    ++st.token;
    auto const ty = st.token;
    vt.span(y, 0, st.span);
    for (auto v : st.span) st.stamp_y[v] = ty;
    for (auto x : xs) {
      if (st.stamp_y[x] == ty) continue;  // x, y dependent
      auto const txy = ++st.token;
      vt.span(x, y, st.span);
      for (auto v : st.span) st.stamp_xy[v] = txy;
      for (auto z : zs) {
        if (st.stamp_xy[z] == txy) continue;
        ++st.count;
        ++st.by_mask[zero_mask[x] & zero_mask[z]];
        if (opts.list) lists[y].emplace_back(x, y, z);
      }
    }
  });
  return finish(states, lists, rblocks.size(), vt, opts.list);
}

TmpResult tmp_enumerate_sthree(RamifiedRelatorData const& data, unsigned p, TmpOptions const& opts) {
  std::size_t const n = static_cast<std::size_t>(data.n());
  BigInt const work = big_pow(p, 3u * static_cast<unsigned>(n)) * std::max(1, data.relator_count());
  if (work > opts.budget)
    throw BudgetError("tmp_enumerate: " + work.str() + " trace evaluations exceed the budget", work);
  VectorTable vt(n, p);
  unsigned const threads = effective_threads(opts.threads, vt.size);
  std::vector<WorkerState> states(threads);
  for (auto& st : states) {
    st.by_mask.assign(1, 0);
    st.stamp_y.assign(vt.size, 0);
    st.stamp_xy.assign(vt.size, 0);
  }
  std::vector<std::vector<IndexTriple>> lists(opts.list ? vt.size : 0);

  parallel_over_y(vt.size, threads, states, [&](WorkerState& st, std::uint64_t y) {
    ++st.token;
    auto const ty = st.token;
    vt.span(y, 0, st.span);
    for (auto v : st.span) st.stamp_y[v] = ty;
    auto const* b = vt.of(y);
    for (std::uint64_t x = 0; x < vt.size; ++x) {
      if (st.stamp_y[x] == ty) continue;
      auto const txy = ++st.token;
      vt.span(x, y, st.span);
      for (auto v : st.span) st.stamp_xy[v] = txy;
      auto const* a = vt.of(x);
      // The trace is linear in c; collect its coefficients per relator.
      std::vector<std::vector<std::int64_t>> coeff(static_cast<std::size_t>(data.relator_count()),
                                                   std::vector<std::int64_t>(n, 0));
      for (int m = 1; m <= data.relator_count(); ++m) {
        auto& c = coeff[static_cast<std::size_t>(m - 1)];
        for (auto const& t : data.terms(m)) {
          auto const i = static_cast<std::size_t>(t.i - 1);
          auto const j = static_cast<std::size_t>(t.j - 1);
          auto const k = static_cast<std::size_t>(t.k - 1);
          c[k] += std::int64_t{t.e} * (a[i] * b[j] - a[j] * b[i]);
          c[i] += std::int64_t{t.e} * a[k] * b[j];
          c[j] -= std::int64_t{t.e} * a[k] * b[i];
        }
      }
      for (std::uint64_t z = 0; z < vt.size; ++z) {
        if (st.stamp_xy[z] == txy) continue;
        auto const* cz = vt.of(z);
        bool ok = true;
        for (auto const& c : coeff) {
          std::int64_t acc = 0;
          for (std::size_t i = 0; i < n; ++i) acc += c[i] * cz[i];
          if (((acc % p) + p) % p) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        ++st.count;
        ++st.by_mask[0];
        if (opts.list) lists[y].emplace_back(x, y, z);
      }
    }
  });
  return finish(states, lists, 0, vt, opts.list);
}

// Closed forms for |TMP| of a single Demushkin group, without the d >= 3 guard.
BigInt la_count(int d, unsigned p, DiagonalProfile profile) {
  if (profile == DiagonalProfile::all_zero)
    return (P(p, d) - 1) * (P(p, d - 1) - p) * (P(p, d - 1) - P(p, 2));
  return (P(2, d - 1) - 1) * (P(2, d - 1) - 2) * (P(2, d) - 4);
}

BigInt df_tmp(int d, int e, unsigned p, DiagonalProfile profile) {
  if (profile == DiagonalProfile::all_zero)
    return (P(p, d) - 1) * P(p, e) * (P(p, d + e - 1) - p) * (P(p, d + e - 1) - P(p, 2)) +
           (P(p, e) - 1) * (P(p, d + e) - p) * (P(p, d + e) - P(p, 2));
  return (P(2, d + e - 1) - 2) *
         (P(2, 2 * d + 2 * e - 1) + 3 * P(2, d + 2 * e - 1) - 9 * P(2, d + e - 1) + 4);
}

BigInt dd_tmp(int d, int e, unsigned p) {
  return (P(p, d) + P(p, e) - 2) * (P(p, d + e - 1) - p) * (P(p, d + e - 1) - P(p, 2)) +
         (P(p, d) - 1) * (P(p, e) - 1) * (P(p, d + e - 2) - p) * (P(p, d + e - 2) - P(p, 2));
}

}  // namespace

TmpResult tmp_enumerate(GroupModel const& model, unsigned p, TmpOptions const& opts) {
  validate_model(model, p);
  if (auto const* s = std::get_if<SThreeModel>(&model)) return tmp_enumerate_sthree(s->data, p, opts);
  return tmp_enumerate_cup(model, model_cup(model, p), p, opts);
}

BigInt tmp_closed(GroupModel const& model, unsigned p) {
  validate_model(model, p);
  return std::visit(
      [&](auto const& m) -> BigInt {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DemushkinModel>) {
          if (m.spec.d < 3) throw ValidationError("tmp_closed: the closed form needs rank d >= 3");
          return la_count(m.spec.d, p, profile_of(m.spec, p));
        } else if constexpr (std::is_same_v<T, FreeModel>) {
          return (P(p, m.d) - 1) * (P(p, m.d) - p) * (P(p, m.d) - P(p, 2));
        } else if constexpr (std::is_same_v<T, FreeProductDFModel>) {
          return df_tmp(m.spec.d, m.e, p, profile_of(m.spec, p));
        } else if constexpr (std::is_same_v<T, FreeProductDDModel>) {
          if (profile_of(m.first, p) != DiagonalProfile::all_zero ||
              profile_of(m.second, p) != DiagonalProfile::all_zero)
            throw ValidationError("tmp_closed: the two-Demushkin closed form needs q != 2 in both factors "
                                  "(all-zero cup diagonals)");
          return dd_tmp(m.first.d, m.second.d, p);
        } else {
          throw ValidationError("tmp_closed: no closed form for relator-tensor models; use tmp_enumerate");
        }
      },
      model);
}

// ---------------------------------------------------------------- Z^1 and CP

BigInt z1_closed(GroupModel const& model, unsigned p, ImageClass const& image_class) {
  validate_model(model, p);
  auto need = [&](std::size_t factors) {
    if (image_class.size() != factors)
      throw ValidationError("image class \"" + image_class_name(image_class) + "\" does not match a model with " +
                            std::to_string(factors) + " Demushkin factor(s)");
  };
  auto need_rank3 = [](int d) {
    if (d < 3)
      throw ValidationError("z1_closed: cocycle counts are established for Demushkin rank d >= 3 only "
                            "(got d = " + std::to_string(d) + "); use the oracle");
  };
  return std::visit(
      [&](auto const& m) -> BigInt {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DemushkinModel>) {
          need(1);
          need_rank3(m.spec.d);
          return P(p, 3 * m.spec.d - (image_class[0] ? 0 : 1));
        } else if constexpr (std::is_same_v<T, FreeModel>) {
          return P(p, 3 * m.d);
        } else if constexpr (std::is_same_v<T, FreeProductDFModel>) {
          need(1);
          need_rank3(m.spec.d);
          return P(p, 3 * m.spec.d + 3 * m.e - (image_class[0] ? 0 : 1));
        } else if constexpr (std::is_same_v<T, FreeProductDDModel>) {
          need(2);
          need_rank3(m.first.d);
          need_rank3(m.second.d);
          if (image_class[0] && image_class[1])
            throw ValidationError("z1_closed: both factors central cannot occur for a surjection");
          int const drop = (image_class[0] ? 0 : 1) + (image_class[1] ? 0 : 1);
          return P(p, 3 * m.first.d + 3 * m.second.d - drop);
        } else {
          return P(p, 3 * m.data.n());
        }
      },
      model);
}

BigInt cp_count(GroupModel const& model, unsigned p, CpMethod method, std::uint64_t budget) {
  validate_model(model, p);
  int const d = model_rank(model);
  if (method == CpMethod::closed) {
    if (auto const* m = std::get_if<DemushkinModel>(&model)) {
      if (profile_of(m->spec, p) == DiagonalProfile::all_zero)
        return (P(p, d) - 1) * (P(p, d - 1) - p);
      return (P(2, d - 1) - 1) * (P(2, d - 1) - 2) + P(2, d - 1) * (P(2, d - 1) - 1);
    }
    if (std::holds_alternative<FreeModel>(model) || std::holds_alternative<SThreeModel>(model))
      return (P(p, d) - 1) * (P(p, d) - p);
    throw ValidationError("cp_count: no closed form for free products; use enumeration");
  }
  BigInt const work = big_pow(p, 2u * static_cast<unsigned>(d));
  if (work > budget) throw BudgetError("cp_count: " + work.str() + " pairs exceed the budget", work);
  auto const cup = model_cup(model, p);
  auto const blocks = blocks_of(cup);
  VectorTable vt(static_cast<std::size_t>(d), p);
  std::uint64_t count = 0;
  std::vector<std::uint64_t> span;
  std::vector<std::uint8_t> in_span(vt.size, 0);
  for (std::uint64_t y = 1; y < vt.size; ++y) {
    vt.span(y, 0, span);
    for (auto v : span) in_span[v] = 1;
    auto const fx = functionals(blocks, vt, y, true);
    for (std::uint64_t x = 0; x < vt.size; ++x)
      if (!in_span[x] && in_kernel(fx, vt, x)) ++count;
    for (auto v : span) in_span[v] = 0;
  }
  return count;
}

// ---------------------------------------------------------------- Epi and nu

std::string to_string(EpiMethod m) {
  switch (m) {
    case EpiMethod::formula: return "formula";
    case EpiMethod::oracle: return "oracle";
    case EpiMethod::tmp_sum: return "tmp_sum";
  }
  return "?";
}

EpiMethod parse_epi_method(std::string const& text) {
  if (text == "formula") return EpiMethod::formula;
  if (text == "oracle") return EpiMethod::oracle;
  if (text == "tmp-sum" || text == "tmp_sum") return EpiMethod::tmp_sum;
  throw ValidationError("method must be formula, oracle or tmp-sum; got \"" + text + "\"");
}

namespace {

void note_exploratory(GroupModel const& model, CensusReport& r) {
  auto small = [](DemushkinSpec const& s) { return s.d < 3; };
  bool flag = false;
  if (auto const* m = std::get_if<DemushkinModel>(&model)) flag = small(m->spec);
  if (auto const* m = std::get_if<FreeProductDFModel>(&model)) flag = small(m->spec);
  if (auto const* m = std::get_if<FreeProductDDModel>(&model)) flag = small(m->first) || small(m->second);
  if (flag) r.notes.push_back("exploratory: a Demushkin factor has rank below 3");
}

BigInt epi_formula_u4(GroupModel const& model, unsigned p, CensusReport& r, CensusOptions const& opts) {
  return std::visit(
      [&](auto const& m) -> BigInt {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DemushkinModel>) {
          auto const N = la_count(m.spec.d, p, profile_of(m.spec, p));
          r.tmp = N;
          return N * P(p, 3 * m.spec.d - 1);
        } else if constexpr (std::is_same_v<T, FreeModel>) {
          auto const N = tmp_closed(model, p);
          r.tmp = N;
          return N * P(p, 3 * m.d);
        } else if constexpr (std::is_same_v<T, FreeProductDFModel>) {
          int const d = m.spec.d, e = m.e, K = 3 * d + 3 * e;
          auto const N = df_tmp(d, e, p, profile_of(m.spec, p));
          r.tmp = N;
          BigInt const bracket = P(p, d) * (P(p, e) - 1) * (P(p, e) - p) * (P(p, e) - P(p, 2)) +
                                 (P(p, d) - 1) * P(p, 2) * (P(p, e) - 1) * (P(p, e) - p);
          return N * P(p, K - 1) + bracket * (P(p, K) - P(p, K - 1));
        } else if constexpr (std::is_same_v<T, FreeProductDDModel>) {
          int const d = m.first.d, e = m.second.d, K = 3 * d + 3 * e;
          auto const N = tmp_closed(model, p);
          r.tmp = N;
          BigInt const bracket = P(p, d) * (P(p, e) - 1) * (P(p, e) - p) * (P(p, e) - P(p, 2)) +
                                 P(p, e) * (P(p, d) - 1) * (P(p, d) - p) * (P(p, d) - P(p, 2)) +
                                 P(p, 2) * (P(p, d) - 1) * (P(p, e) - 1) * (P(p, e) - p) +
                                 P(p, 2) * (P(p, e) - 1) * (P(p, d) - 1) * (P(p, d) - p);
          return N * P(p, K - 2) + bracket * (P(p, K - 1) - P(p, K - 2));
        } else {
          auto const t = tmp_enumerate(model, p, opts.tmp);
          r.tmp = BigInt(t.count);
          return BigInt(t.count) * P(p, 3 * m.data.n());
        }
      },
      model);
}

BigInt epi_tmp_sum_u4(GroupModel const& model, unsigned p, CensusReport& r, CensusOptions const& opts) {
  auto const t = tmp_enumerate(model, p, opts.tmp);
  r.tmp = BigInt(t.count);
  bool const pure_demushkin = std::holds_alternative<DemushkinModel>(model);
  BigInt total = 0;
  for (auto const& [cls, n] : t.by_class) {
    if (pure_demushkin && cls.size() == 1 && cls[0])
      throw ConsistencyError("a TMP triple of a Demushkin group has central image class");
    if (cls.size() == 2 && cls[0] && cls[1])
      throw ConsistencyError("a TMP triple is central on both Demushkin factors");
    auto const z1 = z1_closed(model, p, cls);
    r.z1_breakdown[image_class_name(cls)] = {n, z1};
    total += z1 * n;
  }
  return total;
}

}  // namespace

CensusReport epi_count(GroupModel const& model, unsigned p, int target, EpiMethod method,
                       CensusOptions const& opts) {
  auto const start = std::chrono::steady_clock::now();
  validate_model(model, p);
  if (target < 2 || target > 4)
    throw ValidationError("target must be 2, 3 or 4, got " + std::to_string(target));
  CensusReport r;
  r.model = model_to_json(model, p);
  r.model_name = model_name(model, p);
  r.p = p;
  r.target = target;
  r.method = method;
  note_exploratory(model, r);
  int const d = model_rank(model);

  if (method == EpiMethod::oracle) {
    r.epi = count_epi_bruteforce(model_presentation(model, p), target, p, opts.oracle);
  } else if (target == 2) {
    if (method == EpiMethod::tmp_sum) throw ValidationError("tmp-sum applies to targets 3 and 4");
    r.epi = P(p, d) - 1;
  } else if (target == 3) {
    auto const cp = cp_count(model, p, method == EpiMethod::formula ? CpMethod::closed : CpMethod::enumerate,
                             opts.tmp.budget);
    r.z1_breakdown["any"] = {static_cast<std::uint64_t>(cp), P(p, d)};
    r.epi = cp * P(p, d);
  } else if (method == EpiMethod::formula) {
    r.epi = epi_formula_u4(model, p, r, opts);
  } else {
    r.epi = epi_tmp_sum_u4(model, p, r, opts);
  }
  r.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

CensusReport nu_extensions(GroupModel const& model, unsigned p, int target, EpiMethod method,
                           CensusOptions const& opts) {
  auto r = epi_count(model, p, target, method, opts);
  auto const aut = aut_order(target, p);
  if (r.epi % aut != 0)
    throw ConsistencyError("|Epi| = " + r.epi.str() + " is not divisible by |Aut(U_" + std::to_string(target) +
                           ")| = " + aut.str());
  r.nu = r.epi / aut;
  return r;
}

Json CensusReport::to_json() const {
  Json j;
  j["model"] = model;
  j["p"] = p;
  j["target"] = target;
  if (tmp) j["tmp"] = tmp->str();
  j["epi"] = epi.str();
  if (nu) j["nu"] = nu->str();
  j["method"] = mcensus::to_string(method);
  j["ms"] = static_cast<std::int64_t>(ms + 0.5);
  if (!z1_breakdown.empty()) {
    Json z = Json::object();
    for (auto const& [cls, tally] : z1_breakdown)
      z[cls] = {{"triples", std::to_string(tally.triples)}, {"z1", tally.z1.str()}};
    j["z1"] = std::move(z);
  }
  if (!notes.empty()) j["notes"] = notes;
  return j;
}

std::string CensusReport::csv_header() { return "model,p,target,method,tmp,epi,nu,ms"; }

std::string CensusReport::csv_row() const {
  std::ostringstream os;
  os << model_name << ',' << p << ',' << target << ',' << mcensus::to_string(method) << ','
     << (tmp ? tmp->str() : "") << ',' << epi.str() << ',' << (nu ? nu->str() : "") << ','
     << static_cast<std::int64_t>(ms + 0.5);
  return os.str();
}

// ---------------------------------------------------------------- local fields

DemushkinSpec local_field_model(int degree, unsigned p, QInvariant q) {
  require_prime(p);
  if (degree < 1) throw ValidationError("local degree must be positive");
  DemushkinSpec s;
  s.d = degree + 2;
  s.q = q;
  if (q.is_two(p)) {
    s.kind = s.d % 2 ? DemushkinCase::D2 : DemushkinCase::D3;
  } else {
    if (s.d % 2)
      throw ValidationError("no local field: q != 2 forces an even degree, got degree " + std::to_string(degree));
    s.kind = DemushkinCase::D1;
  }
  s.validate(p);
  return s;
}

BigInt local_nu_formula(int degree, unsigned p, QInvariant q, int target) {
  (void)local_field_model(degree, p, q);
  int const n = degree;
  switch (target) {
    case 2:
      return (P(p, n + 2) - 1) / (p - 1);
    case 3:
      if (p > 2) return P(p, n) * (P(p, n + 2) - 1) * (P(p, n) - 1) / ((P(p, 2) - 1) * (p - 1));
      if (!q.is_two(p)) return P(2, n) * (P(2, n) - 1) * (P(2, n + 2) - 1);
      return P(2, n) * (P(2, n + 1) - 1) * (P(2, n + 1) - 1);
    case 4: {
      if (p != 2) {
        BigInt const pm1 = p - 1;
        return (P(p, n + 2) - 1) * (P(p, n) - 1) * (P(p, n - 1) - 1) * P(p, 3 * n) / (2 * pm1 * pm1 * pm1);
      }
      if (!q.is_two(p)) return (P(2, n + 2) - 1) * (P(2, n) - 1) * (P(2, n - 1) - 1) * P(2, 3 * n + 1) / 3;
      return (P(2, n + 1) - 1) * (P(2, n) - 1) * (P(2, n) - 1) * P(2, 3 * n + 1) / 3;
    }
    default:
      throw ValidationError("local formula covers targets 2, 3 and 4");
  }
}

// ---------------------------------------------------------------- U_n quotients

bool un_quotient_decision(int total_rank, int n) { return n <= total_rank + 1; }

bool un_quotient_decision(GroupModel const& model, int n) {
  return un_quotient_decision(model_rank(model), n);
}

bool superdiagonal_rank_feasible(int d, int n, unsigned p) {
  require_prime(p);
  if (d < 1 || n < 2) throw ValidationError("need d >= 1 and n >= 2");
  unsigned const cells = static_cast<unsigned>((n - 1) * d);
  BigInt const space = big_pow(p, cells);
  if (space > (std::uint64_t{1} << 24)) throw BudgetError("superdiagonal search space too large", space);
  auto const total = static_cast<std::uint64_t>(space);
  std::size_t const rows = static_cast<std::size_t>(n - 1);
  for (std::uint64_t code = 0; code < total; ++code) {
    if (p == 2 && d <= 64) {
      std::vector<std::uint64_t> packed(rows);
      for (std::size_t r = 0; r < rows; ++r) packed[r] = (code >> (r * static_cast<unsigned>(d))) & ((std::uint64_t{1} << d) - 1);
      if (rank_f2_packed(packed) == rows) return true;
      continue;
    }
    FpMatrix m(rows, static_cast<std::size_t>(d), p);
    auto rest = code;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < static_cast<std::size_t>(d); ++c) {
        m.set(r, c, static_cast<std::int64_t>(rest % p));
        rest /= p;
      }
    if (mat_rank(m) == rows) return true;
  }
  return false;
}

}  // namespace mcensus
