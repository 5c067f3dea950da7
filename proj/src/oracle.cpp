#include "mcensus/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <random>
#include <thread>

namespace mcensus {

using Elem = UnipotentGroup::Elem;

unsigned threads_from_environment(unsigned fallback) {
  if (char const* env = std::getenv("MASSEY_CENSUS_THREADS")) {
    char* end = nullptr;
    long const v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 1024) return static_cast<unsigned>(v);
  }
  return fallback;
}

namespace {

// ---------------------------------------------------------------- relator programs

/// A word compiled to postfix form over group element numbers.
class Program {
 public:
  Program(GroupWord const& w, UnipotentGroup const& g) : group_(&g) {
    compile(w);
    int depth = 0;
    for (auto const& op : ops_) {
      depth += op.code == Code::load || op.code == Code::identity ? 1
               : op.code == Code::mul || op.code == Code::comm    ? -1
                                                                  : 0;
      max_depth_ = std::max(max_depth_, depth);
    }
    if (g.order() <= (std::uint64_t{1} << 16)) {
      for (auto const& e : exponents_) {
        std::vector<Elem> table(g.order());
        for (std::uint64_t a = 0; a < g.order(); ++a) table[a] = g.pow(static_cast<Elem>(a), e);
        pow_tables_.push_back(std::move(table));
      }
    }
  }

  Elem eval(Elem const* gens) const {
    Elem stack[kStack];
    int top = 0;
    auto const& g = *group_;
    for (auto const& op : ops_) {
      switch (op.code) {
        case Code::load:
          stack[top++] = gens[op.arg];
          break;
        case Code::identity:
          stack[top++] = g.identity();
          break;
        case Code::mul:
          --top;
          stack[top - 1] = g.mul(stack[top - 1], stack[top]);
          break;
        case Code::comm:
          --top;
          stack[top - 1] = g.comm(stack[top - 1], stack[top]);
          break;
        case Code::inv:
          stack[top - 1] = g.inv(stack[top - 1]);
          break;
        case Code::pow:
          stack[top - 1] = pow_tables_.empty() ? g.pow(stack[top - 1], exponents_[op.arg])
                                               : pow_tables_[op.arg][stack[top - 1]];
          break;
      }
    }
    return stack[0];
  }

 private:
  static constexpr int kStack = 64;
  enum class Code : std::uint8_t { load, identity, mul, inv, pow, comm };
  struct Op {
    Code code;
    std::uint32_t arg;
  };

  void compile(GroupWord const& w) {
    switch (w.kind()) {
      case GroupWord::Kind::gen:
        ops_.push_back({Code::load, static_cast<std::uint32_t>(w.generator() - 1)});
        break;
      case GroupWord::Kind::prod:
        if (w.children().empty()) {
          ops_.push_back({Code::identity, 0});
          break;
        }
        compile(w.children()[0]);
        for (std::size_t i = 1; i < w.children().size(); ++i) {
          compile(w.children()[i]);
          ops_.push_back({Code::mul, 0});
        }
        break;
      case GroupWord::Kind::pow: {
        compile(w.children()[0]);
        auto const e = w.exponent();
        auto it = std::find(exponents_.begin(), exponents_.end(), e);
        if (it == exponents_.end()) it = exponents_.insert(exponents_.end(), e);
        ops_.push_back({Code::pow, static_cast<std::uint32_t>(it - exponents_.begin())});
        break;
      }
      case GroupWord::Kind::comm:
        compile(w.children()[0]);
        compile(w.children()[1]);
        ops_.push_back({Code::comm, 0});
        break;
    }
  }

 public:
  int max_depth() const noexcept { return max_depth_; }
  static constexpr int stack_limit() { return kStack; }

 private:
  UnipotentGroup const* group_;
  std::vector<Op> ops_;
  std::vector<Exponent> exponents_;
  std::vector<std::vector<Elem>> pow_tables_;
  int max_depth_ = 0;
};

// ---------------------------------------------------------------- search engine

struct Search {
  UnipotentGroup const* group = nullptr;
  std::vector<std::vector<Elem>> candidates;  // per generator
  bool require_surjective = false;
  bool stop_at_first = false;
  std::string label;
};

BigInt state_space(Search const& s) {
  BigInt total = 1;
  for (auto const& c : s.candidates) total *= c.size();
  return total;
}

class ProgressMeter {
 public:
  ProgressMeter(bool enabled, std::string label, std::uint64_t chunks)
      : enabled_(enabled), label_(std::move(label)), chunks_(chunks),
        start_(std::chrono::steady_clock::now()), last_(start_) {}

  void chunk_done() {
    auto const done = ++done_;
    if (!enabled_) return;
    std::lock_guard lock(mutex_);
    auto const now = std::chrono::steady_clock::now();
    if (now - last_ < std::chrono::seconds(1) && done != chunks_) return;
    last_ = now;
    double const secs = std::chrono::duration<double>(now - start_).count();
    double const rate = secs > 0 ? static_cast<double>(done) / secs : 0.0;
    double const eta = rate > 0 ? static_cast<double>(chunks_ - done) / rate : 0.0;
    std::fprintf(stderr, "[%s] %llu/%llu chunks, %.1f chunks/s, ETA %.0f s\n", label_.c_str(),
                 static_cast<unsigned long long>(done), static_cast<unsigned long long>(chunks_),
                 rate, eta);
  }

 private:
  bool enabled_;
  std::string label_;
  std::uint64_t chunks_;
  std::atomic<std::uint64_t> done_{0};
  std::mutex mutex_;
  std::chrono::steady_clock::time_point start_, last_;
};

std::uint64_t run_search(Search const& s, std::vector<GroupWord> const& relators,
                         OracleOptions const& opts) {
  auto const& g = *s.group;
  auto const total = state_space(s);
  if (opts.budget > kMaxOracleBudget)
    throw ValidationError("oracle budget above the hard cap 2^31");
  if (total > opts.budget)
    throw BudgetError(s.label + ": state space " + total.str() + " exceeds the budget " +
                          std::to_string(opts.budget),
                      total);
  std::size_t const r = s.candidates.size();
  if (r == 0 || total == 0) return 0;

  std::vector<Program> programs;
  for (auto const& w : relators) {
    programs.emplace_back(w, g);
    if (programs.back().max_depth() > Program::stack_limit())
      throw ValidationError("relator nesting too deep for the evaluator");
  }
  bool const surjective_first = s.require_surjective && programs.size() >= 2;
  std::size_t const needed_rank = static_cast<std::size_t>(g.size() - 1);

  std::uint64_t const chunks = s.candidates[0].size();
  std::atomic<std::uint64_t> next_chunk{0};
  std::atomic<bool> found{false};
  ProgressMeter meter(opts.progress, s.label, chunks);

  auto worker = [&]() -> std::uint64_t {
    std::uint64_t local = 0;
    std::vector<Elem> gens(r);
    std::vector<std::size_t> idx(r);
    auto accepts = [&]() {
      if (surjective_first && g.superdiagonal_rank(gens) != needed_rank) return false;
      for (auto const& prog : programs)
        if (prog.eval(gens.data()) != g.identity()) return false;
      if (s.require_surjective && !surjective_first && g.superdiagonal_rank(gens) != needed_rank)
        return false;
      return true;
    };
    while (true) {
      if (s.stop_at_first && found.load(std::memory_order_relaxed)) break;
      auto const chunk = next_chunk.fetch_add(1);
      if (chunk >= chunks) break;
      gens[0] = s.candidates[0][chunk];
      for (std::size_t i = 1; i < r; ++i) {
        idx[i] = 0;
        gens[i] = s.candidates[i][0];
      }
      while (true) {
        if (accepts()) {
          ++local;
          if (s.stop_at_first) {
            found = true;
            break;
          }
        }
        // Advance the odometer, last generator fastest.
        std::size_t i = r - 1;
        while (i >= 1) {
          if (++idx[i] < s.candidates[i].size()) {
            gens[i] = s.candidates[i][idx[i]];
            break;
          }
          idx[i] = 0;
          gens[i] = s.candidates[i][0];
          --i;
        }
        if (i == 0) break;
        if (s.stop_at_first && found.load(std::memory_order_relaxed)) break;
      }
      meter.chunk_done();
    }
    return local;
  };

  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, chunks));
  if (threads <= 1) return worker();

  std::vector<std::uint64_t> partial(threads, 0);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back([&, t] { partial[t] = worker(); });
  for (auto& th : pool) th.join();
  std::uint64_t sum = 0;
  for (auto v : partial) sum += v;
  return sum;
}

void check_rank(Presentation const& pres, std::size_t dim, char const* what) {
  if (dim != static_cast<std::size_t>(pres.rank()))
    throw ValidationError(std::string(what) + " has dimension " + std::to_string(dim) +
                          " but the presentation has rank " + std::to_string(pres.rank()));
}

/// Elements whose superdiagonal is fixed and whose other coordinates vary.
std::vector<Elem> fiber(UnipotentGroup const& g, std::vector<unsigned> const& superdiag) {
  int const n = g.size();
  unsigned const p = g.modulus();
  int const total = triangle_size(n);
  std::vector<int> free_positions;
  for (int i = 1; i < n; ++i)
    for (int j = i + 2; j <= n; ++j) {
      if (g.omits_corner() && i == 1 && j == n) continue;
      free_positions.push_back(triangle_index(n, i, j));
    }
  std::vector<unsigned> coords(static_cast<std::size_t>(total), 0);
  for (int i = 1; i < n; ++i) coords[triangle_index(n, i, i + 1)] = superdiag[i - 1] % p;
  std::uint64_t const count = checked_pow(p, static_cast<unsigned>(free_positions.size()));
  std::vector<Elem> out;
  out.reserve(count);
  for (std::uint64_t c = 0; c < count; ++c) {
    auto rest = c;
    for (auto it = free_positions.rbegin(); it != free_positions.rend(); ++it) {
      coords[*it] = static_cast<unsigned>(rest % p);
      rest /= p;
    }
    out.push_back(g.from_coords(coords));
  }
  return out;
}

bool system_search(Presentation const& pres, std::vector<FpVector> const& chars, unsigned p,
                   OracleOptions const& opts, bool omit_corner) {
  int const k = static_cast<int>(chars.size());
  if (k < 2) throw ValidationError("a Massey product needs at least two characters");
  if (k + 1 > kMaxUniSize)
    throw ValidationError("k = " + std::to_string(k) + " needs U_" + std::to_string(k + 1) +
                          ", above the supported size " + std::to_string(kMaxUniSize));
  for (auto const& c : chars) {
    check_rank(pres, c.dim(), "character");
    if (c.modulus() != p) throw ValidationError("character modulus differs from p");
  }
  if (omit_corner && k + 1 < 3) throw ValidationError("quotient search needs k >= 2");
  UnipotentGroup g(k + 1, p, omit_corner);
  Search s;
  s.group = &g;
  s.stop_at_first = true;
  s.label = omit_corner ? "massey" : "complete-system";
  for (int gen = 0; gen < pres.rank(); ++gen) {
    std::vector<unsigned> sd;
    for (int i = 0; i < k; ++i) sd.push_back((p - chars[i][gen]) % p);
    s.candidates.push_back(fiber(g, sd));
  }
  return run_search(s, pres.relators(), opts) > 0;
}

}  // namespace

std::uint64_t count_epi_bruteforce(Presentation const& pres, int n, unsigned p,
                                   OracleOptions const& opts) {
  UnipotentGroup g(n, p);
  Search s;
  s.group = &g;
  s.require_surjective = true;
  s.label = "epi " + (pres.name().empty() ? std::string("presentation") : pres.name()) + " -> U_" +
            std::to_string(n) + "(F_" + std::to_string(p) + ")";
  // Check the budget before materialising candidate lists.
  BigInt const total = boost::multiprecision::pow(BigInt(g.order()), static_cast<unsigned>(pres.rank()));
  if (total > opts.budget)
    throw BudgetError(s.label + ": state space " + total.str() + " exceeds the budget " +
                          std::to_string(opts.budget),
                      total);
  std::vector<Elem> all(g.order());
  for (std::uint64_t e = 0; e < g.order(); ++e) all[e] = static_cast<Elem>(e);
  s.candidates.assign(static_cast<std::size_t>(pres.rank()), all);
  return run_search(s, pres.relators(), opts);
}

std::uint64_t count_lifts_bruteforce(Presentation const& pres, unsigned p, FpVector const& x,
                                     FpVector const& y, FpVector const& z,
                                     OracleOptions const& opts) {
  check_rank(pres, x.dim(), "x");
  check_rank(pres, y.dim(), "y");
  check_rank(pres, z.dim(), "z");
  if (x.modulus() != p || y.modulus() != p || z.modulus() != p)
    throw ValidationError("triple modulus differs from p");
  BigInt const total = big_pow(p, 3u * static_cast<unsigned>(pres.rank()));
  if (total > opts.budget)
    throw BudgetError("lift fiber " + total.str() + " exceeds the budget " + std::to_string(opts.budget),
                      total);
  UnipotentGroup g(4, p);
  Search s;
  s.group = &g;
  s.label = "lifts";
  for (int gen = 0; gen < pres.rank(); ++gen)
    s.candidates.push_back(fiber(g, {x[gen], y[gen], z[gen]}));
  return run_search(s, pres.relators(), opts);
}

bool massey_system_exists(Presentation const& pres, std::vector<FpVector> const& chars, unsigned p,
                          OracleOptions const& opts) {
  return system_search(pres, chars, p, opts, true);
}

bool complete_system_exists(Presentation const& pres, std::vector<FpVector> const& chars,
                            unsigned p, OracleOptions const& opts) {
  return system_search(pres, chars, p, opts, false);
}

CupDefiningReport cup_defining_check(Presentation const& pres, CupStructure const& cup, unsigned p,
                                     int k, CupDefiningOptions const& opts) {
  if (cup.dim() != static_cast<std::size_t>(pres.rank()))
    throw ValidationError("cup structure dimension does not match the presentation rank");
  if (cup.modulus() != p) throw ValidationError("cup structure modulus differs from p");
  if (k < 2) throw ValidationError("k must be at least 2");
  std::size_t const d = cup.dim();

  CupDefiningReport report;
  report.k = k;
  auto consecutive_ok = [&](std::vector<FpVector> const& t) {
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
      if (!cup.vanishes(t[i], t[i + 1])) return false;
    return true;
  };
  auto examine = [&](std::vector<FpVector> const& t) {
    ++report.tuples_examined;
    if (!massey_system_exists(pres, t, p, opts.search)) report.failures.push_back(t);
  };

  BigInt const space = big_pow(p, static_cast<unsigned>(d) * static_cast<unsigned>(k));
  if (space <= opts.exhaustive_limit) {
    report.exhaustive = true;
    std::uint64_t const per = checked_pow(p, static_cast<unsigned>(d));
    std::uint64_t const count = static_cast<std::uint64_t>(space);
    std::vector<FpVector> tuple;
    for (std::uint64_t code = 0; code < count; ++code) {
      tuple.clear();
      auto rest = code;
      for (int i = 0; i < k; ++i) {
        tuple.push_back(vector_from_index(rest % per, d, p));
        rest /= per;
      }
      if (consecutive_ok(tuple)) examine(tuple);
    }
  } else {
    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<std::uint64_t> pick(0, checked_pow(p, static_cast<unsigned>(d)) - 1);
    for (std::uint64_t s = 0; s < opts.samples; ++s) {
      std::vector<FpVector> tuple{vector_from_index(pick(rng), d, p)};
      while (static_cast<int>(tuple.size()) < k) {
        // Rejection sampling: the orthogonal complement has index at most p^blocks.
        auto v = vector_from_index(pick(rng), d, p);
        if (cup.vanishes(tuple.back(), v)) tuple.push_back(std::move(v));
      }
      examine(tuple);
    }
  }
  for (auto const& t : opts.extra) {
    if (static_cast<int>(t.size()) != k)
      throw ValidationError("extra tuple has " + std::to_string(t.size()) + " entries, expected " +
                            std::to_string(k));
    if (!consecutive_ok(t))
      throw ValidationError("extra tuple has a nonvanishing consecutive cup product");
    examine(t);
  }
  return report;
}

}  // namespace mcensus
