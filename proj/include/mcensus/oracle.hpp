#pragma once

// Brute-force ground truth: enumerate homomorphisms from a finitely
// presented group into U_n(F_p) or its central quotient.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcensus/forms.hpp"
#include "mcensus/presentation.hpp"
#include "mcensus/unipotent.hpp"

namespace mcensus {

inline constexpr std::uint64_t kDefaultOracleBudget = std::uint64_t{1} << 26;
inline constexpr std::uint64_t kMaxOracleBudget = std::uint64_t{1} << 31;
inline constexpr std::uint64_t kDefaultLiftBudget = 10'000'000;

struct OracleOptions {
  /// Largest state space (number of generator assignments) accepted.
  std::uint64_t budget = kDefaultOracleBudget;
  /// Worker threads; 0 means one per hardware thread.
  unsigned threads = 1;
  /// Rate and ETA lines on stderr.
  bool progress = false;
};

/// Resolves the worker count: MASSEY_CENSUS_THREADS wins over the fallback.
unsigned threads_from_environment(unsigned fallback);

/// Number of assignments of generators to U_n(F_p) that kill every relator
/// and whose superdiagonal characters are linearly independent.
std::uint64_t count_epi_bruteforce(Presentation const& pres, int n, unsigned p,
                                   OracleOptions const& opts = {});

/// Homomorphisms to U_4(F_p) whose generator images have superdiagonal
/// (x_g, y_g, z_g); each generator ranges over the p^3 matrices with free
/// (1,3), (2,4), (1,4) entries.
std::uint64_t count_lifts_bruteforce(Presentation const& pres, unsigned p, FpVector const& x,
                                     FpVector const& y, FpVector const& z,
                                     OracleOptions const& opts = {.budget = kDefaultLiftBudget});

/// Searches the central quotient of U_{k+1}(F_p) for a homomorphism whose
/// generator g has superdiagonal (-chars[0][g], ..., -chars[k-1][g]).
/// True iff the k-fold Massey product of the characters is defined.
bool massey_system_exists(Presentation const& pres, std::vector<FpVector> const& chars, unsigned p,
                          OracleOptions const& opts = {});

/// As massey_system_exists but in the full U_{k+1}(F_p).
bool complete_system_exists(Presentation const& pres, std::vector<FpVector> const& chars,
                            unsigned p, OracleOptions const& opts = {});

struct CupDefiningReport {
  int k = 0;
  bool exhaustive = false;
  std::uint64_t tuples_examined = 0;  // tuples with all consecutive cups zero
  std::vector<std::vector<FpVector>> failures;  // tuples whose Massey product is undefined
};

struct CupDefiningOptions {
  /// Explore every tuple when the tuple space is at most this size.
  std::uint64_t exhaustive_limit = 1u << 12;
  /// Otherwise draw this many random tuples with consecutive cups zero.
  std::uint64_t samples = 64;
  std::uint64_t seed = 1;
  /// Tuples checked in addition (after their cup conditions are verified).
  std::vector<std::vector<FpVector>> extra;
  OracleOptions search;
};

/// Reports k-tuples with vanishing consecutive cup products for which no
/// defining system exists. An empty report supports the cup-defining
/// property at this scale.
CupDefiningReport cup_defining_check(Presentation const& pres, CupStructure const& cup, unsigned p,
                                     int k, CupDefiningOptions const& opts = {});

}  // namespace mcensus
