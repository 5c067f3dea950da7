#pragma once

// The acceptance grid: closed forms against enumeration and brute force.

#include <iosfwd>
#include <string>
#include <vector>

namespace mcensus {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  /// Outside the established theory: a mismatch is reported but not failed.
  bool exploratory = false;
  std::string detail;
  double seconds = 0;
};

struct VerifyOptions {
  /// "desk" or "extended".
  std::string suite = "desk";
  /// Worker count for the multi-threaded determinism runs.
  unsigned parallel_threads = 8;
  bool progress = false;
};

/// Runs every criterion, streaming one line per result to live if given.
std::vector<CriterionResult> run_verify(VerifyOptions const& opts, std::ostream* live = nullptr);

std::string format_result_line(CriterionResult const& r);

}  // namespace mcensus
