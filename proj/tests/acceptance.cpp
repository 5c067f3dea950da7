// Prints one PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.

#include <cstring>
#include <iostream>

#include "mcensus/verify.hpp"

int main(int argc, char** argv) {
  mcensus::VerifyOptions opts;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--extended") == 0) opts.suite = "extended";
  auto const results = mcensus::run_verify(opts, &std::cout);
  int failed = 0;
  for (auto const& r : results) failed += !r.pass;
  std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
