// Runs the acceptance criteria, one PASS/FAIL line each. Exit 0 only when all pass.
#include <iostream>

#include <CLI11.hpp>

#include "sectcalc/acceptance.hpp"
#include "sectcalc/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"sectcalc acceptance suite"};
  sectcalc::AcceptanceOptions opts;
  int threads = 0;
  app.add_option("--seed", opts.seed, "seed for the randomized test points");
  app.add_option("--only", opts.only, "criterion ids to run")->check(CLI::Range(1, sectcalc::kCriterionCount));
  app.add_option("--threads", threads, "worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);
  if (threads > 0) sectcalc::setThreadCount(threads);

  const auto results = sectcalc::runAcceptance(opts, &std::cout);
  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
