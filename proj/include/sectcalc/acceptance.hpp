#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sectcalc/quad.hpp"

namespace sectcalc {

// One line of the acceptance suite. Tolerances and time budgets are fixed in
// acceptance.cpp; only the random seed can be changed from outside.
struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20240611;
  std::vector<int> only;  // empty runs all eleven
};

inline constexpr int kCriterionCount = 11;

CriterionResult runCriterion(int id, const AcceptanceOptions& opts = {});
// Prints "PASS [id] title: detail" or "FAIL ..." per criterion as it finishes.
std::vector<CriterionResult> runAcceptance(const AcceptanceOptions& opts = {}, std::ostream* log = nullptr);
std::string formatLine(const CriterionResult& r);

}  // namespace sectcalc
