#pragma once

#include <cstddef>
#include <functional>

namespace sectcalc {

// Process-wide worker count used by grid scans. 1 means run inline.
void setThreadCount(int n);
int threadCount();

// Runs body(i) for i in [0, n). Each index is handled by exactly one worker,
// so writing results into slot i keeps output order deterministic.
void parallelFor(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sectcalc
