#pragma once

#include <cstddef>
#include <functional>

namespace qtunnel {

/// Worker count: QTUNNEL_THREADS when set and positive, otherwise hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index is
/// visited exactly once; callers write results into slot i, so output order is fixed.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qtunnel
