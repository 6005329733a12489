#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace glil {

/// Worker count: GLIL_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1). Never affects results.
std::size_t worker_count();

/// Runs body(i) for i in [0, count) across worker_count() threads. Each index
/// is visited exactly once; the body must only write to slots owned by i.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Pairwise (cascade) summation in a fixed tree order.
double pairwise_sum(std::span<const double> values);

}  // namespace glil
