#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace disclab::par {

/// Execution backend for the data-parallel kernels. The serial backend is the
/// reference; the OpenMP backend must produce bit-identical results, which is
/// guaranteed by the fixed-block reduction scheme below.
enum class Backend { Serial, OpenMP };

Backend backend();
void set_backend(Backend b);
std::string backend_name(Backend b);

/// Number of worker threads the OpenMP backend will use (1 for Serial).
int worker_count();

namespace detail {
constexpr std::size_t kReduceBlock = 4096;
}

/// Elementwise parallel loop, no ordering guarantees between iterations.
/// Bodies must write disjoint locations.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Deterministic sum reduction: the index space is cut into fixed-size blocks,
/// block sums are accumulated serially within a block and combined in block
/// order. The result is independent of thread count and identical between the
/// serial and OpenMP backends.
double reduce_sum(std::size_t n, const std::function<double(std::size_t)>& term);

/// Max reduction (order independent, hence trivially deterministic).
double reduce_max(std::size_t n, const std::function<double(std::size_t)>& term);

}  // namespace disclab::par
