#include "disclab/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace disclab::par {

namespace {
std::atomic<Backend> g_backend{
#ifdef _OPENMP
    Backend::OpenMP
#else
    Backend::Serial
#endif
};
}  // namespace

Backend backend() { return g_backend.load(std::memory_order_relaxed); }

void set_backend(Backend b) { g_backend.store(b, std::memory_order_relaxed); }

std::string backend_name(Backend b) {
  return b == Backend::Serial ? "serial" : "openmp";
}

int worker_count() {
#ifdef _OPENMP
  if (backend() == Backend::OpenMP) return omp_get_max_threads();
#endif
  return 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
#ifdef _OPENMP
  if (backend() == Backend::OpenMP) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      body(static_cast<std::size_t>(i));
    }
    return;
  }
#endif
  for (std::size_t i = 0; i < n; ++i) body(i);
}

double reduce_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
  const std::size_t nblocks = (n + detail::kReduceBlock - 1) / detail::kReduceBlock;
  std::vector<double> partial(nblocks, 0.0);
  auto block_sum = [&](std::size_t b) {
    const std::size_t lo = b * detail::kReduceBlock;
    const std::size_t hi = std::min(n, lo + detail::kReduceBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[b] = s;
  };
#ifdef _OPENMP
  if (backend() == Backend::OpenMP) {
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < static_cast<long long>(nblocks); ++b) {
      block_sum(static_cast<std::size_t>(b));
    }
  } else
#endif
  {
    for (std::size_t b = 0; b < nblocks; ++b) block_sum(b);
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

double reduce_max(std::size_t n, const std::function<double(std::size_t)>& term) {
  const std::size_t nblocks = (n + detail::kReduceBlock - 1) / detail::kReduceBlock;
  std::vector<double> partial(nblocks, -std::numeric_limits<double>::infinity());
  auto block_max = [&](std::size_t b) {
    const std::size_t lo = b * detail::kReduceBlock;
    const std::size_t hi = std::min(n, lo + detail::kReduceBlock);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = lo; i < hi; ++i) m = std::max(m, term(i));
    partial[b] = m;
  };
#ifdef _OPENMP
  if (backend() == Backend::OpenMP) {
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < static_cast<long long>(nblocks); ++b) {
      block_max(static_cast<std::size_t>(b));
    }
  } else
#endif
  {
    for (std::size_t b = 0; b < nblocks; ++b) block_max(b);
  }
  double total = -std::numeric_limits<double>::infinity();
  for (double m : partial) total = std::max(total, m);
  return total;
}

}  // namespace disclab::par
