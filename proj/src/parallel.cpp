#include "gcltlab/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gcltlab {

namespace {

thread_local std::size_t tls_limit = 0;

std::size_t env_limit() {
  const char* raw = std::getenv("GCLTLAB_THREADS");
  if (raw == nullptr) return 0;
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(raw, raw + std::strlen(raw), value);
  if (ec != std::errc{}) return 0;
  return value;
}

}  // namespace

std::size_t worker_count() {
  std::size_t count = std::max(1u, std::thread::hardware_concurrency());
  if (std::size_t cap = env_limit(); cap > 0) count = std::min(count, cap);
  if (tls_limit > 0) count = std::min(count, tls_limit);
  return count;
}

ScopedWorkerLimit::ScopedWorkerLimit(std::size_t limit) : previous_(tls_limit) {
  tls_limit = std::max<std::size_t>(limit, 1);
}

ScopedWorkerLimit::~ScopedWorkerLimit() { tls_limit = previous_; }

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body,
                  std::size_t min_chunk) {
  if (end <= begin) return;
  const std::size_t total = end - begin;
  const std::size_t workers =
      std::min(worker_count(), (total + min_chunk - 1) / std::max<std::size_t>(min_chunk, 1));
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  const std::size_t chunk = (total + workers - 1) / workers;
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t lo = begin + w * chunk;
      const std::size_t hi = std::min(end, lo + chunk);
      if (lo >= hi) break;
      threads.emplace_back([&, lo, hi] {
        try {
          for (std::size_t i = lo; i < hi; ++i) body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace gcltlab
