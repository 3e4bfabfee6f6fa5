#pragma once

#include <cstddef>
#include <functional>

namespace gcltlab {

// Number of worker threads used by parallel_for. Defaults to the hardware
// concurrency, capped by the GCLTLAB_THREADS environment variable.
std::size_t worker_count();

// Overrides worker_count() for the current thread while alive. Used by the
// Python bindings, where user callables must run on the thread holding the
// interpreter lock.
class ScopedWorkerLimit {
 public:
  explicit ScopedWorkerLimit(std::size_t limit);
  ~ScopedWorkerLimit();
  ScopedWorkerLimit(const ScopedWorkerLimit&) = delete;
  ScopedWorkerLimit& operator=(const ScopedWorkerLimit&) = delete;

 private:
  std::size_t previous_;
};

// Calls body(i) for every i in [begin, end). Work is split into contiguous
// chunks; body must only write to state owned by index i, so results do not
// depend on the schedule.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body,
                  std::size_t min_chunk = 256);

}  // namespace gcltlab
