#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace gcmax {

/// Environment variable holding the default worker count.
inline constexpr const char* kThreadsEnv = "GCMAX_THREADS";

namespace detail {
inline std::atomic<std::size_t> g_thread_override{0};
}

/// Overrides the worker count for the process; 0 restores the default.
inline void set_thread_count(std::size_t n) noexcept { detail::g_thread_override = n; }

inline std::size_t thread_count() {
  if (std::size_t n = detail::g_thread_override.load(); n > 0) return n;
  if (const char* env = std::getenv(kThreadsEnv)) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      // fall through to hardware default
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Calls body(chunk) for every chunk in [0, chunks). Work is spread over the
/// configured worker count; body must write only to chunk-owned storage so
/// that results do not depend on scheduling. The first exception thrown by
/// any worker is rethrown on the calling thread.
template <class Body>
void parallel_chunks(std::size_t chunks, Body&& body) {
  const std::size_t workers = std::min(thread_count(), chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        body(c);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace gcmax
