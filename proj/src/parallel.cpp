#include "mimic/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace mimic {
namespace {

unsigned default_thread_count() {
  if (const char* env = std::getenv("MIMIC_THREADS"); env != nullptr && *env != '\0') {
    try {
      const long v = std::stol(env);
      if (v > 0) {
        return static_cast<unsigned>(v);
      }
    } catch (const std::exception&) {
      // fall through to hardware default
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::atomic<unsigned>& configured_threads() {
  static std::atomic<unsigned> n{default_thread_count()};
  return n;
}

thread_local bool in_parallel_region = false;

}  // namespace

unsigned thread_count() { return configured_threads().load(); }

void set_thread_count(unsigned n) { configured_threads().store(std::max(1u, n)); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1 || in_parallel_region) {
    for (std::size_t i = 0; i < n; ++i) {
      body(i);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    in_parallel_region = true;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) {
        break;
      }
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
        next.store(n);
      }
    }
    in_parallel_region = false;
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) {
    pool.emplace_back(worker);
  }
  worker();
  pool.clear();

  if (failure) {
    std::rethrow_exception(failure);
  }
}

}  // namespace mimic
