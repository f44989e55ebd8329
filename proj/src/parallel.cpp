#include "wave/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace wave {

int thread_count() {
  if (char const *env = std::getenv("WAVE_EPI_THREADS")) {
    int const n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned const hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

namespace {
// Nested loops run inline on the worker that reached them.
thread_local bool t_inside = false;
} // namespace

void parallel_for(Index n, std::function<void(Index)> const &fn) {
  if (n <= 0) return;
  int const workers = t_inside ? 1 : int(std::min<Index>(thread_count(), n));
  if (workers <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<Index> next{0};
  auto work = [&] {
    bool const outer = t_inside;
    t_inside = true;
    for (Index i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[std::size_t(i)] = std::current_exception();
      }
    }
    t_inside = outer;
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto &t : pool) t.join();
  for (auto const &e : errors)
    if (e) std::rethrow_exception(e);
}

} // namespace wave
