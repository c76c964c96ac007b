#include "motifmix/util.hpp"

#include <algorithm>
#include <cstdlib>

namespace motifmix {

int default_worker_count() {
  if (const char* env = std::getenv("MOTIFMIX_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn) {
  if (workers <= 0) workers = default_worker_count();
  const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (nw <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nw);
  std::vector<std::exception_ptr> errors(nw);
  for (std::size_t t = 0; t < nw; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (std::size_t i = t; i < n; i += nw) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace motifmix
