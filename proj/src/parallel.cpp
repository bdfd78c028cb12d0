#include "rotacalc/parallel.hpp"

#include <atomic>

namespace rotacalc {

namespace {
std::atomic<unsigned> g_workers{1};
}

void set_worker_count(unsigned workers) {
  if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
  g_workers.store(workers);
}

unsigned worker_count() { return g_workers.load(); }

}  // namespace rotacalc
