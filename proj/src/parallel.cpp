#include "svarkit/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>

#include <omp.h>

namespace svarkit {

namespace {
std::atomic<int> g_override{0};
}

int worker_count() {
  if (int n = g_override.load(); n > 0) return n;
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("SVARKIT_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(n, 1);
}

void set_worker_count(int n) { g_override.store(std::max(n, 0)); }

}  // namespace svarkit
