#include "scatrel/parallel.hpp"

#include <algorithm>
#include <thread>

namespace scatrel {

namespace {
int g_worker_cap = 0;
}

int worker_threads() {
  if (g_worker_cap > 0) return g_worker_cap;
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_worker_threads(int n) { g_worker_cap = std::max(0, n); }

} // namespace scatrel
