#include "core/parallel.hpp"

#include <cstdlib>

namespace ds {

ThreadPool& ThreadPool::global() {
  static ThreadPool pool([] {
    if (const char* env = std::getenv("DSYNTH_THREADS")) {
      int n = std::atoi(env);
      if (n > 0) return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1u;
  }());
  return pool;
}

} // namespace ds
