#include "psichain/parallel.hpp"

namespace psichain {

namespace {
std::atomic<unsigned> g_threads{0};
}

unsigned thread_count() {
  const unsigned n = g_threads.load();
  if (n != 0) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_thread_count(unsigned n) { g_threads.store(n); }

}  // namespace psichain
