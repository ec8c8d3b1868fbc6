#include "fdd/parallel.hpp"

namespace fdd {

namespace {
std::atomic<unsigned> g_default_threads{0};
}

void set_default_threads(unsigned threads) noexcept { g_default_threads = threads; }

unsigned resolve_threads(unsigned requested) noexcept {
  if (requested == 0) requested = g_default_threads.load();
  if (requested == 0) requested = std::max(1u, std::thread::hardware_concurrency());
  return requested;
}

}  // namespace fdd
