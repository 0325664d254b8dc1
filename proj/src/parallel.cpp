#include "ternavit/parallel.hpp"

#include <cstdlib>
#include <string>

namespace ternavit {

unsigned hardware_threads() {
  if (const char* env = std::getenv("TERNAVIT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

}  // namespace ternavit
