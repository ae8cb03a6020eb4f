#include "hawkes_stein/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace hawkes_stein {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HAWKES_STEIN_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  return omp_get_max_threads();
}

}  // namespace hawkes_stein
