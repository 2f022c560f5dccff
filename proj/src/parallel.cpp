#include "segfuse/parallel.hpp"

#include <omp.h>

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace segfuse::parallel {

int configure_from_env() {
  if (const char* env = std::getenv(kThreadsEnv)) {
    int n = 0;
    const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), n);
    if (ec == std::errc() && n > 0) set_max_threads(n);
  }
  return max_threads();
}

void set_max_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace segfuse::parallel
