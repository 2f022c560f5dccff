#pragma once

#include <cstddef>

namespace segfuse::parallel {

/// Environment variable capping the OpenMP thread count.
inline constexpr const char* kThreadsEnv = "SEGFUSE_THREADS";

/// Apply SEGFUSE_THREADS if set to a positive integer. Returns the active cap.
int configure_from_env();

void set_max_threads(int threads);
int max_threads();

/// Fixed reduction block size; partial sums are combined in block order so
/// floating-point results never depend on the thread count.
inline constexpr std::size_t kReductionBlock = 512;

}  // namespace segfuse::parallel
