#pragma once

namespace lighterx {

/// Sets the worker count for OpenMP loops and Eigen kernels. 1 gives the
/// deterministic single-threaded mode.
void set_threads(int threads);
int get_threads();

}  // namespace lighterx
