#include "lighterx/parallel.hpp"

#include "lighterx/errors.hpp"

#include <Eigen/Core>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lighterx {

void set_threads(int threads) {
  if (threads < 1) {
    throw ShapeError("thread count must be >= 1");
  }
#ifdef _OPENMP
  omp_set_num_threads(threads);
#endif
  Eigen::setNbThreads(threads);
}

int get_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace lighterx
