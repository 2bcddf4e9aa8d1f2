#include "pointclimb/kernels.hpp"

namespace pointclimb::kernels {

namespace {
#ifdef _OPENMP
Backend g_backend = Backend::OpenMP;
#else
Backend g_backend = Backend::Serial;
#endif
}  // namespace

Backend backend() { return g_backend; }

void set_backend(Backend b) { g_backend = b; }

bool openmp_compiled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

void matmul(const double* a, const double* b, double* c, int m, int k, int n,
            bool transpose_a, bool transpose_b) {
  if (g_backend == Backend::OpenMP)
    omp::matmul(a, b, c, m, k, n, transpose_a, transpose_b);
  else
    serial::matmul(a, b, c, m, k, n, transpose_a, transpose_b);
}

void knn(const double* pts, int n, int k, int* idx) {
  if (g_backend == Backend::OpenMP)
    omp::knn(pts, n, k, idx);
  else
    serial::knn(pts, n, k, idx);
}

}  // namespace pointclimb::kernels
