#include "pointclimb/kernels.hpp"

#include "kernels_detail.hpp"

namespace pointclimb::kernels::omp {

// Parallelized over output elements only; every element is produced by the
// same serial accumulation as the serial lane, so results are bit-identical
// for any thread count or schedule.

void matmul(const double* a, const double* b, double* c, int m, int k, int n,
            bool transpose_a, bool transpose_b) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      c[i * n + j] =
          detail::matmul_cell(a, b, i, j, m, k, n, transpose_a, transpose_b);
}

void knn(const double* pts, int n, int k, int* idx) {
  detail::check_knn_args(n, k);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) detail::knn_row(pts, n, k, i, idx + i * k);
}

}  // namespace pointclimb::kernels::omp
