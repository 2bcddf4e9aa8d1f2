#include "pointclimb/kernels.hpp"

#include "kernels_detail.hpp"

namespace pointclimb::kernels::serial {

void matmul(const double* a, const double* b, double* c, int m, int k, int n,
            bool transpose_a, bool transpose_b) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      c[i * n + j] =
          detail::matmul_cell(a, b, i, j, m, k, n, transpose_a, transpose_b);
}

void knn(const double* pts, int n, int k, int* idx) {
  detail::check_knn_args(n, k);
  for (int i = 0; i < n; ++i) detail::knn_row(pts, n, k, i, idx + i * k);
}

}  // namespace pointclimb::kernels::serial
