#pragma once

#include <stdexcept>
#include <vector>

namespace pointclimb::kernels::detail {

// One output element of op(A)*op(B). Accumulation runs over k in ascending
// order; both lanes call this, which is what makes them bit-identical.
inline double matmul_cell(const double* a, const double* b, int i, int j,
                          int m, int k, int n, bool ta, bool tb) {
  double acc = 0.0;
  for (int p = 0; p < k; ++p) {
    const double av = ta ? a[p * m + i] : a[i * k + p];
    const double bv = tb ? b[j * k + p] : b[p * n + j];
    acc += av * bv;
  }
  return acc;
}

// k smallest (squared distance, index) pairs for point i, self excluded.
// Candidates arrive in ascending j and insertion uses strict <, so distance
// ties always keep the lower index.
inline void knn_row(const double* pts, int n, int k, int i, int* out) {
  std::vector<double> best_d(static_cast<size_t>(k));
  std::vector<int> best_j(static_cast<size_t>(k));
  int filled = 0;
  const double xi = pts[i * 3], yi = pts[i * 3 + 1], zi = pts[i * 3 + 2];
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const double dx = pts[j * 3] - xi;
    const double dy = pts[j * 3 + 1] - yi;
    const double dz = pts[j * 3 + 2] - zi;
    const double d = dx * dx + dy * dy + dz * dz;
    if (filled < k) {
      ++filled;
    } else if (d >= best_d[static_cast<size_t>(k - 1)]) {
      continue;
    }
    int pos = filled - 1;
    while (pos > 0 && d < best_d[static_cast<size_t>(pos - 1)]) {
      best_d[static_cast<size_t>(pos)] = best_d[static_cast<size_t>(pos - 1)];
      best_j[static_cast<size_t>(pos)] = best_j[static_cast<size_t>(pos - 1)];
      --pos;
    }
    best_d[static_cast<size_t>(pos)] = d;
    best_j[static_cast<size_t>(pos)] = j;
  }
  for (int q = 0; q < k; ++q) out[q] = best_j[static_cast<size_t>(q)];
}

inline void check_knn_args(int n, int k) {
  if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
  if (n <= k) throw std::invalid_argument("knn: need n > k");
}

}  // namespace pointclimb::kernels::detail
