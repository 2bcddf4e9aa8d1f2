#pragma once

namespace pointclimb::kernels {

// The dense inner loops (matmul, kNN search) exist in two lanes: a plain
// serial lane and an OpenMP lane parallelized over output elements. Each
// output element is accumulated in the same serial order in both lanes, so
// the lanes are bit-identical and the choice of lane never changes results.
enum class Backend { Serial, OpenMP };

Backend backend();
void set_backend(Backend b);
bool openmp_compiled();

// C[m x n] = op(A) * op(B), row-major.
// op(A) is A [m x k], or A^T with A stored [k x m] when transpose_a.
// op(B) is B [k x n], or B^T with B stored [n x k] when transpose_b.
void matmul(const double* a, const double* b, double* c, int m, int k, int n,
            bool transpose_a = false, bool transpose_b = false);

// Euclidean k-nearest-neighbor indices among the rows of pts [n x 3],
// self excluded, ties broken by lower point index. idx is n*k, row-major,
// each row sorted by (distance, index) ascending. Requires n > k >= 1.
void knn(const double* pts, int n, int k, int* idx);

namespace serial {
void matmul(const double* a, const double* b, double* c, int m, int k, int n,
            bool transpose_a, bool transpose_b);
void knn(const double* pts, int n, int k, int* idx);
}  // namespace serial

namespace omp {
void matmul(const double* a, const double* b, double* c, int m, int k, int n,
            bool transpose_a, bool transpose_b);
void knn(const double* pts, int n, int k, int* idx);
}  // namespace omp

}  // namespace pointclimb::kernels
