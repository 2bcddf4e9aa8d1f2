// Times the serial and OpenMP kernel lanes on training-shaped workloads and
// confirms their outputs stay bit-identical.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "pointclimb/kernels.hpp"
#include "pointclimb/rng.hpp"

using pointclimb::Rng;
namespace kernels = pointclimb::kernels;

namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
double best_of(int repeats, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    auto start = Clock::now();
    fn();
    auto stop = Clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return best;
}

void fill_random(std::vector<double>& v, uint64_t seed) {
  Rng rng(seed);
  for (double& x : v) x = rng.next_range(-1.0, 1.0);
}

void bench_matmul(int m, int k, int n) {
  std::vector<double> a(static_cast<std::size_t>(m) * k);
  std::vector<double> b(static_cast<std::size_t>(k) * n);
  std::vector<double> serial_out(static_cast<std::size_t>(m) * n);
  std::vector<double> omp_out(static_cast<std::size_t>(m) * n);
  fill_random(a, 1);
  fill_random(b, 2);

  double serial_ms = best_of(5, [&]() {
    kernels::serial::matmul(a.data(), b.data(), serial_out.data(), m, k, n, false, false);
  });
  double omp_ms = best_of(5, [&]() {
    kernels::omp::matmul(a.data(), b.data(), omp_out.data(), m, k, n, false, false);
  });
  bool identical =
      std::memcmp(serial_out.data(), omp_out.data(), serial_out.size() * sizeof(double)) == 0;
  std::printf("matmul %4dx%4dx%4d  serial %8.3f ms  omp %8.3f ms  speedup %5.2fx  %s\n", m,
              k, n, serial_ms, omp_ms, serial_ms / omp_ms,
              identical ? "bit-identical" : "MISMATCH");
}

void bench_knn(int n, int k) {
  std::vector<double> pts(static_cast<std::size_t>(n) * 3);
  fill_random(pts, 3);
  std::vector<int> serial_idx(static_cast<std::size_t>(n) * k);
  std::vector<int> omp_idx(static_cast<std::size_t>(n) * k);

  double serial_ms =
      best_of(5, [&]() { kernels::serial::knn(pts.data(), n, k, serial_idx.data()); });
  double omp_ms = best_of(5, [&]() { kernels::omp::knn(pts.data(), n, k, omp_idx.data()); });
  bool identical =
      std::memcmp(serial_idx.data(), omp_idx.data(), serial_idx.size() * sizeof(int)) == 0;
  std::printf("knn    n=%5d k=%2d   serial %8.3f ms  omp %8.3f ms  speedup %5.2fx  %s\n", n,
              k, serial_ms, omp_ms, serial_ms / omp_ms,
              identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("openmp compiled: %s\n", kernels::openmp_compiled() ? "yes" : "no");
  bench_matmul(128, 3, 64);
  bench_matmul(256, 64, 128);
  bench_matmul(512, 128, 256);
  bench_matmul(1024, 256, 256);
  bench_knn(1024, 8);
  bench_knn(2048, 8);
  bench_knn(4096, 8);
  return 0;
}
