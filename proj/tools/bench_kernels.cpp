// Times the serial reference kernels against the OpenMP dispatch versions on
// network-sized problems and verifies bit-identical outputs along the way.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cilfair/kernels.hpp"
#include "cilfair/rng.hpp"

namespace {

using cilfair::Rng;
namespace k = cilfair::kernels;

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

double time_ms(const std::function<void()>& fn, int iters) {
  fn();  // warm-up
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < iters; ++i) fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() /
         static_cast<double>(iters);
}

bool identical(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace

int main() {
  const std::size_t m = 512, kk = 512, n = 512;
  const int iters = 5;
  Rng rng(42);
  const std::vector<double> a = random_vec(m * kk, rng);
  const std::vector<double> bt = random_vec(n * kk, rng);
  const std::vector<double> bn = random_vec(kk * n, rng);
  const std::vector<double> at = random_vec(kk * m, rng);

#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled in this build\n");
#endif
  std::printf("matrix sizes: %zux%zu * %zux%zu, %d timed iterations each\n\n",
              m, kk, kk, n, iters);
  std::printf("%-14s %12s %12s %9s %6s\n", "kernel", "serial ms", "parallel ms",
              "speedup", "match");

  bool all_match = true;
  const auto report = [&](const char* name, const std::function<void()>& ser,
                          const std::function<void()>& par,
                          const std::vector<double>& out_ser,
                          const std::vector<double>& out_par) {
    const double ts = time_ms(ser, iters);
    const double tp = time_ms(par, iters);
    const bool match = identical(out_ser, out_par);
    all_match = all_match && match;
    std::printf("%-14s %12.3f %12.3f %8.2fx %6s\n", name, ts, tp, ts / tp,
                match ? "yes" : "NO");
  };

  {
    std::vector<double> cs(m * n), cp(m * n);
    report(
        "matmul_nt",
        [&] { k::serial::matmul_nt(a.data(), bt.data(), cs.data(), m, kk, n); },
        [&] { k::matmul_nt(a.data(), bt.data(), cp.data(), m, kk, n); }, cs, cp);
  }
  {
    std::vector<double> cs(m * n), cp(m * n);
    report(
        "matmul_nn",
        [&] { k::serial::matmul_nn(a.data(), bn.data(), cs.data(), m, kk, n); },
        [&] { k::matmul_nn(a.data(), bn.data(), cp.data(), m, kk, n); }, cs, cp);
  }
  {
    std::vector<double> cs(m * n), cp(m * n);
    report(
        "matmul_tn",
        [&] { k::serial::matmul_tn(at.data(), bn.data(), cs.data(), m, kk, n); },
        [&] { k::matmul_tn(at.data(), bn.data(), cp.data(), m, kk, n); }, cs, cp);
  }
  {
    const std::size_t len = 8 * 1024 * 1024;
    const std::vector<double> pre = random_vec(len, rng);
    std::vector<double> gs = random_vec(len, rng);
    std::vector<double> gp = gs;
    report(
        "relu_backward",
        [&] { k::serial::relu_backward(pre.data(), gs.data(), len); },
        [&] { k::relu_backward(pre.data(), gp.data(), len); }, gs, gp);
  }
  {
    const std::size_t rows = 4096, cols = 512;
    const std::vector<double> mat = random_vec(rows * cols, rng);
    std::vector<double> os(cols), op(cols);
    report(
        "colsum",
        [&] { k::serial::colsum(mat.data(), os.data(), rows, cols); },
        [&] { k::colsum(mat.data(), op.data(), rows, cols); }, os, op);
  }

  std::printf("\nbit-identical outputs: %s\n", all_match ? "yes" : "NO");
  return all_match ? 0 : 1;
}
