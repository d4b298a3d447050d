#pragma once

#include <cstddef>

namespace cilfair::kernels {

// Dense kernels behind the network math. Each kernel exists twice: a serial
// reference implementation under kernels::serial, and an OpenMP version with
// the same name in this namespace. The parallel loops only distribute
// independent output slots and every per-slot reduction runs in the same
// order as the reference, so the two variants are bit-identical; the test
// suite asserts exact equality and tools/bench_kernels compares their speed.
//
// Shapes are row-major. Naming: n = plain, t = transposed operand.
//   matmul_nt: C[i,j] = sum_t A[i,t] * B[j,t]    A: m x k, B: n x k, C: m x n
//   matmul_nn: C[i,j] = sum_t A[i,t] * B[t,j]    A: m x k, B: k x n, C: m x n
//   matmul_tn: C[i,j] = sum_t A[t,i] * B[t,j]    A: k x m, B: k x n, C: m x n

namespace serial {

void matmul_nt(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n);
void matmul_nn(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n);
void matmul_tn(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n);

// y[i,j] += bias[j]
void add_bias_rows(double* y, const double* bias, std::size_t rows, std::size_t cols);

// x = max(x, 0) elementwise
void relu(double* x, std::size_t len);

// grad[i] *= (pre[i] > 0); the rectifier derivative at exactly 0 is 0.
void relu_backward(const double* pre, double* grad, std::size_t len);

// out[j] = sum_i a[i,j]
void colsum(const double* a, double* out, std::size_t rows, std::size_t cols);

// x[i] *= scale[i]
void scale_elements(double* x, const double* scale, std::size_t len);

}  // namespace serial

void matmul_nt(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n);
void matmul_nn(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n);
void matmul_tn(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n);
void add_bias_rows(double* y, const double* bias, std::size_t rows, std::size_t cols);
void relu(double* x, std::size_t len);
void relu_backward(const double* pre, double* grad, std::size_t len);
void colsum(const double* a, double* out, std::size_t rows, std::size_t cols);
void scale_elements(double* x, const double* scale, std::size_t len);

}  // namespace cilfair::kernels
