#include "cilfair/kernels.hpp"

#include <cstdint>

namespace cilfair::kernels {

namespace serial {

void matmul_nt(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += ai[t] * bj[t];
      c[i * n + j] = acc;
    }
  }
}

void matmul_nn(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += ai[t] * b[t * n + j];
      ci[j] = acc;
    }
  }
}

void matmul_tn(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += a[t * m + i] * b[t * n + j];
      ci[j] = acc;
    }
  }
}

void add_bias_rows(double* y, const double* bias, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    double* yi = y + i * cols;
    for (std::size_t j = 0; j < cols; ++j) yi[j] += bias[j];
  }
}

void relu(double* x, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    if (x[i] < 0.0) x[i] = 0.0;
  }
}

void relu_backward(const double* pre, double* grad, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    if (!(pre[i] > 0.0)) grad[i] = 0.0;
  }
}

void colsum(const double* a, double* out, std::size_t rows, std::size_t cols) {
  for (std::size_t j = 0; j < cols; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rows; ++i) acc += a[i * cols + j];
    out[j] = acc;
  }
}

void scale_elements(double* x, const double* scale, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) x[i] *= scale[i];
}

}  // namespace serial

// OpenMP variants. Loops are over output slots only; each slot is written by
// exactly one iteration and every reduction keeps the serial order, so the
// results match the reference bit for bit regardless of thread count.

void matmul_nt(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
    const double* ai = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += ai[t] * bj[t];
      c[i * n + j] = acc;
    }
  }
}

void matmul_nn(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += ai[t] * b[t * n + j];
      ci[j] = acc;
    }
  }
}

void matmul_tn(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += a[t * m + i] * b[t * n + j];
      ci[j] = acc;
    }
  }
}

void add_bias_rows(double* y, const double* bias, std::size_t rows, std::size_t cols) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(rows); ++i) {
    double* yi = y + i * cols;
    for (std::size_t j = 0; j < cols; ++j) yi[j] += bias[j];
  }
}

void relu(double* x, std::size_t len) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(len); ++i) {
    if (x[i] < 0.0) x[i] = 0.0;
  }
}

void relu_backward(const double* pre, double* grad, std::size_t len) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(len); ++i) {
    if (!(pre[i] > 0.0)) grad[i] = 0.0;
  }
}

void colsum(const double* a, double* out, std::size_t rows, std::size_t cols) {
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < static_cast<std::int64_t>(cols); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rows; ++i) acc += a[i * cols + j];
    out[j] = acc;
  }
}

void scale_elements(double* x, const double* scale, std::size_t len) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(len); ++i) x[i] *= scale[i];
}

}  // namespace cilfair::kernels
