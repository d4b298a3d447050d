#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "cilfair/kernels.hpp"
#include "cilfair/rng.hpp"

using namespace cilfair;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

// independent naive oracle for C[i,j] = sum_t A[i,t] * B[j,t]
std::vector<double> oracle_nt(const std::vector<double>& a, const std::vector<double>& b,
                              std::size_t m, std::size_t k, std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += a[i * k + t] * b[j * k + t];
      c[i * n + j] = s;
    }
  }
  return c;
}

std::vector<double> transpose(const std::vector<double>& a, std::size_t rows,
                              std::size_t cols) {
  std::vector<double> t(a.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) t[c * rows + r] = a[r * cols + c];
  }
  return t;
}

}  // namespace

TEST_CASE("matmul_nt matches a naive oracle") {
  Rng rng(1);
  for (int rep = 0; rep < 5; ++rep) {
    const std::size_t m = 1 + rng.below(8), k = 1 + rng.below(8), n = 1 + rng.below(8);
    const auto a = random_vec(m * k, rng);
    const auto b = random_vec(n * k, rng);
    std::vector<double> c(m * n, -1.0);
    kernels::matmul_nt(a.data(), b.data(), c.data(), m, k, n);
    const auto want = oracle_nt(a, b, m, k, n);
    for (std::size_t i = 0; i < c.size(); ++i) {
      CHECK(c[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("matmul_nn and matmul_tn agree with matmul_nt through transposes") {
  Rng rng(2);
  for (int rep = 0; rep < 5; ++rep) {
    const std::size_t m = 1 + rng.below(7), k = 1 + rng.below(7), n = 1 + rng.below(7);
    const auto a = random_vec(m * k, rng);      // m x k
    const auto b = random_vec(k * n, rng);      // k x n
    const auto bt = transpose(b, k, n);         // n x k

    std::vector<double> c_nn(m * n), c_nt(m * n);
    kernels::matmul_nn(a.data(), b.data(), c_nn.data(), m, k, n);
    kernels::matmul_nt(a.data(), bt.data(), c_nt.data(), m, k, n);
    for (std::size_t i = 0; i < c_nn.size(); ++i) {
      CHECK(c_nn[i] == doctest::Approx(c_nt[i]).epsilon(1e-12));
    }

    // C = A^T B with A: k x m
    const auto a_km = random_vec(k * m, rng);
    const auto at = transpose(a_km, k, m);  // m x k
    std::vector<double> c_tn(m * n), c_ref(m * n);
    kernels::matmul_tn(a_km.data(), b.data(), c_tn.data(), m, k, n);
    kernels::matmul_nn(at.data(), b.data(), c_ref.data(), m, k, n);
    for (std::size_t i = 0; i < c_tn.size(); ++i) {
      CHECK(c_tn[i] == doctest::Approx(c_ref[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t m = 1 + rng.below(33), k = 1 + rng.below(33),
                      n = 1 + rng.below(33);
    const auto a = random_vec(m * k, rng);
    const auto b_nt = random_vec(n * k, rng);
    const auto b_nn = random_vec(k * n, rng);
    const auto a_tn = random_vec(k * m, rng);

    std::vector<double> p(m * n), s(m * n);
    kernels::matmul_nt(a.data(), b_nt.data(), p.data(), m, k, n);
    kernels::serial::matmul_nt(a.data(), b_nt.data(), s.data(), m, k, n);
    CHECK(p == s);

    kernels::matmul_nn(a.data(), b_nn.data(), p.data(), m, k, n);
    kernels::serial::matmul_nn(a.data(), b_nn.data(), s.data(), m, k, n);
    CHECK(p == s);

    kernels::matmul_tn(a_tn.data(), b_nn.data(), p.data(), m, k, n);
    kernels::serial::matmul_tn(a_tn.data(), b_nn.data(), s.data(), m, k, n);
    CHECK(p == s);

    auto y1 = random_vec(m * n, rng);
    auto y2 = y1;
    const auto bias = random_vec(n, rng);
    kernels::add_bias_rows(y1.data(), bias.data(), m, n);
    kernels::serial::add_bias_rows(y2.data(), bias.data(), m, n);
    CHECK(y1 == y2);

    auto x1 = random_vec(m * n, rng);
    auto x2 = x1;
    kernels::relu(x1.data(), x1.size());
    kernels::serial::relu(x2.data(), x2.size());
    CHECK(x1 == x2);

    const auto pre = random_vec(m * n, rng);
    auto g1 = random_vec(m * n, rng);
    auto g2 = g1;
    kernels::relu_backward(pre.data(), g1.data(), g1.size());
    kernels::serial::relu_backward(pre.data(), g2.data(), g2.size());
    CHECK(g1 == g2);

    std::vector<double> cs1(n), cs2(n);
    kernels::colsum(y1.data(), cs1.data(), m, n);
    kernels::serial::colsum(y1.data(), cs2.data(), m, n);
    CHECK(cs1 == cs2);

    auto e1 = random_vec(m * n, rng);
    auto e2 = e1;
    const auto scale = random_vec(m * n, rng);
    kernels::scale_elements(e1.data(), scale.data(), e1.size());
    kernels::serial::scale_elements(e2.data(), scale.data(), e2.size());
    CHECK(e1 == e2);
  }
}

TEST_CASE("relu clamps negatives and its backward zeroes at pre <= 0") {
  std::vector<double> x = {-1.0, 0.0, 2.5, -0.0001};
  kernels::relu(x.data(), x.size());
  CHECK(x == std::vector<double>{0.0, 0.0, 2.5, 0.0});

  const std::vector<double> pre = {-1.0, 0.0, 2.5};
  std::vector<double> grad = {5.0, 5.0, 5.0};
  kernels::relu_backward(pre.data(), grad.data(), grad.size());
  // derivative at exactly 0 is 0 by the documented convention
  CHECK(grad == std::vector<double>{0.0, 0.0, 5.0});
}

TEST_CASE("colsum sums columns") {
  // 2 x 3 matrix
  const std::vector<double> a = {1, 2, 3, 10, 20, 30};
  std::vector<double> out(3);
  kernels::colsum(a.data(), out.data(), 2, 3);
  CHECK(out == std::vector<double>{11, 22, 33});
}
