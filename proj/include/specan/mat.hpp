#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "specan/errors.hpp"

namespace specan {

// Dense row-major matrix of doubles. Deliberately minimal: the training hot
// loop needs exactly three GEMM shapes, all written so the inner loop runs
// over contiguous memory in a fixed order (results are bit-reproducible).
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
  double* row(std::size_t r) { return a.data() + r * cols; }
  const double* row(std::size_t r) const { return a.data() + r * cols; }
  std::size_t size() const { return a.size(); }
  void zero() { std::fill(a.begin(), a.end(), 0.0); }
};

inline void check_shape(const Mat& m, std::size_t r, std::size_t c, const std::string& who) {
  require(m.rows == r && m.cols == c,
          who + ": expected " + std::to_string(r) + "x" + std::to_string(c) + ", got " +
              std::to_string(m.rows) + "x" + std::to_string(m.cols));
}

// C = A * B  (m x k) * (k x n). axpy inner loop over n.
inline void mul_nn(const Mat& A, const Mat& B, Mat& C) {
  require(A.cols == B.rows, "mul_nn: inner dimension mismatch");
  require(C.rows == A.rows && C.cols == B.cols, "mul_nn: output shape mismatch");
  const std::size_t n = B.cols;
  C.zero();
  for (std::size_t i = 0; i < A.rows; ++i) {
    double* __restrict ci = C.row(i);
    const double* __restrict ai = A.row(i);
    for (std::size_t l = 0; l < A.cols; ++l) {
      const double v = ai[l];
      const double* __restrict bl = B.row(l);
      for (std::size_t j = 0; j < n; ++j) ci[j] += v * bl[j];
    }
  }
}

// C = A^T * B  (s x m)^T * (s x n) -> (m x n). axpy inner loop over n.
inline void mul_tn(const Mat& A, const Mat& B, Mat& C) {
  require(A.rows == B.rows, "mul_tn: leading dimension mismatch");
  require(C.rows == A.cols && C.cols == B.cols, "mul_tn: output shape mismatch");
  const std::size_t n = B.cols;
  C.zero();
  for (std::size_t s = 0; s < A.rows; ++s) {
    const double* __restrict as = A.row(s);
    const double* __restrict bs = B.row(s);
    for (std::size_t i = 0; i < A.cols; ++i) {
      const double v = as[i];
      double* __restrict ci = C.row(i);
      for (std::size_t j = 0; j < n; ++j) ci[j] += v * bs[j];
    }
  }
}

// C = A * B^T  (m x k) * (n x k)^T -> (m x n). Dot-product kernel; four
// output columns per pass so the reduction runs as independent chains.
inline void mul_nt(const Mat& A, const Mat& B, Mat& C) {
  require(A.cols == B.cols, "mul_nt: inner dimension mismatch");
  require(C.rows == A.rows && C.cols == B.rows, "mul_nt: output shape mismatch");
  const std::size_t k = A.cols;
  const std::size_t n = B.rows;
  for (std::size_t i = 0; i < A.rows; ++i) {
    const double* __restrict ai = A.row(i);
    double* __restrict ci = C.row(i);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const double* __restrict b0 = B.row(j);
      const double* __restrict b1 = B.row(j + 1);
      const double* __restrict b2 = B.row(j + 2);
      const double* __restrict b3 = B.row(j + 3);
      double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
#pragma omp simd reduction(+ : s0, s1, s2, s3)
      for (std::size_t l = 0; l < k; ++l) {
        s0 += ai[l] * b0[l];
        s1 += ai[l] * b1[l];
        s2 += ai[l] * b2[l];
        s3 += ai[l] * b3[l];
      }
      ci[j] = s0;
      ci[j + 1] = s1;
      ci[j + 2] = s2;
      ci[j + 3] = s3;
    }
    for (; j < n; ++j) {
      const double* __restrict bj = B.row(j);
      double s = 0.0;
#pragma omp simd reduction(+ : s)
      for (std::size_t l = 0; l < k; ++l) s += ai[l] * bj[l];
      ci[j] = s;
    }
  }
}

}  // namespace specan
