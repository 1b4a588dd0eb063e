#include <gtest/gtest.h>

#include <vector>

#include "specan/mat.hpp"
#include "specan/rng.hpp"

using namespace specan;

namespace {

Mat random_mat(std::size_t r, std::size_t c, std::uint64_t seed) {
  Mat m(r, c);
  rng::SplitMix64 g(seed);
  for (auto& v : m.a) v = g.uniform(-1.0, 1.0);
  return m;
}

// Reference product with the textbook loop order.
Mat naive_mul(const Mat& A, const Mat& B, bool ta, bool tb) {
  const std::size_t m = ta ? A.cols : A.rows;
  const std::size_t k = ta ? A.rows : A.cols;
  const std::size_t n = tb ? B.rows : B.cols;
  Mat C(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0;
      for (std::size_t p = 0; p < k; ++p) {
        const double a = ta ? A.at(p, i) : A.at(i, p);
        const double b = tb ? B.at(j, p) : B.at(p, j);
        acc += a * b;
      }
      C.at(i, j) = acc;
    }
  return C;
}

void expect_close(const Mat& got, const Mat& want, double tol) {
  ASSERT_EQ(got.rows, want.rows);
  ASSERT_EQ(got.cols, want.cols);
  for (std::size_t i = 0; i < got.size(); ++i)
    ASSERT_NEAR(got.a[i], want.a[i], tol) << "flat index " << i;
}

}  // namespace

TEST(Mat, LayoutIsRowMajor) {
  Mat m(2, 3);
  for (std::size_t i = 0; i < 6; ++i) m.a[i] = static_cast<double>(i);
  EXPECT_DOUBLE_EQ(m.at(0, 0), 0);
  EXPECT_DOUBLE_EQ(m.at(0, 2), 2);
  EXPECT_DOUBLE_EQ(m.at(1, 0), 3);
  EXPECT_DOUBLE_EQ(m.row(1)[2], 5);
  m.zero();
  for (double v : m.a) EXPECT_EQ(v, 0.0);
}

TEST(Mat, MulNnMatchesNaive) {
  const Mat A = random_mat(7, 13, 1), B = random_mat(13, 5, 2);
  Mat C(7, 5);
  mul_nn(A, B, C);
  expect_close(C, naive_mul(A, B, false, false), 1e-12);
}

TEST(Mat, MulTnMatchesNaive) {
  const Mat A = random_mat(13, 7, 3), B = random_mat(13, 5, 4);
  Mat C(7, 5);
  mul_tn(A, B, C);
  expect_close(C, naive_mul(A, B, true, false), 1e-12);
}

TEST(Mat, MulNtMatchesNaive) {
  const Mat A = random_mat(7, 13, 5), B = random_mat(5, 13, 6);
  Mat C(7, 5);
  mul_nt(A, B, C);
  expect_close(C, naive_mul(A, B, false, true), 1e-12);
}

TEST(Mat, KernelsOverwriteOutput) {
  const Mat A = random_mat(4, 4, 7), B = random_mat(4, 4, 8);
  Mat C1(4, 4), C2(4, 4);
  for (auto& v : C2.a) v = 123.0;  // stale contents must not leak through
  mul_nn(A, B, C1);
  mul_nn(A, B, C2);
  expect_close(C1, C2, 0.0);
}

TEST(Mat, OddSizesExerciseRemainderLanes) {
  // 1x1 up to shapes that are not multiples of the unroll width.
  for (std::size_t m : {1u, 2u, 3u, 9u})
    for (std::size_t k : {1u, 5u, 17u})
      for (std::size_t n : {1u, 3u, 11u}) {
        const Mat A = random_mat(m, k, m * 100 + k * 10 + n);
        const Mat B = random_mat(n, k, m + k + n);
        Mat C(m, n);
        mul_nt(A, B, C);
        expect_close(C, naive_mul(A, B, false, true), 1e-12);
      }
}

TEST(Mat, ShapeMismatchThrows) {
  Mat A(3, 4), B(5, 6), C(3, 6);
  EXPECT_THROW(mul_nn(A, B, C), std::invalid_argument);
  EXPECT_THROW(mul_tn(A, B, C), std::invalid_argument);
  EXPECT_THROW(mul_nt(A, B, C), std::invalid_argument);
  EXPECT_THROW(check_shape(A, 4, 4, "test"), std::invalid_argument);
  EXPECT_NO_THROW(check_shape(A, 3, 4, "test"));
}
