#include <gtest/gtest.h>

#include "vstokes/sparse.hpp"

using namespace vstokes;

namespace {

CsrMatrix example() {
  // [ 4 -1  0 ]
  // [-1  4 -1 ]
  // [ 0 -1  4 ]
  return CsrMatrix::from_triplets(3, 3, {{0, 0, 4}, {0, 1, -1}, {1, 0, -1}, {1, 1, 2}, {1, 1, 2}, {1, 2, -1},
                                         {2, 1, -1}, {2, 2, 4}});
}

}  // namespace

TEST(CsrMatrix, TripletsSumDuplicates) {
  const CsrMatrix a = example();
  EXPECT_EQ(a.nnz(), 7);
  EXPECT_EQ(a.at(1, 1), 4.0);
  EXPECT_EQ(a.at(0, 2), 0.0);
  EXPECT_EQ(a.find(0, 2), -1);
  EXPECT_EQ(a.diagonal(2), 4.0);
}

TEST(CsrMatrix, MultiplyMatchesDense) {
  const CsrMatrix a = example();
  const Vector x{1.0, 2.0, 3.0};
  Vector y(3);
  a.multiply(x, y);
  const Eigen::VectorXd ref = a.to_dense() * Eigen::Vector3d(1.0, 2.0, 3.0);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(y[i], ref[i]);
  a.multiply_add(-1.0, x, y);
  for (double v : y) EXPECT_EQ(v, 0.0);
}

TEST(CsrMatrix, TransposeAndEigen) {
  const CsrMatrix b = CsrMatrix::from_triplets(2, 3, {{0, 2, 5.0}, {1, 0, -2.0}});
  const CsrMatrix bt = b.transpose();
  EXPECT_EQ(bt.rows, 3);
  EXPECT_EQ(bt.cols, 2);
  EXPECT_EQ(bt.at(2, 0), 5.0);
  EXPECT_EQ(bt.at(0, 1), -2.0);
  EXPECT_EQ((b.to_eigen().toDense() - b.to_dense()).norm(), 0.0);
}

TEST(CsrMatrix, PrunedDropsSmallEntries) {
  const CsrMatrix a = CsrMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 1e-20}, {1, 1, 0.0}});
  EXPECT_EQ(a.nnz(), 3);
  EXPECT_EQ(a.pruned(1e-15).nnz(), 1);
}

TEST(CsrMatrix, PatternStartsAtZero) {
  const CsrMatrix a = CsrMatrix::from_pattern(2, 2, {0, 1, 2}, {1, 0});
  EXPECT_EQ(a.nnz(), 2);
  EXPECT_EQ(a.at(0, 1), 0.0);
  EXPECT_EQ(a.find(0, 1), 0);
}

TEST(VectorOps, DotNormAxpy) {
  const Vector a{3.0, 4.0};
  Vector b{1.0, 1.0};
  EXPECT_EQ(dot(a, b), 7.0);
  EXPECT_EQ(norm2(a), 5.0);
  axpy(2.0, a, b);
  EXPECT_EQ(b[0], 7.0);
  EXPECT_EQ(b[1], 9.0);
}

TEST(Threads, ResultsIndependentOfThreadCount) {
  const CsrMatrix a = example();
  const Vector x{0.3, -1.7, 2.2};
  Vector y1(3), y2(3);
  set_num_threads(1);
  a.multiply(x, y1);
  set_num_threads(4);
  a.multiply(x, y2);
  set_num_threads(1);
  EXPECT_EQ(y1, y2);
}
