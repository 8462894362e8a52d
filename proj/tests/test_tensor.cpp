#include <gtest/gtest.h>

#include <random>

#include "vstokes/checks.hpp"
#include "vstokes/error.hpp"
#include "vstokes/tensor.hpp"

using namespace vstokes;

namespace {

Mat random_mat(int d, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat t(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) t(i, j) = u(rng);
  return t;
}

double max_abs(const Mat& a) {
  double m = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) m = std::max(m, std::abs(a(i, j)));
  return m;
}

}  // namespace

TEST(TensorParts, IdentityIn3D) {
  const TensorParts p = tensor_parts(Mat::identity(3));
  EXPECT_EQ(max_abs(p.sym - Mat::identity(3)), 0.0);
  EXPECT_EQ(max_abs(p.dev), 0.0);
  EXPECT_EQ(p.trace, 3.0);
}

TEST(TensorParts, SkewTensor) {
  const Mat t(3, {0.0, 2.0, -1.0, -2.0, 0.0, 0.5, 1.0, -0.5, 0.0});
  const TensorParts p = tensor_parts(t);
  EXPECT_EQ(max_abs(p.sym), 0.0);
  EXPECT_EQ(max_abs(p.dev - t), 0.0);
  EXPECT_EQ(p.trace, 0.0);
}

TEST(TensorParts, Recompose2D) {
  std::mt19937 rng(3);
  for (int k = 0; k < 20; ++k) {
    const Mat t = random_mat(2, rng);
    const TensorParts p = tensor_parts(t);
    const Mat back = dev(p.sym) + (p.trace / 2.0) * Mat::identity(2) + 0.5 * (t - t.transpose());
    EXPECT_LE(max_abs(back - t), 1e-15);
  }
}

TEST(TensorParts, DevCommutesWithSymAndIsTraceless) {
  std::mt19937 rng(5);
  for (int d : {2, 3})
    for (int k = 0; k < 20; ++k) {
      const Mat t = random_mat(d, rng);
      EXPECT_LE(max_abs(dev(sym(t)) - sym(dev(t))), 1e-15);
      EXPECT_LE(std::abs(dev(t).trace()), 1e-15);
    }
}

TEST(RotationBasis, TwoDimensionalRotatesByRightAngle) {
  const RotationBasis b = rotation_basis(2);
  ASSERT_EQ(b.mats.size(), 1u);
  const Vec3 y = b.mats[0].apply({1.0, 0.0, 0.0});
  EXPECT_EQ(y[0], 0.0);
  EXPECT_EQ(y[1], 1.0);
  EXPECT_EQ(max_abs(b.mats[0] * b.mats[0] + Mat::identity(2)), 0.0);
}

TEST(RotationBasis, ThreeDimensionalIsCrossProduct) {
  const RotationBasis b = rotation_basis(3);
  ASSERT_EQ(b.mats.size(), 3u);
  const Vec3 y = b.mats[0].apply({0.0, 1.0, 0.0});
  EXPECT_EQ(y[0], 0.0);
  EXPECT_EQ(y[1], 0.0);
  EXPECT_EQ(y[2], 1.0);
  for (int j = 0; j < 3; ++j) {
    Vec3 e{0.0, 0.0, 0.0};
    e[j] = 1.0;
    for (int k = 0; k < 3; ++k) {
      Vec3 x{0.0, 0.0, 0.0};
      x[k] = 1.0;
      const Vec3 r = b.mats[j].apply(x);
      const Point c = cross(e, x);
      for (int i = 0; i < 3; ++i) EXPECT_EQ(r[i], c[i]);
    }
    EXPECT_EQ(max_abs(b.mats[j] + b.mats[j].transpose()), 0.0);
  }
  Mat s(3);
  for (const Mat& r : b.mats) s += r * r;
  EXPECT_EQ(max_abs(s + 2.0 * Mat::identity(3)), 0.0);
}

TEST(RotationBasis, RejectsInvalidDimension) {
  EXPECT_THROW(rotation_basis(4), InvalidArgument);
  EXPECT_THROW(rotation_basis(1), InvalidArgument);
}

TEST(Decomposition, DiagonalExample) {
  const Mat t(3, {1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  const RotationBasis b = rotation_basis(3);
  Mat s(3);
  for (const Mat& r : b.mats) s += r * t.transpose() * r;
  const Mat expect(3, {0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0});
  EXPECT_EQ(max_abs(s - expect), 0.0);
  EXPECT_EQ(decomposition_residuals(t).r1, 0.0);
}

TEST(Decomposition, IdentityIn2D) {
  const DecompositionResiduals r = decomposition_residuals(Mat::identity(2));
  EXPECT_EQ(r.r1, 0.0);
  EXPECT_EQ(r.r2, 0.0);
}

TEST(Decomposition, RandomTensorsBothDimensions) {
  for (int d : {2, 3}) {
    const DecompositionResiduals r = random_decomposition_residuals(d, 100, 42u);
    EXPECT_LE(r.r1, 1e-14) << "d=" << d;
    EXPECT_LE(r.r2, 1e-14) << "d=" << d;
  }
}

TEST(Decomposition, PerturbedBasisIsDetected) {
  RotationBasis bad = rotation_basis(3);
  bad.mats[1](0, 2) += 1e-3;
  std::mt19937 rng(9);
  const DecompositionResiduals r = decomposition_residuals(random_mat(3, rng), bad);
  EXPECT_GT(r.r1, 1e-8);
}
