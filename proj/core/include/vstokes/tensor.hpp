#pragma once

// Small dense d x d tensors (d = 2, 3) and the rotation-basis identities
// used to rewrite the viscous form as tangential interface terms.

#include <array>
#include <vector>

namespace vstokes {

using Vec3 = std::array<double, 3>;

/// Dense row-major d x d matrix with d chosen at runtime.
class Mat {
 public:
  explicit Mat(int dim);
  Mat(int dim, std::initializer_list<double> row_major);

  static Mat identity(int dim);

  int dim() const { return dim_; }
  double& operator()(int i, int j) { return a_[3 * i + j]; }
  double operator()(int i, int j) const { return a_[3 * i + j]; }

  Mat transpose() const;
  double trace() const;
  double frobenius() const;
  bool finite() const;

  Mat& operator+=(const Mat& o);
  Mat& operator-=(const Mat& o);
  Mat& operator*=(double s);

  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend Mat operator*(Mat a, double s) { return a *= s; }
  friend Mat operator*(double s, Mat a) { return a *= s; }
  friend Mat operator*(const Mat& a, const Mat& b);

  /// Matrix-vector product; entries beyond dim() are ignored/zero.
  Vec3 apply(const Vec3& x) const;

 private:
  int dim_;
  std::array<double, 9> a_{};
};

Mat sym(const Mat& t);
Mat dev(const Mat& t);

struct TensorParts {
  Mat sym;
  Mat dev;
  double trace;
};

TensorParts tensor_parts(const Mat& t);

/// Skew matrices R_d^j. For d = 3, R^j x = e_j x x; for d = 2 the single
/// matrix rotates by +90 degrees.
struct RotationBasis {
  int dim;
  std::vector<Mat> mats;
};

RotationBasis rotation_basis(int dim);

struct DecompositionResiduals {
  double r1;  ///< |T - tr(T) Id - sum_j R_j T^T R_j|_F
  double r2;  ///< |dev T - sum_j R_j (dev T)^T R_j|_F
};

DecompositionResiduals decomposition_residuals(const Mat& t);

/// Same check against an arbitrary basis; used as a negative control with
/// deliberately perturbed matrices.
DecompositionResiduals decomposition_residuals(const Mat& t, const RotationBasis& basis);

}  // namespace vstokes
