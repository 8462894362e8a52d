#include "vstokes/tensor.hpp"

#include <cmath>

#include "vstokes/error.hpp"

namespace vstokes {

namespace {

void check_dim(int dim) {
  if (dim != 2 && dim != 3) throw InvalidArgument("tensor dimension must be 2 or 3");
}

}  // namespace

Mat::Mat(int dim) : dim_(dim) { check_dim(dim); }

Mat::Mat(int dim, std::initializer_list<double> row_major) : dim_(dim) {
  check_dim(dim);
  if (static_cast<int>(row_major.size()) != dim * dim)
    throw InvalidArgument("Mat initializer size does not match dimension");
  auto it = row_major.begin();
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) (*this)(i, j) = *it++;
}

Mat Mat::identity(int dim) {
  Mat m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::transpose() const {
  Mat t(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) t(i, j) = (*this)(j, i);
  return t;
}

double Mat::trace() const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += (*this)(i, i);
  return s;
}

double Mat::frobenius() const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) s += (*this)(i, j) * (*this)(i, j);
  return std::sqrt(s);
}

bool Mat::finite() const {
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      if (!std::isfinite((*this)(i, j))) return false;
  return true;
}

Mat& Mat::operator+=(const Mat& o) {
  if (o.dim_ != dim_) throw InvalidArgument("dimension mismatch in Mat +=");
  for (int k = 0; k < 9; ++k) a_[k] += o.a_[k];
  return *this;
}

Mat& Mat::operator-=(const Mat& o) {
  if (o.dim_ != dim_) throw InvalidArgument("dimension mismatch in Mat -=");
  for (int k = 0; k < 9; ++k) a_[k] -= o.a_[k];
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (double& v : a_) v *= s;
  return *this;
}

Mat operator*(const Mat& a, const Mat& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("dimension mismatch in Mat *");
  const int d = a.dim();
  Mat c(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

Vec3 Mat::apply(const Vec3& x) const {
  Vec3 y{0.0, 0.0, 0.0};
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) y[i] += (*this)(i, j) * x[j];
  return y;
}

Mat sym(const Mat& t) { return 0.5 * (t + t.transpose()); }

Mat dev(const Mat& t) { return t - (t.trace() / t.dim()) * Mat::identity(t.dim()); }

TensorParts tensor_parts(const Mat& t) { return {sym(t), dev(t), t.trace()}; }

RotationBasis rotation_basis(int dim) {
  check_dim(dim);
  if (dim == 2) return {2, {Mat(2, {0, -1, 1, 0})}};
  return {3,
          {Mat(3, {0, 0, 0, 0, 0, -1, 0, 1, 0}),
           Mat(3, {0, 0, 1, 0, 0, 0, -1, 0, 0}),
           Mat(3, {0, -1, 0, 1, 0, 0, 0, 0, 0})}};
}

DecompositionResiduals decomposition_residuals(const Mat& t) {
  return decomposition_residuals(t, rotation_basis(t.dim()));
}

DecompositionResiduals decomposition_residuals(const Mat& t, const RotationBasis& basis) {
  const int d = t.dim();
  if (basis.dim != d) throw InvalidArgument("rotation basis dimension mismatch");

  Mat rot_t(d), rot_dev(d);
  const Mat tt = t.transpose();
  const Mat dt = dev(t).transpose();
  for (const Mat& r : basis.mats) {
    rot_t += r * tt * r;
    rot_dev += r * dt * r;
  }
  const double r1 = (t - t.trace() * Mat::identity(d) - rot_t).frobenius();
  const double r2 = (dev(t) - rot_dev).frobenius();
  return {r1, r2};
}

}  // namespace vstokes
