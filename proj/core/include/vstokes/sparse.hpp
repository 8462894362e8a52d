#pragma once

// Compressed-row sparse storage and the handful of kernels the solver needs.

#include <span>
#include <vector>

#include <Eigen/Sparse>

namespace vstokes {

using Vector = std::vector<double>;

struct Triplet {
  int row;
  int col;
  double value;
};

/// Row-major compressed sparse matrix with sorted column indices.
struct CsrMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr{0};
  std::vector<int> col_idx;
  std::vector<double> values;

  int nnz() const { return static_cast<int>(values.size()); }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  /// y += alpha A x
  void multiply_add(double alpha, std::span<const double> x, std::span<double> y) const;
  /// Entry (i, j), zero when not stored.
  double at(int i, int j) const;
  /// Position of (i, j) in values, or -1.
  int find(int i, int j) const;
  double diagonal(int i) const { return at(i, i); }

  CsrMatrix transpose() const;
  Eigen::SparseMatrix<double> to_eigen() const;
  Eigen::MatrixXd to_dense() const;

  /// Sums duplicate entries; keeps explicit zeros.
  static CsrMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets);
  /// Empty matrix with a fixed pattern; values start at zero.
  static CsrMatrix from_pattern(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx);
  /// Drops entries with |a_ij| <= tol.
  CsrMatrix pruned(double tol) const;
};

/// Thread count used by row-parallel kernels (default 1). Results do not
/// depend on the setting since rows are computed independently.
void set_num_threads(int n);
int num_threads();

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace vstokes
