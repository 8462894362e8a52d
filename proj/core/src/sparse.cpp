#include "vstokes/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "vstokes/error.hpp"

namespace vstokes {

namespace {

int g_threads = 1;

template <class F>
void parallel_rows(int rows, F&& body) {
  const int nt = std::min(g_threads, std::max(1, rows / 4096));
  if (nt <= 1) {
    body(0, rows);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    const int b = static_cast<int>(static_cast<long long>(rows) * t / nt);
    const int e = static_cast<int>(static_cast<long long>(rows) * (t + 1) / nt);
    pool.emplace_back([&body, b, e] { body(b, e); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

void set_num_threads(int n) {
  if (n < 1) throw InvalidArgument("thread count must be positive");
  g_threads = n;
}

int num_threads() { return g_threads; }

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  parallel_rows(rows, [&](int b, int e) {
    for (int i = b; i < e; ++i) {
      double s = 0.0;
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += values[k] * x[col_idx[k]];
      y[i] = s;
    }
  });
}

void CsrMatrix::multiply_add(double alpha, std::span<const double> x, std::span<double> y) const {
  parallel_rows(rows, [&](int b, int e) {
    for (int i = b; i < e; ++i) {
      double s = 0.0;
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += values[k] * x[col_idx[k]];
      y[i] += alpha * s;
    }
  });
}

int CsrMatrix::find(int i, int j) const {
  const auto b = col_idx.begin() + row_ptr[i], e = col_idx.begin() + row_ptr[i + 1];
  const auto it = std::lower_bound(b, e, j);
  if (it == e || *it != j) return -1;
  return static_cast<int>(it - col_idx.begin());
}

double CsrMatrix::at(int i, int j) const {
  const int k = find(i, j);
  return k < 0 ? 0.0 : values[k];
}

CsrMatrix CsrMatrix::transpose() const {
  CsrMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(cols + 1, 0);
  for (int j : col_idx) ++t.row_ptr[j + 1];
  for (int i = 0; i < cols; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  t.col_idx.resize(col_idx.size());
  t.values.resize(values.size());
  std::vector<int> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      const int p = next[col_idx[k]]++;
      t.col_idx[p] = i;
      t.values[p] = values[k];
    }
  return t;
}

Eigen::SparseMatrix<double> CsrMatrix::to_eigen() const {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(values.size());
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) trip.emplace_back(i, col_idx[k], values[k]);
  Eigen::SparseMatrix<double> m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) m(i, col_idx[k]) += values[k];
  return m;
}

CsrMatrix CsrMatrix::from_triplets(int rows, int cols, std::vector<Triplet> trip) {
  std::sort(trip.begin(), trip.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  for (size_t k = 0; k < trip.size();) {
    const auto& t = trip[k];
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) throw InvalidArgument("triplet out of range");
    double v = 0.0;
    size_t j = k;
    while (j < trip.size() && trip[j].row == t.row && trip[j].col == t.col) v += trip[j++].value;
    m.col_idx.push_back(t.col);
    m.values.push_back(v);
    ++m.row_ptr[t.row + 1];
    k = j;
  }
  for (int i = 0; i < rows; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
  return m;
}

CsrMatrix CsrMatrix::from_pattern(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx) {
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr = std::move(row_ptr);
  m.col_idx = std::move(col_idx);
  m.values.assign(m.col_idx.size(), 0.0);
  return m;
}

CsrMatrix CsrMatrix::pruned(double tol) const {
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  for (int i = 0; i < rows; ++i) {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      if (std::abs(values[k]) > tol) {
        m.col_idx.push_back(col_idx[k]);
        m.values.push_back(values[k]);
      }
    m.row_ptr[i + 1] = static_cast<int>(m.values.size());
  }
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace vstokes
