#pragma once
// Dense and sparse linear algebra under the recovery and solver layers.
// Kernels that parallelise (Cholesky column updates, Jacobi SVD rounds) come
// in an OpenMP form and a serial reference form computing bit-identical
// results: each entry is accumulated in the same order either way.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "linrec/eigen_quad.hpp"
#include "linrec/precision.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace linrec {

template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  template <class U>
  Matrix<U> cast() const {
    Matrix<U> out(rows_, cols_);
    for (std::size_t k = 0; k < data_.size(); ++k) out.storage()[k] = static_cast<U>(data_[k]);
    return out;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <class T>
T dot(std::span<const T> a, std::span<const T> b) {
  T s(0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <class T>
std::vector<T> matvec(const Matrix<T>& a, std::span<const T> x) {
  std::vector<T> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot<T>(a.row(i), x);
  return y;
}

/// y = A^T x
template <class T>
std::vector<T> matvec_transposed(const Matrix<T>& a, std::span<const T> x) {
  std::vector<T> y(a.cols(), T(0));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += r[j] * x[i];
  }
  return y;
}

template <class T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: dimension mismatch");
  Matrix<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

template <class T>
T norm2(std::span<const T> v) {
  using std::sqrt;
  using boost::multiprecision::sqrt;
  return sqrt(dot<T>(v, v));
}

struct FactorizationReport {
  enum class Method { Spd, SpdJitter, Svd, SparseLu };
  Method method = Method::Spd;
  double jitter_used = 0.0;
  double condition_estimate = 1.0;
  std::size_t truncated_rank = 0;  // svd only
};

std::string method_name(FactorizationReport::Method m);

class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- Cholesky

/// In-place lower Cholesky factor, column by column; the row updates of each
/// column are independent. Returns false at the first non-positive pivot.
template <class T>
bool cholesky_serial(Matrix<T>& a);

/// OpenMP variant of cholesky_serial; identical results.
template <class T>
bool cholesky(Matrix<T>& a);

/// Symmetric positive-definite factorization with diagonal jitter fallback:
/// jitter 1e-12*trace/N, escalated x10 up to 1e-6*trace/N.
template <class T>
class SpdFactorization {
 public:
  SpdFactorization() = default;
  /// Throws NotPositiveDefinite when even the largest jitter fails.
  explicit SpdFactorization(const Matrix<T>& a, bool estimate_condition = true);

  std::size_t size() const { return lower_.rows(); }
  const FactorizationReport& report() const { return report_; }
  const Matrix<T>& lower() const { return lower_; }

  std::vector<T> solve(std::span<const T> b) const;
  Matrix<T> solve(const Matrix<T>& b) const;

 private:
  void forward(std::span<T> x) const;
  void backward(std::span<T> x) const;

  Matrix<T> lower_;
  FactorizationReport report_;
};

template <class T>
struct Solution {
  std::vector<T> x;
  FactorizationReport report;
};

template <class T>
struct MatrixSolution {
  Matrix<T> x;
  FactorizationReport report;
};

template <class T>
Solution<T> solve_spd(const Matrix<T>& a, std::span<const T> b) {
  SpdFactorization<T> f(a);
  return {f.solve(b), f.report()};
}

template <class T>
MatrixSolution<T> solve_spd(const Matrix<T>& a, const Matrix<T>& b) {
  SpdFactorization<T> f(a);
  return {f.solve(b), f.report()};
}

/// lambda_max / lambda_min of an SPD matrix from 20 power and 20 inverse
/// power iterations (the latter through the Cholesky factor).
template <class T>
double spd_condition_estimate(const Matrix<T>& a, const SpdFactorization<T>& f, int iterations = 20);

// ---------------------------------------------------------------- SVD

template <class T>
struct Svd {
  Matrix<T> u;                 // rows x k, k = min(rows, cols)
  std::vector<T> singular;     // descending
  Matrix<T> v;                 // cols x k
  int sweeps = 0;
};

/// One-sided (Hestenes) Jacobi SVD. Column pairs are visited in round-robin
/// rounds of disjoint pairs; the OpenMP variant rotates a round in parallel.
template <class T>
Svd<T> svd_jacobi(const Matrix<T>& a, bool parallel = true);

/// Minimum-norm least-squares solution of A x = b with singular values below
/// tol * sigma_max truncated.
template <class T>
Solution<T> pinv_apply(const Matrix<T>& a, double tol, std::span<const T> b);

template <class T>
MatrixSolution<T> pinv_apply(const Matrix<T>& a, double tol, const Matrix<T>& b);

/// Explicit pseudoinverse (cols x rows) with truncation.
template <class T>
MatrixSolution<T> pseudoinverse(const Matrix<T>& a, double tol);

// ---------------------------------------------------------------- sparse

template <class T>
using SparseMatrix = Eigen::SparseMatrix<T>;

template <class T>
struct Triplets {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Eigen::Triplet<T>> entries;

  void add(std::size_t i, std::size_t j, const T& v) {
    entries.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
  }
  SparseMatrix<T> build() const {
    SparseMatrix<T> m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    m.setFromTriplets(entries.begin(), entries.end());
    m.makeCompressed();
    return m;
  }
};

/// Sparse LU (Eigen SparseLU) of a square system.
template <class T>
class SparseSolver {
 public:
  /// Throws SingularSystem when the factorization fails.
  explicit SparseSolver(const SparseMatrix<T>& a, bool estimate_condition = true);

  std::vector<T> solve(std::span<const T> b) const;
  const FactorizationReport& report() const { return report_; }

 private:
  Eigen::SparseLU<SparseMatrix<T>> lu_;
  FactorizationReport report_;
};

template <class T>
Matrix<T> to_dense(const SparseMatrix<T>& s);

#define LINREC_LINALG_EXTERN(T)                                                        \
  extern template bool cholesky_serial<T>(Matrix<T>&);                                 \
  extern template bool cholesky<T>(Matrix<T>&);                                        \
  extern template class SpdFactorization<T>;                                           \
  extern template double spd_condition_estimate<T>(const Matrix<T>&,                   \
                                                   const SpdFactorization<T>&, int);  \
  extern template Svd<T> svd_jacobi<T>(const Matrix<T>&, bool);                        \
  extern template Solution<T> pinv_apply<T>(const Matrix<T>&, double, std::span<const T>); \
  extern template MatrixSolution<T> pinv_apply<T>(const Matrix<T>&, double, const Matrix<T>&); \
  extern template MatrixSolution<T> pseudoinverse<T>(const Matrix<T>&, double);       \
  extern template class SparseSolver<T>;                                               \
  extern template Matrix<T> to_dense<T>(const SparseMatrix<T>&);

LINREC_LINALG_EXTERN(double)
LINREC_LINALG_EXTERN(Quad)
#undef LINREC_LINALG_EXTERN

}  // namespace linrec
