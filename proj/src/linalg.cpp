#include "linrec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

namespace linrec {

namespace {

template <class T>
T sqrt_of(const T& v) {
  using std::sqrt;
  using boost::multiprecision::sqrt;
  return sqrt(v);
}

template <class T>
T abs_of(const T& v) {
  using std::abs;
  using boost::multiprecision::abs;
  return abs(v);
}

double finite_or_max(double v) {
  if (!std::isfinite(v) || v > std::numeric_limits<double>::max()) return std::numeric_limits<double>::max();
  return std::max(v, 1.0);
}

// Column j of the left-looking factorization for rows [j+1, n).
template <class T>
void cholesky_column_row(Matrix<T>& a, std::size_t i, std::size_t j, const T& pivot) {
  T s = a(i, j);
  const auto ri = a.row(i);
  const auto rj = a.row(j);
  for (std::size_t k = 0; k < j; ++k) s -= ri[k] * rj[k];
  a(i, j) = s / pivot;
}

// A pivot at rounding level of its diagonal entry counts as breakdown.
template <class T>
bool cholesky_pivot(Matrix<T>& a, std::size_t j, T& pivot) {
  T d = a(j, j);
  const auto rj = a.row(j);
  for (std::size_t k = 0; k < j; ++k) d -= rj[k] * rj[k];
  const T floor = a(j, j) * std::numeric_limits<T>::epsilon() * T(static_cast<double>(a.rows()));
  if (!(d > floor)) return false;
  pivot = sqrt_of(d);
  a(j, j) = pivot;
  return true;
}

template <class T>
void clear_upper(Matrix<T>& a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) a(i, j) = T(0);
}

}  // namespace

std::string method_name(FactorizationReport::Method m) {
  switch (m) {
    case FactorizationReport::Method::Spd: return "spd";
    case FactorizationReport::Method::SpdJitter: return "spd+jitter";
    case FactorizationReport::Method::Svd: return "svd";
    case FactorizationReport::Method::SparseLu: return "sparse-lu";
  }
  return "unknown";
}

template <class T>
bool cholesky_serial(Matrix<T>& a) {
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    T pivot;
    if (!cholesky_pivot(a, j, pivot)) return false;
    for (std::size_t i = j + 1; i < n; ++i) cholesky_column_row(a, i, j, pivot);
  }
  clear_upper(a);
  return true;
}

template <class T>
bool cholesky(Matrix<T>& a) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.rows());
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    T pivot;
    if (!cholesky_pivot(a, static_cast<std::size_t>(j), pivot)) return false;
#pragma omp parallel for schedule(static) if (n - j > 64)
    for (std::ptrdiff_t i = j + 1; i < n; ++i)
      cholesky_column_row(a, static_cast<std::size_t>(i), static_cast<std::size_t>(j), pivot);
  }
  clear_upper(a);
  return true;
}

template <class T>
SpdFactorization<T>::SpdFactorization(const Matrix<T>& a, bool estimate_condition) {
  if (a.rows() != a.cols()) throw std::invalid_argument("SpdFactorization: matrix must be square");
  const std::size_t n = a.rows();
  lower_ = a;
  Matrix<T> factored = a;
  if (cholesky(lower_)) {
    report_.method = FactorizationReport::Method::Spd;
  } else {
    T mean_diag(0);
    for (std::size_t i = 0; i < n; ++i) mean_diag += a(i, i);
    mean_diag /= T(static_cast<double>(n));
    bool ok = false;
    for (int exponent = -12; exponent <= -6 && !ok; ++exponent) {
      const T jitter = mean_diag * T(std::pow(10.0, exponent));
      factored = a;
      for (std::size_t i = 0; i < n; ++i) factored(i, i) += jitter;
      lower_ = factored;
      if (cholesky(lower_)) {
        ok = true;
        report_.method = FactorizationReport::Method::SpdJitter;
        report_.jitter_used = to_double(jitter);
      }
    }
    if (!ok)
      throw NotPositiveDefinite("matrix is not positive definite even with jitter 1e-6*trace/N (" +
                                std::to_string(n) + "x" + std::to_string(n) + ")");
  }
  if (estimate_condition && n > 0) report_.condition_estimate = spd_condition_estimate(factored, *this);
}

template <class T>
void SpdFactorization<T>::forward(std::span<T> x) const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto ri = lower_.row(i);
    T s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= ri[k] * x[k];
    x[i] = s / ri[i];
  }
}

template <class T>
void SpdFactorization<T>::backward(std::span<T> x) const {
  const std::size_t n = size();
  for (std::size_t ii = n; ii-- > 0;) {
    const auto ri = lower_.row(ii);
    x[ii] /= ri[ii];
    const T xi = x[ii];
    for (std::size_t k = 0; k < ii; ++k) x[k] -= ri[k] * xi;
  }
}

template <class T>
std::vector<T> SpdFactorization<T>::solve(std::span<const T> b) const {
  if (b.size() != size()) throw std::invalid_argument("SpdFactorization::solve: size mismatch");
  std::vector<T> x(b.begin(), b.end());
  forward(x);
  backward(x);
  return x;
}

template <class T>
Matrix<T> SpdFactorization<T>::solve(const Matrix<T>& b) const {
  if (b.rows() != size()) throw std::invalid_argument("SpdFactorization::solve: size mismatch");
  Matrix<T> x(b.rows(), b.cols());
  std::vector<T> col(b.rows());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < b.rows(); ++i) col[i] = b(i, j);
    forward(col);
    backward(col);
    for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = col[i];
  }
  return x;
}

template <class T>
double spd_condition_estimate(const Matrix<T>& a, const SpdFactorization<T>& f, int iterations) {
  const std::size_t n = a.rows();
  if (n == 0) return 1.0;
  std::vector<T> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = T(1.0 + static_cast<double>(i) / static_cast<double>(n));
  auto normalize = [](std::vector<T>& x) {
    const T nrm = norm2<T>(x);
    for (auto& e : x) e /= nrm;
  };
  normalize(v);
  T lambda_max(0);
  std::vector<T> w = v;
  for (int it = 0; it < iterations; ++it) {
    w = matvec<T>(a, v);
    lambda_max = dot<T>(v, w);
    v = w;
    normalize(v);
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = T(1.0 + static_cast<double>(i % 7) / 7.0);
  normalize(v);
  T inv_lambda_min(0);
  for (int it = 0; it < iterations; ++it) {
    w = f.solve(v);
    inv_lambda_min = dot<T>(v, w);
    v = w;
    normalize(v);
  }
  return finite_or_max(to_double(lambda_max * inv_lambda_min));
}

// ---------------------------------------------------------------- SVD

namespace {

// Round-robin schedule: n_even-1 rounds of n_even/2 disjoint pairs.
std::vector<std::vector<std::pair<std::size_t, std::size_t>>> tournament(std::size_t n) {
  const std::size_t m = n + (n % 2);
  std::vector<std::size_t> players(m);
  std::iota(players.begin(), players.end(), 0);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> rounds;
  if (m < 2) return rounds;
  for (std::size_t r = 0; r + 1 < m; ++r) {
    std::vector<std::pair<std::size_t, std::size_t>> round;
    for (std::size_t k = 0; k < m / 2; ++k) {
      std::size_t p = players[k], q = players[m - 1 - k];
      if (p >= n || q >= n) continue;
      if (p > q) std::swap(p, q);
      round.emplace_back(p, q);
    }
    rounds.push_back(std::move(round));
    std::rotate(players.begin() + 1, players.end() - 1, players.end());
  }
  return rounds;
}

// Rotates columns p, q of the working set (stored as rows of w) and of v.
template <class T>
bool jacobi_rotate(Matrix<T>& w, Matrix<T>& vt, std::size_t p, std::size_t q, const T& tol) {
  const auto wp = w.row(p);
  const auto wq = w.row(q);
  T alpha(0), beta(0), gamma(0);
  for (std::size_t i = 0; i < wp.size(); ++i) {
    alpha += wp[i] * wp[i];
    beta += wq[i] * wq[i];
    gamma += wp[i] * wq[i];
  }
  if (alpha == 0 || beta == 0) return false;
  if (!(abs_of(gamma) > tol * sqrt_of(alpha * beta))) return false;
  const T zeta = (beta - alpha) / (2 * gamma);
  const T t = (zeta >= 0 ? T(1) : T(-1)) / (abs_of(zeta) + sqrt_of(T(1) + zeta * zeta));
  const T c = T(1) / sqrt_of(T(1) + t * t);
  const T s = c * t;
  for (std::size_t i = 0; i < wp.size(); ++i) {
    const T a = wp[i], b = wq[i];
    wp[i] = c * a - s * b;
    wq[i] = s * a + c * b;
  }
  const auto vp = vt.row(p);
  const auto vq = vt.row(q);
  for (std::size_t i = 0; i < vp.size(); ++i) {
    const T a = vp[i], b = vq[i];
    vp[i] = c * a - s * b;
    vq[i] = s * a + c * b;
  }
  return true;
}

}  // namespace

template <class T>
Svd<T> svd_jacobi(const Matrix<T>& a, bool parallel) {
  if (a.rows() < a.cols()) {
    Svd<T> t = svd_jacobi(a.transpose(), parallel);
    std::swap(t.u, t.v);
    return t;
  }
  const std::size_t n = a.cols();
  Matrix<T> w = a.transpose();  // row j = column j of A
  Matrix<T> vt = Matrix<T>::identity(n);
  const T tol = std::numeric_limits<T>::epsilon() * T(static_cast<double>(std::max<std::size_t>(a.rows(), 1)));
  const auto rounds = tournament(n);
  Svd<T> out;
  for (int sweep = 0; sweep < 80; ++sweep) {
    long rotations = 0;
    for (const auto& round : rounds) {
      const std::ptrdiff_t np = static_cast<std::ptrdiff_t>(round.size());
      if (parallel) {
#pragma omp parallel for schedule(static) reduction(+ : rotations) if (np > 8)
        for (std::ptrdiff_t k = 0; k < np; ++k)
          rotations += jacobi_rotate(w, vt, round[k].first, round[k].second, tol) ? 1 : 0;
      } else {
        for (std::ptrdiff_t k = 0; k < np; ++k)
          rotations += jacobi_rotate(w, vt, round[k].first, round[k].second, tol) ? 1 : 0;
      }
    }
    out.sweeps = sweep + 1;
    if (rotations == 0) break;
  }
  std::vector<T> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2<T>(w.row(j));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  out.u = Matrix<T>(a.rows(), n);
  out.v = Matrix<T>(n, n);
  out.singular.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.singular[k] = sigma[j];
    for (std::size_t i = 0; i < a.rows(); ++i) out.u(i, k) = sigma[j] > 0 ? w(j, i) / sigma[j] : T(0);
    for (std::size_t i = 0; i < n; ++i) out.v(i, k) = vt(j, i);
  }
  return out;
}

namespace {

template <class T>
std::size_t kept_rank(const std::vector<T>& singular, double tol) {
  if (singular.empty() || !(singular.front() > 0)) return 0;
  const T cut = T(tol) * singular.front();
  std::size_t r = 0;
  while (r < singular.size() && singular[r] > cut) ++r;
  return r;
}

template <class T>
FactorizationReport svd_report(const Svd<T>& s, std::size_t rank) {
  FactorizationReport rep;
  rep.method = FactorizationReport::Method::Svd;
  rep.truncated_rank = rank;
  if (!s.singular.empty()) {
    const T smin = s.singular.back();
    rep.condition_estimate =
        smin > 0 ? finite_or_max(to_double(s.singular.front() / smin)) : std::numeric_limits<double>::max();
  }
  return rep;
}

}  // namespace

template <class T>
Solution<T> pinv_apply(const Matrix<T>& a, double tol, std::span<const T> b) {
  if (!(tol > 0)) throw std::invalid_argument("pinv_apply: tolerance must be positive");
  if (b.size() != a.rows()) throw std::invalid_argument("pinv_apply: size mismatch");
  const Svd<T> s = svd_jacobi(a);
  const std::size_t rank = kept_rank(s.singular, tol);
  std::vector<T> x(a.cols(), T(0));
  for (std::size_t k = 0; k < rank; ++k) {
    T coeff(0);
    for (std::size_t i = 0; i < a.rows(); ++i) coeff += s.u(i, k) * b[i];
    coeff /= s.singular[k];
    for (std::size_t i = 0; i < a.cols(); ++i) x[i] += s.v(i, k) * coeff;
  }
  return {std::move(x), svd_report(s, rank)};
}

template <class T>
MatrixSolution<T> pseudoinverse(const Matrix<T>& a, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("pseudoinverse: tolerance must be positive");
  const Svd<T> s = svd_jacobi(a);
  const std::size_t rank = kept_rank(s.singular, tol);
  Matrix<T> p(a.cols(), a.rows());
  for (std::size_t k = 0; k < rank; ++k) {
    const T inv = T(1) / s.singular[k];
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const T vik = s.v(i, k) * inv;
      for (std::size_t j = 0; j < a.rows(); ++j) p(i, j) += vik * s.u(j, k);
    }
  }
  return {std::move(p), svd_report(s, rank)};
}

template <class T>
MatrixSolution<T> pinv_apply(const Matrix<T>& a, double tol, const Matrix<T>& b) {
  if (b.rows() != a.rows()) throw std::invalid_argument("pinv_apply: size mismatch");
  auto p = pseudoinverse(a, tol);
  return {matmul(p.x, b), p.report};
}

// ---------------------------------------------------------------- sparse

template <class T>
SparseSolver<T>::SparseSolver(const SparseMatrix<T>& a, bool estimate_condition) {
  if (a.rows() != a.cols()) throw std::invalid_argument("SparseSolver: matrix must be square");
  report_.method = FactorizationReport::Method::SparseLu;
  if (a.rows() == 0) return;
  lu_.analyzePattern(a);
  lu_.factorize(a);
  if (lu_.info() != Eigen::Success) throw SingularSystem("sparse LU failed: " + lu_.lastErrorMessage());
  if (!estimate_condition) return;

  // sigma_max^2 of A^T A by power iteration, 1/sigma_min^2 via A^{-1} A^{-T}
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  const Eigen::Index n = a.rows();
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = T(1.0 + static_cast<double>(i) / static_cast<double>(n));
  v /= v.norm();
  T smax2(0);
  for (int it = 0; it < 20; ++it) {
    Vec w = a.transpose() * (a * v);
    smax2 = v.dot(w);
    v = w / w.norm();
  }
  for (Eigen::Index i = 0; i < n; ++i) v(i) = T(1.0 + static_cast<double>(i % 7) / 7.0);
  v /= v.norm();
  T inv_smin2(0);
  for (int it = 0; it < 20; ++it) {
    Vec y = lu_.transpose().solve(v);
    Vec w = lu_.solve(y);
    inv_smin2 = v.dot(w);
    v = w / w.norm();
  }
  report_.condition_estimate = finite_or_max(std::sqrt(to_double(smax2 * inv_smin2)));
}

template <class T>
std::vector<T> SparseSolver<T>::solve(std::span<const T> b) const {
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  Vec rhs(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) rhs(static_cast<Eigen::Index>(i)) = b[i];
  if (b.empty()) return {};
  Vec x = const_cast<Eigen::SparseLU<SparseMatrix<T>>&>(lu_).solve(rhs);
  return std::vector<T>(x.data(), x.data() + x.size());
}

template <class T>
Matrix<T> to_dense(const SparseMatrix<T>& s) {
  Matrix<T> d(static_cast<std::size_t>(s.rows()), static_cast<std::size_t>(s.cols()));
  for (int k = 0; k < s.outerSize(); ++k)
    for (typename SparseMatrix<T>::InnerIterator it(s, k); it; ++it)
      d(static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col())) = it.value();
  return d;
}

#define LINREC_LINALG_INSTANTIATE(T)                                                      \
  template bool cholesky_serial<T>(Matrix<T>&);                                           \
  template bool cholesky<T>(Matrix<T>&);                                                  \
  template class SpdFactorization<T>;                                                     \
  template double spd_condition_estimate<T>(const Matrix<T>&, const SpdFactorization<T>&, int); \
  template Svd<T> svd_jacobi<T>(const Matrix<T>&, bool);                                  \
  template Solution<T> pinv_apply<T>(const Matrix<T>&, double, std::span<const T>);       \
  template MatrixSolution<T> pinv_apply<T>(const Matrix<T>&, double, const Matrix<T>&);   \
  template MatrixSolution<T> pseudoinverse<T>(const Matrix<T>&, double);                  \
  template class SparseSolver<T>;                                                         \
  template Matrix<T> to_dense<T>(const SparseMatrix<T>&);

LINREC_LINALG_INSTANTIATE(double)
LINREC_LINALG_INSTANTIATE(Quad)

}  // namespace linrec
