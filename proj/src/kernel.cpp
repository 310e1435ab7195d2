#include "linrec/kernel.hpp"

#include <sstream>
#include <stdexcept>

namespace linrec {

void KernelSpec::validate() const {
  if (dimension <= 0 || dimension % 2 != 0)
    throw std::invalid_argument("KernelSpec: dimension must be even and positive (integer Bessel orders)");
  if (2 * sobolev_order <= dimension)
    throw std::invalid_argument("KernelSpec: Sobolev order must exceed d/2");
  if (!(scale > 0)) throw std::invalid_argument("KernelSpec: scale must be positive");
  if (singular_floor < 0) throw std::invalid_argument("KernelSpec: singular floor must be non-negative");
}

std::string describe(const Functional& f) {
  std::ostringstream os;
  os << (f.kind == FunctionalKind::PointEvaluation ? "delta" : "-Laplace") << "(" << f.point.x << ", "
     << f.point.y << ")";
  return os.str();
}

namespace {

// Rethrows the first exception raised inside an OpenMP loop.
class FirstError {
 public:
  void capture() {
    std::lock_guard lock(mutex_);
    if (!error_) error_ = std::current_exception();
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr error_;
};

}  // namespace

template <class T>
Matrix<T> gram_matrix(const KernelSpec& spec, std::span<const Functional> fs) {
  spec.validate();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(fs.size());
  Matrix<T> g(fs.size(), fs.size());
  FirstError error;
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      for (std::ptrdiff_t j = i; j < n; ++j) g(i, j) = apply_pair<T>(spec, fs[i], fs[j]);
    } catch (...) {
      error.capture();
    }
  }
  error.rethrow();
  for (std::ptrdiff_t i = 0; i < n; ++i)
    for (std::ptrdiff_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

template <class T>
Matrix<T> gram_matrix_serial(const KernelSpec& spec, std::span<const Functional> fs) {
  spec.validate();
  const std::size_t n = fs.size();
  Matrix<T> g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) g(i, j) = g(j, i) = apply_pair<T>(spec, fs[i], fs[j]);
  return g;
}

template <class T>
Matrix<T> cross_matrix(const KernelSpec& spec, std::span<const Functional> rows, std::span<const Functional> cols) {
  spec.validate();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(rows.size());
  Matrix<T> m(rows.size(), cols.size());
  FirstError error;
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      for (std::size_t j = 0; j < cols.size(); ++j) m(i, j) = apply_pair<T>(spec, rows[i], cols[j]);
    } catch (...) {
      error.capture();
    }
  }
  error.rethrow();
  return m;
}

#define LINREC_KERNEL_INSTANTIATE(T)                                                        \
  template Matrix<T> gram_matrix<T>(const KernelSpec&, std::span<const Functional>);        \
  template Matrix<T> gram_matrix_serial<T>(const KernelSpec&, std::span<const Functional>); \
  template Matrix<T> cross_matrix<T>(const KernelSpec&, std::span<const Functional>, std::span<const Functional>);

LINREC_KERNEL_INSTANTIATE(double)
LINREC_KERNEL_INSTANTIATE(Quad)

}  // namespace linrec
