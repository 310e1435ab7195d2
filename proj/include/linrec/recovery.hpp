#pragma once
// Direct linear recovery u~(x) = sum_i c_i lambda_i(u) and its worst-case
// error ||delta_x - sum_i c_i lambda_i||_{H*} in a Sobolev space.

#include <cmath>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "linrec/kernel.hpp"
#include "linrec/linalg.hpp"

namespace linrec {

/// Weights for one evaluation point. Functional order: PDE functionals
/// first, then boundary functionals.
template <class T>
struct RecoveryRow {
  Point eval_point;
  std::vector<Functional> functionals;
  std::vector<T> weights;

  /// Throws std::invalid_argument on length mismatch or non-finite weights.
  void validate() const {
    if (weights.size() != functionals.size())
      throw std::invalid_argument("RecoveryRow: weights and functionals differ in length");
    for (const auto& w : weights)
      if (!is_finite(w)) throw std::invalid_argument("RecoveryRow: non-finite weight");
  }

  template <class U>
  RecoveryRow<U> cast() const {
    RecoveryRow<U> out{eval_point, functionals, {}};
    out.weights.reserve(weights.size());
    for (const auto& w : weights) out.weights.push_back(static_cast<U>(w));
    return out;
  }
};

/// One cell of a results table.
struct ErrorReport {
  std::string method;
  std::string case_name;
  int eval_order = 0;
  double norm = std::nan("");
  double condition = std::nan("");
  double jitter = 0.0;
  double raw_square = std::nan("");  // quadratic form before clamping
  std::string reason;                // empty unless the cell failed
};

/// Columns: method,case,eval_order,norm,condition,jitter,raw_square,reason.
void write_reports_csv(std::ostream& out, std::span<const ErrorReport> reports);
std::vector<ErrorReport> read_reports_csv(std::istream& in);
/// Scientific notation, 6 significant digits; "nan" for NaN.
std::string format_sci(double v);

template <class T>
struct QuadraticForm {
  T diagonal;  // K(x,x)
  T cross;     // c^T b
  T gram;      // c^T G c
  T raw() const { return diagonal - 2 * cross + gram; }
};

/// Terms of ||eps_{x,c}||^2 given a precomputed Gram matrix of the row's
/// functionals. Row partial sums run in parallel, combined in fixed order.
template <class T>
QuadraticForm<T> error_quadratic_form(const KernelSpec& spec, const RecoveryRow<T>& row, const Matrix<T>& gram);

template <class T>
T clamp_sqrt(const T& square) {
  using std::sqrt;
  using boost::multiprecision::sqrt;
  return square > 0 ? sqrt(square) : T(0);
}

/// ||eps_{x,c}||_{H*}, negative rounding residue clamped to 0.
template <class T>
T error_norm(const KernelSpec& spec, const RecoveryRow<T>& row, const Matrix<T>& gram) {
  return clamp_sqrt(error_quadratic_form(spec, row, gram).raw());
}

template <class T>
T error_norm(const KernelSpec& spec, const RecoveryRow<T>& row) {
  const Matrix<T> gram = gram_matrix<T>(spec, row.functionals);
  return error_norm(spec, row, gram);
}

/// Optimal recovery through one SPD factorization of the Gram matrix; rows at
/// many points reuse it.
template <class T>
class OptimalRecoverer {
 public:
  /// Throws NotPositiveDefinite for duplicated or near-duplicate functionals.
  OptimalRecoverer(const KernelSpec& spec, std::vector<Functional> fs, const Matrix<T>& gram);
  OptimalRecoverer(const KernelSpec& spec, std::vector<Functional> fs);

  RecoveryRow<T> row_at(Point x) const;
  const FactorizationReport& report() const { return factor_.report(); }
  const std::vector<Functional>& functionals() const { return fs_; }

 private:
  KernelSpec spec_;
  std::vector<Functional> fs_;
  SpdFactorization<T> factor_;
};

/// Weights c* solving G c* = (lambda_i^z K(x,z))_i.
template <class T>
RecoveryRow<T> optimal_recovery(const KernelSpec& spec, Point x, std::span<const Functional> fs,
                                FactorizationReport* report = nullptr) {
  OptimalRecoverer<T> rec(spec, std::vector<Functional>(fs.begin(), fs.end()));
  if (report) *report = rec.report();
  return rec.row_at(x);
}

/// sqrt(K(x,x) - c*^T b): the minimal value without the Gram matrix.
template <class T>
T optimal_norm_direct(const KernelSpec& spec, Point x, std::span<const Functional> fs, std::span<const T> c_star) {
  if (c_star.size() != fs.size()) throw std::invalid_argument("optimal_norm_direct: size mismatch");
  const auto b = cross_vector<T>(spec, x, fs);
  return clamp_sqrt(kernel_diagonal<T>(spec) - dot<T>(c_star, b));
}

/// max_{i,k} |lambda_i(c_k) - delta_ik| for point-evaluation functionals,
/// where rows[i] is the optimal row at functional i's own point.
template <class T>
double lagrange_check(const KernelSpec& spec, std::span<const Functional> fs, std::span<const RecoveryRow<T>> rows);

/// Optimal rows at each functional's own point (one shared factorization).
template <class T>
std::vector<RecoveryRow<T>> lagrange_rows(const KernelSpec& spec, std::span<const Functional> fs);

/// Read-mostly cache of Gram matrices keyed by (kernel, functional set).
template <class T>
class GramCache {
 public:
  std::shared_ptr<const Matrix<T>> get(const KernelSpec& spec, const std::vector<Functional>& fs);
  std::size_t size() const;
  void clear();

 private:
  using Key = std::tuple<int, int, double, double, std::vector<Functional>>;
  mutable std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const Matrix<T>>> entries_;
};

#define LINREC_RECOVERY_EXTERN(T)                                                                           \
  extern template QuadraticForm<T> error_quadratic_form<T>(const KernelSpec&, const RecoveryRow<T>&,        \
                                                           const Matrix<T>&);                               \
  extern template class OptimalRecoverer<T>;                                                                \
  extern template double lagrange_check<T>(const KernelSpec&, std::span<const Functional>,                  \
                                           std::span<const RecoveryRow<T>>);                                \
  extern template std::vector<RecoveryRow<T>> lagrange_rows<T>(const KernelSpec&, std::span<const Functional>); \
  extern template class GramCache<T>;

LINREC_RECOVERY_EXTERN(double)
LINREC_RECOVERY_EXTERN(Quad)
#undef LINREC_RECOVERY_EXTERN

}  // namespace linrec
