#pragma once
// Sobolev/Matern kernel under the action of data functionals: point
// evaluation delta_p and -Laplacian at p. lambda^x mu^y K(x,y) depends only on
// |x - y| and the total Laplacian count, with sign (-1)^count.

#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "linrec/geometry.hpp"
#include "linrec/linalg.hpp"
#include "linrec/special.hpp"

namespace linrec {

/// Sobolev space W_2^m(R^d) with its Matern kernel at the given scale.
struct KernelSpec {
  int sobolev_order = 7;
  int dimension = 2;
  double scale = 1.0;
  /// Radius at which otherwise divergent profiles (order too low for the
  /// requested Laplacians) are evaluated. 0 means throw OrderTooLow.
  double singular_floor = 0.0;

  int nu() const { return sobolev_order - dimension / 2; }
  /// Throws std::invalid_argument unless m > d/2, d even, scale > 0.
  void validate() const;
  bool admits(int laplacians) const { return profile_admissible(nu(), laplacians); }
  /// The floor only matters when some needed profile is inadmissible.
  double effective_floor() const { return admits(2) ? 0.0 : singular_floor; }

  friend bool operator==(const KernelSpec& a, const KernelSpec& b) {
    return a.sobolev_order == b.sobolev_order && a.dimension == b.dimension && a.scale == b.scale &&
           a.effective_floor() == b.effective_floor();
  }
};

enum class FunctionalKind : std::uint8_t { PointEvaluation, OperatorAtPoint };
enum class DifferentialOperator : std::uint8_t { MinusLaplacian };

/// A data functional: u -> u(p) or u -> (L u)(p).
struct Functional {
  FunctionalKind kind = FunctionalKind::PointEvaluation;
  DifferentialOperator op = DifferentialOperator::MinusLaplacian;
  Point point;

  static Functional evaluation(Point p) { return {FunctionalKind::PointEvaluation, DifferentialOperator::MinusLaplacian, p}; }
  static Functional minus_laplacian(Point p) { return {FunctionalKind::OperatorAtPoint, DifferentialOperator::MinusLaplacian, p}; }

  int laplacians() const { return kind == FunctionalKind::OperatorAtPoint ? 1 : 0; }
  int sign() const { return kind == FunctionalKind::OperatorAtPoint ? -1 : 1; }

  friend bool operator==(const Functional&, const Functional&) = default;
  friend auto operator<=>(const Functional&, const Functional&) = default;
};

std::string describe(const Functional& f);

/// lambda^x mu^y K(x,y). Symmetric in (a, b).
template <class T>
T apply_pair(const KernelSpec& spec, const Functional& a, const Functional& b) {
  using std::sqrt;
  using boost::multiprecision::sqrt;
  const int laplacians = a.laplacians() + b.laplacians();
  const T dx = T(a.point.x) - T(b.point.x);
  const T dy = T(a.point.y) - T(b.point.y);
  const T scale(spec.scale);
  const T r = sqrt(dx * dx + dy * dy) / scale;
  const T profile = matern_laplacian_profile<T>(spec.nu(), spec.dimension, laplacians, r, spec.effective_floor());
  T value = matern_normalization<T>(spec.sobolev_order) * profile;
  if (laplacians > 0) value /= ipow(scale * scale, laplacians);
  return (a.sign() * b.sign() < 0) ? -value : value;
}

/// K(x, x) = ||delta_x||^2 in the dual space.
template <class T>
T kernel_diagonal(const KernelSpec& spec) {
  return matern_normalization<T>(spec.sobolev_order) * matern_g<T>(spec.nu(), T(0));
}

/// Symmetric Gram matrix G_ij = lambda_i^x lambda_j^y K(x,y); rows assembled
/// in parallel. Entry values do not depend on the schedule.
template <class T>
Matrix<T> gram_matrix(const KernelSpec& spec, std::span<const Functional> fs);

/// Serial reference for gram_matrix.
template <class T>
Matrix<T> gram_matrix_serial(const KernelSpec& spec, std::span<const Functional> fs);

/// M_ij = rows_i^x cols_j^y K(x,y); parallel over rows.
template <class T>
Matrix<T> cross_matrix(const KernelSpec& spec, std::span<const Functional> rows, std::span<const Functional> cols);

/// v_i = lambda_i^z K(x, z).
template <class T>
std::vector<T> cross_vector(const KernelSpec& spec, Point x, std::span<const Functional> fs) {
  std::vector<T> v(fs.size());
  const Functional dx = Functional::evaluation(x);
  for (std::size_t i = 0; i < fs.size(); ++i) v[i] = apply_pair<T>(spec, dx, fs[i]);
  return v;
}

#define LINREC_KERNEL_EXTERN(T)                                                                    \
  extern template Matrix<T> gram_matrix<T>(const KernelSpec&, std::span<const Functional>);        \
  extern template Matrix<T> gram_matrix_serial<T>(const KernelSpec&, std::span<const Functional>); \
  extern template Matrix<T> cross_matrix<T>(const KernelSpec&, std::span<const Functional>,       \
                                            std::span<const Functional>);

LINREC_KERNEL_EXTERN(double)
LINREC_KERNEL_EXTERN(Quad)
#undef LINREC_KERNEL_EXTERN

}  // namespace linrec
