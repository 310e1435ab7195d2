#pragma once

#include <boost/multiprecision/float128.hpp>

#include <cmath>
#include <string_view>
#include <type_traits>

namespace linrec {

/// IEEE binary128 via libquadmath. Gram systems of the finer disk cases at
/// Sobolev orders 6-7 are too ill-conditioned for double.
using Quad = boost::multiprecision::float128;

enum class Precision { Double, Quad };

template <class T>
inline double to_double(const T& v) {
  return static_cast<double>(v);
}

/// Integer power by repeated squaring; negative exponents give reciprocals.
template <class T>
T ipow(T base, int n) {
  if (n < 0) return T(1) / ipow(base, -n);
  T result(1);
  while (n > 0) {
    if (n & 1) result *= base;
    base *= base;
    n >>= 1;
  }
  return result;
}

template <class T>
bool is_finite(const T& v) {
  using std::isfinite;
  using boost::multiprecision::isfinite;
  return isfinite(v);
}

Precision parse_precision(std::string_view name);
std::string_view precision_name(Precision p);

}  // namespace linrec
