#pragma once
// Eigen scalar traits for binary128. Boost 1.74's multiprecision/eigen.hpp
// predates Eigen 3.4's infinity()/quiet_NaN() requirements.

#include <limits>

#include <Eigen/Core>

#include "linrec/precision.hpp"

namespace Eigen {

template <>
struct NumTraits<linrec::Quad> : GenericNumTraits<linrec::Quad> {
  using Real = linrec::Quad;
  using NonInteger = linrec::Quad;
  using Literal = linrec::Quad;
  using Nested = linrec::Quad;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 16,
    MulCost = 16
  };
  static inline Real epsilon() { return std::numeric_limits<Real>::epsilon(); }
  static inline Real dummy_precision() { return Real(1e-28); }
  static inline Real highest() { return (std::numeric_limits<Real>::max)(); }
  static inline Real lowest() { return std::numeric_limits<Real>::lowest(); }
  static inline int digits10() { return std::numeric_limits<Real>::digits10; }
  static inline Real infinity() { return std::numeric_limits<Real>::infinity(); }
  static inline Real quiet_NaN() { return std::numeric_limits<Real>::quiet_NaN(); }
};

}  // namespace Eigen
