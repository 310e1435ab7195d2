#pragma once
// Finite-difference Laplacians of the assembled 2-D radial function
// (x, y) -> g_nu(|(x, y)|), evaluated in binary128 with fourth-order
// central stencils so truncation, not rounding, dominates.

#include "linrec/precision.hpp"
#include "linrec/special.hpp"

namespace fd {

using linrec::Quad;

template <class F>
Quad laplacian(F&& f, Quad x, Quad y, Quad h) {
  auto axis = [&](Quad dx, Quad dy) {
    return (-f(x + 2 * dx, y + 2 * dy) + 16 * f(x + dx, y + dy) - 30 * f(x, y) + 16 * f(x - dx, y - dy) -
            f(x - 2 * dx, y - 2 * dy)) /
           (12 * h * h);
  };
  return axis(h, Quad(0)) + axis(Quad(0), h);
}

/// Delta^laplacians of g_nu(|.|) at distance r from the origin.
inline double laplacian_profile(int nu, int laplacians, double r, double step = 1e-3) {
  auto g = [nu](Quad x, Quad y) { return linrec::matern_g<Quad>(nu, boost::multiprecision::sqrt(x * x + y * y)); };
  const Quad h(step);
  if (laplacians == 0) return linrec::to_double(g(Quad(r), Quad(0)));
  if (laplacians == 1) return linrec::to_double(laplacian(g, Quad(r), Quad(0), h));
  auto lg = [&](Quad x, Quad y) { return laplacian(g, x, y, h); };
  return linrec::to_double(laplacian(lg, Quad(r), Quad(0), h));
}

}  // namespace fd
