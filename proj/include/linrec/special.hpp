#pragma once
// Modified Bessel functions of the second kind and the radial Matern profile
// g_nu(r) = r^nu K_nu(r), including the closed-form index reduction used
// when a Laplacian acts on one or both kernel arguments.

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "linrec/precision.hpp"

namespace linrec {

/// Raised when a Sobolev order is too low for the requested derivative
/// functionals (the kernel profile is singular at r = 0).
class OrderTooLow : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Below this radius g_nu is summed from its ascending series.
inline constexpr double kSeriesSwitchRadius = 0.1;

/// K_nu(r) for integer nu >= 0 and r > 0. K_0, K_1 come from Boost's rational
/// approximations; higher orders by upward recurrence (stable for K).
template <class T>
T bessel_k(int nu, const T& r) {
  if (!(r > 0)) throw std::domain_error("bessel_k: argument must be positive");
  if (nu < 0) throw std::invalid_argument("bessel_k: order must be non-negative");
  T k_prev = boost::math::cyl_bessel_k(0, r);
  if (nu == 0) return k_prev;
  T k = boost::math::cyl_bessel_k(1, r);
  for (int n = 1; n < nu; ++n) {
    T next = k_prev + T(2 * n) / r * k;
    k_prev = k;
    k = next;
  }
  return k;
}

/// K_0 .. K_{max_order} at one argument, sharing the recurrence.
template <class T>
std::vector<T> bessel_k_sequence(int max_order, const T& r) {
  if (!(r > 0)) throw std::domain_error("bessel_k: argument must be positive");
  std::vector<T> k(static_cast<std::size_t>(max_order) + 1);
  k[0] = boost::math::cyl_bessel_k(0, r);
  if (max_order >= 1) k[1] = boost::math::cyl_bessel_k(1, r);
  for (int n = 1; n < max_order; ++n) k[n + 1] = k[n - 1] + T(2 * n) / r * k[n];
  return k;
}

namespace detail {

// Ascending series of r^n K_n(r), n >= 1 (Abramowitz & Stegun 9.6.11
// multiplied through by r^n). Exact at r = 0.
template <class T>
T matern_g_series(int n, const T& r) {
  using std::log;
  using boost::multiprecision::log;
  const T eps = std::numeric_limits<T>::epsilon();
  const T t = r * r / 4;
  const T pow2 = ipow(T(2), n - 1);

  // finite part: 2^{n-1} sum_{k<n} (n-k-1)!/k! (-t)^k
  T finite(0);
  {
    T term = boost::math::factorial<T>(static_cast<unsigned>(n - 1));
    for (int k = 0; k < n; ++k) {
      finite += term;
      if (k + 1 < n) term *= -t / T((k + 1) * (n - k - 1));
    }
  }
  finite *= pow2;
  if (r == 0) return finite;

  // log and digamma parts, both carry t^n
  const T euler = boost::math::constants::euler<T>();
  T harmonic_k(0);  // H_k
  T harmonic_nk(0);  // H_{n+k}
  for (int j = 1; j <= n; ++j) harmonic_nk += T(1) / T(j);
  T coeff = T(1) / boost::math::factorial<T>(static_cast<unsigned>(n));  // t^k/(k!(n+k)!)
  T i_sum(0), psi_sum(0);
  for (int k = 0; k < 200; ++k) {
    const T psi = (harmonic_k - euler) + (harmonic_nk - euler);
    i_sum += coeff;
    psi_sum += psi * coeff;
    if (coeff < eps * i_sum * T(1e-3)) break;
    harmonic_k += T(1) / T(k + 1);
    harmonic_nk += T(1) / T(n + k + 1);
    coeff *= t / T((k + 1) * (n + k + 1));
  }
  const T tn = ipow(t, n);
  const T sign = (n % 2 == 0) ? T(1) : T(-1);
  const T log_part = -sign * log(r / 2) * T(2) * pow2 * tn * i_sum;
  const T psi_part = sign * pow2 * tn * psi_sum;
  return finite + log_part + psi_part;
}

}  // namespace detail

/// g_nu(r) = r^nu K_nu(r) for nu >= 0, continuous at 0 with
/// g_nu(0) = 2^{nu-1} Gamma(nu) for nu >= 1. g_0(0) is +inf.
template <class T>
T matern_g(int nu, const T& r) {
  if (nu < 0) throw std::invalid_argument("matern_g: order must be non-negative");
  if (r < 0) throw std::domain_error("matern_g: radius must be non-negative");
  if (nu == 0) {
    if (r == 0) return std::numeric_limits<T>::infinity();
    return bessel_k(0, r);
  }
  if (r < T(kSeriesSwitchRadius)) return detail::matern_g_series(nu, r);
  return ipow(r, nu) * bessel_k(nu, r);
}

/// Normalisation 2^{1-m}/Gamma(m) of the Sobolev W_2^m Matern kernel.
template <class T>
T matern_normalization(int sobolev_order) {
  return ipow(T(2), 1 - sobolev_order) /
         boost::math::factorial<T>(static_cast<unsigned>(sobolev_order - 1));
}

/// One term coef * r^{2k} * g_mu(r) of a Laplacian-reduced profile.
struct ProfileTerm {
  int k = 0;
  int mu = 0;
  double coef = 0.0;
};

/// Expands Delta^laplacians g_nu in dimension dim into a sum of
/// r^{2k} g_mu terms using Delta(r^{2k} g_mu) =
///   2k(2k+d-2) r^{2k-2} g_mu - (d+4k) r^{2k} g_{mu-1} + r^{2k+2} g_{mu-2}.
/// Every term satisfies k + mu = nu - laplacians.
std::vector<ProfileTerm> laplacian_expansion(int nu, int dim, int laplacians);

/// True when Delta^laplacians g_nu is finite at r = 0.
inline bool profile_admissible(int nu, int laplacians) { return nu - laplacians >= 1; }

/// Delta^L applied to the radial function g_nu in R^dim, evaluated at r.
/// Throws OrderTooLow when nu - L < 1 unless singular_floor > 0, in which
/// case the radius is clamped to at least singular_floor.
template <class T>
T matern_laplacian_profile(int nu, int dim, int laplacians, T r, double singular_floor = 0.0) {
  if (dim <= 0 || dim % 2 != 0)
    throw std::invalid_argument("matern_laplacian_profile: only even dimensions give integer Bessel orders");
  if (laplacians < 0) throw std::invalid_argument("matern_laplacian_profile: negative Laplacian count");
  if (r < 0) throw std::domain_error("matern_laplacian_profile: radius must be non-negative");
  if (laplacians == 0 && nu >= 1) return matern_g(nu, r);
  if (!profile_admissible(nu, laplacians)) {
    if (!(singular_floor > 0))
      throw OrderTooLow("Sobolev order too low: Laplacian profile of order " + std::to_string(nu) +
                        " with " + std::to_string(laplacians) + " Laplacians is singular at r = 0");
    if (r < T(singular_floor)) r = T(singular_floor);
  }
  const auto terms = laplacian_expansion(nu, dim, laplacians);

  if (r == 0) {
    // only the k = 0 term survives at the origin
    T value(0);
    for (const auto& term : terms)
      if (term.k == 0) value += T(term.coef) * matern_g(term.mu, r);
    return value;
  }

  int max_abs_mu = 0;
  for (const auto& term : terms) max_abs_mu = std::max(max_abs_mu, std::abs(term.mu));
  const bool small = r < T(kSeriesSwitchRadius);
  const auto k_seq = bessel_k_sequence(max_abs_mu, r);
  const T r2 = r * r;

  T value(0);
  for (const auto& term : terms) {
    T g;
    if (term.mu >= 1 && small)
      g = detail::matern_g_series(term.mu, r);
    else
      g = ipow(r, term.mu) * k_seq[static_cast<std::size_t>(std::abs(term.mu))];
    value += T(term.coef) * ipow(r2, term.k) * g;
  }
  return value;
}

}  // namespace linrec
