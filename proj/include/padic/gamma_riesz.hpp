#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "padic/core.hpp"
#include "padic/radial.hpp"

namespace padic {

/// Parameters of the p-adic Gamma function Gamma_p^{(n)}(alpha).
struct GammaArgs {
  long long prime;
  int n;
  double alpha;
};

inline double pow_p(long long p, double e) { return std::pow(double(p), e); }

/// Gamma_p^{(n)}(alpha) = (1 - p^{alpha-n}) / (1 - p^{-alpha}), alpha != 0.
inline double gamma_p(const GammaArgs& a) {
  if (a.alpha == 0.0) throw std::domain_error("gamma_p: alpha = 0");
  return (1.0 - pow_p(a.prime, a.alpha - a.n)) / (1.0 - pow_p(a.prime, -a.alpha));
}

/// Exact-rational path for integer alpha.
inline Rational gamma_p_exact(long long prime, int n, long long alpha) {
  if (alpha == 0) throw std::domain_error("gamma_p: alpha = 0");
  Rational num = Rational::one() - Rational::pow_int(prime, alpha - n);
  Rational den = Rational::one() - Rational::pow_int(prime, -alpha);
  return num / den;
}

/// Regularized pairing of the Riesz kernel k_alpha with a compactly
/// supported test function:
///   <k_a, phi> = (1-p^{-n})/(1-p^{a-n}) phi(0)
///              + (1-p^{-a})/(1-p^{a-n}) int_{||x||>1} ||x||^{a-n} phi
///              + (1-p^{-a})/(1-p^{a-n}) int_{||x||<=1} ||x||^{a-n} (phi - phi(0)).
/// The compensated inner integrand vanishes on spheres below the exponent of
/// local constancy, so both integrals are finite sphere sums.
inline complex_t riesz_pairing(double alpha, const LocallyConstantFunction& phi,
                               SeriesPolicy pol = {}) {
  long long p = phi.prime();
  int n = phi.dim();
  if (alpha == 0.0 || alpha == double(n))
    throw std::domain_error("riesz_pairing: alpha in {0, n}");
  if (!phi.compactly_supported())
    throw std::domain_error("riesz_pairing: phi must be compactly supported");

  PAdicPoint origin = PAdicPoint::origin(p, n);
  complex_t phi0 = phi.evaluate(origin);
  double denom = 1.0 - pow_p(p, alpha - n);
  double c = (1.0 - pow_p(p, -alpha)) / denom;
  double sphere_factor = 1.0 - pow_p(p, -double(n));

  complex_t total = (sphere_factor / denom) * phi0;

  int k_hi = std::max(phi.support_exp(), 0);
  KahanSumComplex outer;
  for (int k = 1; k <= k_hi; ++k)
    outer.add(pow_p(p, double(k) * (alpha - n)) * sphere_integral(phi, origin, k, pol));

  KahanSumComplex inner;
  for (int k = -phi.loc_exp() + 1; k <= 0; ++k) {
    complex_t compensated =
        sphere_integral(phi, origin, k, pol) - phi0 * pow_p(p, double(k) * n) * sphere_factor;
    inner.add(pow_p(p, double(k) * (alpha - n)) * compensated);
  }

  return total + c * (outer.value() + inner.value());
}

/// alpha -> 0 limit of the pairing: k_0 is the Dirac delta.
inline complex_t riesz_delta_limit(const LocallyConstantFunction& phi) {
  return phi.evaluate(PAdicPoint::origin(phi.prime(), phi.dim()));
}

/// <k_{-alpha}, phi> for alpha > 0:
///   (1-p^{alpha})/(1-p^{-alpha-n}) int ||x||^{-alpha-n} (phi(x) - phi(0)) d^n x,
/// with the part beyond the support summed as an exact geometric series.
inline complex_t riesz_pairing_negative(double alpha, const LocallyConstantFunction& phi,
                                        SeriesPolicy pol = {}) {
  long long p = phi.prime();
  int n = phi.dim();
  if (alpha <= 0.0) throw std::domain_error("riesz_pairing_negative: alpha > 0 required");
  if (!phi.compactly_supported())
    throw std::domain_error("riesz_pairing_negative: phi must be compactly supported");

  PAdicPoint origin = PAdicPoint::origin(p, n);
  complex_t phi0 = phi.evaluate(origin);
  double c = (1.0 - pow_p(p, alpha)) / (1.0 - pow_p(p, -alpha - n));
  double sphere_factor = 1.0 - pow_p(p, -double(n));

  int k_hi = std::max(phi.support_exp(), 0);
  KahanSumComplex sum;
  for (int k = -phi.loc_exp() + 1; k <= k_hi; ++k) {
    complex_t compensated =
        sphere_integral(phi, origin, k, pol) - phi0 * pow_p(p, double(k) * n) * sphere_factor;
    sum.add(pow_p(p, -double(k) * (alpha + n)) * compensated);
  }
  // spheres beyond the support: phi = 0 there, integrand is -phi(0) ||x||^{-alpha-n}
  // sum_{k > k_hi} p^{-k alpha} (1-p^{-n}) = (1-p^{-n}) p^{-(k_hi+1) alpha} / (1-p^{-alpha})
  complex_t tail = -phi0 * sphere_factor * pow_p(p, -double(k_hi + 1) * alpha) /
                   (1.0 - pow_p(p, -alpha));
  return c * (sum.value() + tail);
}

/// Evaluates ||x||^alpha as the regularized hypersingular
/// integral (1/Gamma_p^{(n)}(-alpha)) int ||y||^{-alpha-n} (Psi(-x.y) - 1) d^n y,
/// assembled sphere by sphere from the character integral. Returns 0 at x = 0.
inline double norm_power_via_integral(const PAdicPoint& x, double alpha, SeriesPolicy pol = {}) {
  if (alpha <= 0.0) throw std::domain_error("norm_power_via_integral: alpha > 0 required");
  if (x.is_zero()) return 0.0;
  long long p = x.prime();
  int n = x.dim();
  int m = x.norm_exp();
  double sphere_factor = 1.0 - pow_p(p, -double(n));

  // Per sphere ||y|| = p^k the bracket S(x,k) - (1-p^{-n}) p^{kn} vanishes
  // for k <= -m; the series starts at k = 1 - m.
  KahanSum acc;
  int k = 1 - m;
  {
    double weight = pow_p(p, -double(k) * (alpha + n));
    double bracket = sphere_character_integral_d(false, m, k, p, n) -
                     sphere_factor * pow_p(p, double(k) * n);
    acc.add(weight * bracket);
  }
  double remainder_ratio = pow_p(p, -alpha);
  for (int j = 1; j <= pol.hard_cap; ++j) {
    k = 1 - m + j;
    // beyond the character's reach the bracket is -(1-p^{-n}) p^{kn}
    double term = -sphere_factor * pow_p(p, -double(k) * alpha);
    acc.add(term);
    if (std::abs(term) < pol.eps * std::abs(acc.value())) {
      // exact geometric remainder of the same tail
      acc.add(term * remainder_ratio / (1.0 - remainder_ratio));
      break;
    }
    if (j == pol.hard_cap) {
      acc.add(term * remainder_ratio / (1.0 - remainder_ratio));
      break;
    }
  }
  double gamma_neg = gamma_p({p, n, -alpha});
  return acc.value() / gamma_neg;
}

}  // namespace padic
