#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "padic/core.hpp"
#include "padic/gamma_riesz.hpp"
#include "padic/radial.hpp"

namespace padic {

/// Order and truncation control for D_T^gamma.
struct OperatorParams {
  long long prime;
  int n;
  double gamma;         // operator order, > 0
  SeriesPolicy series;
  int sphere_margin = 4;  // exact spheres past the support before tail formulas
};

/// Hypersingular form of the Taibleson operator:
///   (D_T^g phi)(x) = c_g int ||y||^{-g-n} (phi(x-y) - phi(x)) d^n y,
///   c_g = (1 - p^g)/(1 - p^{-g-n}).
/// The integrand vanishes for ||y|| <= p^{-l(phi)}; spheres through the
/// support region are integrated exactly, the far range comes from the tail
/// model in closed form (geometric) or by a truncated series for supplied
/// evaluators.
inline complex_t apply_hypersingular(const LocallyConstantFunction& phi,
                                     const OperatorParams& op, const PAdicPoint& x) {
  long long p = op.prime;
  int n = op.n;
  double g = op.gamma;
  if (g <= 0.0) throw std::domain_error("taibleson: gamma > 0 required");
  if (!phi.has_tail())
    throw std::domain_error("taibleson: phi needs a tail model to integrate over Q_p^n");
  if (g <= phi.growth_exp())
    throw std::domain_error("taibleson: gamma <= growth exponent, integral diverges");
  if (phi.tail()->tail_hi().kind == TailHi::Kind::PowerLaw &&
      phi.tail()->tail_hi().sigma >= g)
    throw std::domain_error("taibleson: tail power >= gamma, integral diverges");

  double pd = double(p);
  double c = (1.0 - pow_p(p, g)) / (1.0 - pow_p(p, -g - n));
  double sphere_factor = 1.0 - std::pow(pd, -double(n));
  complex_t phi_x = phi.evaluate(x);

  int x_exp = x.is_zero() ? std::numeric_limits<int>::min() : x.norm_exp();
  int supp = phi.support_exp();
  int tab_hi = phi.has_tail() ? phi.tail()->m_hi() : std::numeric_limits<int>::min();
  int k_mid_hi = std::max({supp, x_exp, tab_hi, 0}) + op.sphere_margin;

  KahanSumComplex acc;
  for (int k = -phi.loc_exp() + 1; k <= k_mid_hi; ++k) {
    complex_t diff =
        sphere_integral(phi, x, k, op.series) - phi_x * std::pow(pd, double(k) * n) * sphere_factor;
    acc.add(std::pow(pd, -double(k) * (g + n)) * diff);
  }

  // far range: phi(x - y) is the radial tail value at ||y|| = p^k
  const TailHi& th = phi.tail()->tail_hi();
  double start = double(k_mid_hi + 1);
  switch (th.kind) {
    case TailHi::Kind::Zero: {
      // sum_{k > K} p^{-kg} (0 - phi(x)) (1-p^{-n})
      double geo = std::pow(pd, -start * g) / (1.0 - std::pow(pd, -g));
      acc.add(-phi_x * sphere_factor * geo);
      break;
    }
    case TailHi::Kind::PowerLaw: {
      double geo0 = std::pow(pd, -start * g) / (1.0 - std::pow(pd, -g));
      acc.add(-phi_x * sphere_factor * geo0);
      double r = th.sigma - g;  // < 0 checked above
      double geo1 = std::pow(pd, start * r) / (1.0 - std::pow(pd, r));
      acc.add(th.coeff * sphere_factor * geo1);
      break;
    }
    case TailHi::Kind::Evaluator: {
      double scale = std::abs(acc.value()) + 1e-300;
      for (int j = 0; j <= op.series.hard_cap; ++j) {
        int k = k_mid_hi + 1 + j;
        complex_t term = std::pow(pd, -double(k) * g) * sphere_factor *
                         (phi.tail()->at_exp(k) - phi_x);
        acc.add(term);
        if (std::abs(term) < op.series.eps * std::max(scale, std::abs(acc.value()))) break;
        if (j == op.series.hard_cap)
          throw std::domain_error("taibleson: evaluator tail did not converge");
      }
      break;
    }
  }
  return c * acc.value();
}

/// A radial function given on the Fourier side by its spectral multiplier
/// g(k) on the sphere ||xi|| = p^k. The multiplier is carried in log form
/// (log g(k), -inf allowed) so terms can be assembled with a single exp and
/// never hit inf * 0.
struct SpectralMultiplier {
  long long prime;
  int n;
  std::function<double(int)> log_value;  // log g(k)
};

/// Evaluates int Psi(x.xi) ||xi||^gamma g(||xi||) d^n xi at ||x|| = p^m via
/// the sphere character integral:
///   (1-p^{-n}) sum_{k <= -m} p^{k(gamma+n)} g(k)  -  p^{(1-m)gamma - mn} g(1-m).
inline double spectral_value_at(const SpectralMultiplier& g, double gamma, int m,
                                SeriesPolicy pol = {}) {
  long long p = g.prime;
  int n = g.n;
  double pd = double(p);
  double sphere_factor = 1.0 - std::pow(pd, -double(n));
  double logp = std::log(pd);
  KahanSum acc;
  for (int j = 0; j <= pol.hard_cap; ++j) {
    int k = -m - j;
    double term = sphere_factor * std::exp(double(k) * (gamma + n) * logp + g.log_value(k));
    acc.add(term);
    if (j > 4 && std::abs(term) < pol.eps * std::abs(acc.value())) break;
    if (j == pol.hard_cap) throw std::domain_error("spectral series did not converge (k -> -inf)");
  }
  acc.add(-std::exp((double(1 - m) * gamma - double(m) * n) * logp + g.log_value(1 - m)));
  return acc.value();
}

/// Value at x = 0: the full two-sided sphere sum
///   (1-p^{-n}) sum_k p^{k(gamma+n)} g(k).
inline double spectral_value_at_zero(const SpectralMultiplier& g, double gamma,
                                     SeriesPolicy pol = {}) {
  long long p = g.prime;
  int n = g.n;
  double pd = double(p);
  double sphere_factor = 1.0 - std::pow(pd, -double(n));
  double logp = std::log(pd);
  KahanSum acc;
  int grew = 0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k >= -pol.hard_cap; --k) {
    double term = sphere_factor * std::exp(double(k) * (gamma + n) * logp + g.log_value(k));
    acc.add(term);
    if (k < -4 && std::abs(term) < pol.eps * std::abs(acc.value())) break;
    if (k == -pol.hard_cap) throw std::domain_error("spectral series did not converge (k -> -inf)");
  }
  for (int k = 1; k <= pol.hard_cap; ++k) {
    double term = sphere_factor * std::exp(double(k) * (gamma + n) * logp + g.log_value(k));
    acc.add(term);
    double mag = std::abs(term);
    if (mag < pol.eps * std::abs(acc.value())) break;
    grew = mag > prev ? grew + 1 : 0;
    if (grew > 32) throw std::domain_error("spectral series diverges (multiplier not decaying)");
    prev = mag;
    if (k == pol.hard_cap) throw std::domain_error("spectral series did not converge (k -> +inf)");
  }
  return acc.value();
}

/// D_T^gamma applied on the Fourier side: the input spectral multiplier g
/// picks up ||xi||^gamma. Returns the resulting radial function tabulated on
/// [m_lo, m_hi] with evaluator tails backed by the same series.
inline RadialFunction apply_fourier_radial(const SpectralMultiplier& g, double gamma, int m_lo,
                                           int m_hi, SeriesPolicy pol = {}) {
  std::vector<complex_t> table;
  table.reserve(size_t(m_hi - m_lo + 1));
  for (int m = m_lo; m <= m_hi; ++m) table.emplace_back(spectral_value_at(g, gamma, m, pol), 0.0);
  double v0 = spectral_value_at_zero(g, gamma, pol);
  auto eval = [g, gamma, pol](int m) { return complex_t(spectral_value_at(g, gamma, m, pol), 0.0); };
  return RadialFunction(g.prime, g.n, m_lo, std::move(table), complex_t(v0, 0.0),
                        TailLo::evaluator(eval), TailHi::evaluator(eval));
}

/// Spectral route for a compactly supported *radial* locally constant
/// function: decompose phi = sum_m (v(m) - v(m+1)) 1_{B_m} and use
/// F(1_{B_m}) = p^{mn} 1_{B_{-m}}:
///   (D^g phi)(x) = sum_m (v(m)-v(m+1)) p^{mn} sum_{k <= -m} p^{kg} S(x,k).
inline complex_t spectral_of_radial_compact(const LocallyConstantFunction& phi, double gamma,
                                            const PAdicPoint& x, SeriesPolicy pol = {}) {
  long long p = phi.prime();
  int n = phi.dim();
  if (!phi.compactly_supported())
    throw std::domain_error("spectral_of_radial_compact: compact support required");
  double pd = double(p);
  PAdicPoint origin = PAdicPoint::origin(p, n);
  int lo = -phi.loc_exp();
  int hi = std::max(phi.support_exp(), lo);
  auto radial_value = [&](int m) -> complex_t {
    if (m < lo) return phi.evaluate(origin);
    // sample one point on the sphere p^m: (p^{-m}, 0, ..., 0)
    std::vector<PAdicScalar> cs;
    cs.reserve(size_t(n));
    cs.push_back(PAdicScalar::from_rational(p, 1, 1));
    // build p^{-m} directly
    cs[0] = PAdicScalar::from_digits(p, -m, {1});
    for (int i = 1; i < n; ++i) cs.push_back(PAdicScalar::zero(p));
    return phi.evaluate(PAdicPoint(std::move(cs)));
  };

  bool x_zero = x.is_zero();
  int mx = x_zero ? 0 : x.norm_exp();
  KahanSumComplex acc;
  for (int m = lo; m <= hi; ++m) {
    complex_t coeff = radial_value(m) - radial_value(m + 1);
    if (std::abs(coeff) == 0.0) continue;
    // sum_{k <= -m} p^{kg} S(x, k), truncated by the geometric factor
    KahanSum inner;
    for (int j = 0; j <= pol.hard_cap; ++j) {
      int k = -m - j;
      double term = std::pow(pd, double(k) * gamma) *
                    sphere_character_integral_d(x_zero, mx, k, p, n);
      inner.add(term);
      if (j > 2 && std::abs(term) < pol.eps * (std::abs(inner.value()) + 1e-300)) break;
      if (j == pol.hard_cap)
        throw std::domain_error("spectral_of_radial_compact: series did not converge");
    }
    acc.add(coeff * std::pow(pd, double(m) * n) * inner.value());
  }
  return acc.value();
}

struct CrossCheckReport {
  size_t points = 0;
  double max_abs_deviation = 0.0;
};

/// Evaluates the hypersingular and spectral routes where both apply and
/// reports the worst disagreement.
inline CrossCheckReport operator_cross_check(const LocallyConstantFunction& phi,
                                             const OperatorParams& op,
                                             const std::vector<PAdicPoint>& samples) {
  CrossCheckReport rep;
  for (const auto& x : samples) {
    complex_t a = apply_hypersingular(phi, op, x);
    complex_t b = spectral_of_radial_compact(phi, op.gamma, x, op.series);
    rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::abs(a - b));
    ++rep.points;
  }
  return rep;
}

}  // namespace padic
