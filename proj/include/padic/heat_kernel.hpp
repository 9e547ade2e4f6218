#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <vector>

#include "padic/core.hpp"
#include "padic/radial.hpp"
#include "padic/taibleson.hpp"

namespace padic {

/// Parameters of the fundamental solution Z(x,t) of
///   du/dt + a (D_T^alpha u) = 0  on Q_p^n.
struct KernelParams {
  long long prime;
  int n;
  double alpha;  // operator order > 0
  double a;      // diffusion constant > 0
  SeriesPolicy series;

  void validate() const {
    if (prime < 2) throw std::domain_error("kernel: prime >= 2");
    if (n < 1) throw std::domain_error("kernel: n >= 1");
    if (alpha <= 0.0) throw std::domain_error("kernel: alpha > 0");
    if (a <= 0.0) throw std::domain_error("kernel: a > 0");
  }

  double logp() const { return std::log(double(prime)); }
  double sphere_factor() const { return 1.0 - std::pow(double(prime), -double(n)); }
};

/// Radius argument: either the sphere ||x|| = p^m or the point x = 0.
using RadiusArg = std::optional<int>;  // nullopt means x = 0
inline constexpr std::nullopt_t kAtZero = std::nullopt;

namespace detail {

/// p^{nl} (e^{-at p^{l alpha}} - e^{-at p^{(l+1) alpha}}), assembled in log
/// space so that neither factor overflows on its own. Every value is >= 0.
/// `pre_peak` marks terms that vanished because the exponential argument
/// overflowed (l above the decay scale), so callers can keep descending.
inline double tent_term(const KernelParams& kp, double t, long long l,
                        bool* pre_peak = nullptr) {
  double logp = kp.logp();
  double A = kp.a * t * std::exp(double(l) * kp.alpha * logp);
  if (pre_peak) *pre_peak = false;
  if (!(A < 745.0)) {  // the difference of exponentials underflows
    if (pre_peak) *pre_peak = true;
    return 0.0;
  }
  double gap = A * std::expm1(kp.alpha * logp);  // B - A = A (p^alpha - 1)
  double log_diff = -A + (gap > 745.0 ? 0.0 : std::log1p(-std::exp(-gap)));
  return std::exp(double(l) * kp.n * logp + log_diff);
}

}  // namespace detail

/// The manifestly nonnegative representation of Z. Unwinding the sphere
/// decomposition of the Fourier integral gives, for ||x|| = p^m,
///   Z = sum_{l <= -m} p^{nl} (e^{-at p^{l a}} - e^{-at p^{(l+1) a}}),
/// and the full two-sided sum at x = 0. Every summand is >= 0. This is the
/// canonical evaluation path; the two series below act as its oracles.
inline double z_tent(RadiusArg m, double t, const KernelParams& kp) {
  kp.validate();
  if (t <= 0.0) throw std::domain_error("z_tent: t > 0 required");
  KahanSum acc;
  long long start = m ? -(long long)*m : 0;
  double prev = -1.0;
  for (int j = 0; j <= kp.series.hard_cap; ++j) {
    bool pre_peak = false;
    double term = detail::tent_term(kp, t, start - j, &pre_peak);
    acc.add(term);
    if (!pre_peak) {
      bool past_peak = term < prev || (term == 0.0 && prev == 0.0);
      if (past_peak && term < kp.series.eps * (acc.value() + 1e-300)) break;
      prev = term;
    }
    if (j == kp.series.hard_cap) throw std::domain_error("z_tent: series did not converge");
  }
  if (!m) {
    // upward terms die double-exponentially; pre-peak zeros cannot occur here
    prev = -1.0;
    for (int j = 1; j <= kp.series.hard_cap; ++j) {
      double term = detail::tent_term(kp, t, j);
      acc.add(term);
      bool past_peak = term <= prev;
      if (past_peak && term < kp.series.eps * (acc.value() + 1e-300)) break;
      prev = term;
      if (j == kp.series.hard_cap) throw std::domain_error("z_tent: series did not converge");
    }
  }
  return acc.value();
}

/// Fourier-side sphere series, x != 0:
///   (1-p^{-n}) p^{-mn} sum_{k>=0} p^{-kn} e^{-at p^{(-k-m) a}}
///   - p^{-mn} e^{-at p^{(1-m) a}}.
inline double z_series1(int m, double t, const KernelParams& kp) {
  kp.validate();
  if (t <= 0.0) throw std::domain_error("z_series1: t > 0 required");
  double logp = kp.logp();
  KahanSum acc;
  for (int k = 0; k <= kp.series.hard_cap; ++k) {
    double expo = kp.a * t * std::exp(double(-k - m) * kp.alpha * logp);
    bool pre_peak = !(expo < 745.0);  // argument overflow: keep summing
    double term = pre_peak ? 0.0 : std::exp(double(-k - m) * kp.n * logp - expo);
    acc.add(term);
    if (!pre_peak && k > 2 && term < kp.series.eps * (acc.value() + 1e-300)) break;
    if (k == kp.series.hard_cap) throw std::domain_error("z_series1: series did not converge");
  }
  double sub_expo = kp.a * t * std::exp(double(1 - m) * kp.alpha * logp);
  double sub = sub_expo > 745.0 ? 0.0 : std::exp(double(-m) * kp.n * logp - sub_expo);
  return kp.sphere_factor() * acc.value() - sub;
}

struct Series2Result {
  double value = 0.0;
  double remainder_bound = 0.0;  // magnitude of the first omitted term
  bool certified = false;        // alternating bound valid and terms decreasing
};

/// Small-time asymptotic series, x != 0:
///   Z = sum_{j>=1} ((-1)^j / j!) (1-p^{aj})/(1-p^{-aj-n}) (at)^j ||x||^{-aj-n}.
/// Strictly alternating; once consecutive magnitudes decrease, the first
/// omitted term bounds the remainder.
inline Series2Result z_series2(int m, double t, const KernelParams& kp, int max_terms = 60) {
  kp.validate();
  if (t <= 0.0) throw std::domain_error("z_series2: t > 0 required");
  double pd = double(kp.prime);
  double logp = kp.logp();
  Series2Result out;
  KahanSum acc;
  double log_at = std::log(kp.a * t);
  double log_fact = 0.0;
  bool decreasing = true;
  double prev_mag = std::numeric_limits<double>::infinity();
  double next_mag = 0.0;
  for (int j = 1; j <= max_terms + 1; ++j) {
    log_fact += std::log(double(j));
    double ratio = (1.0 - std::pow(pd, kp.alpha * j)) / (1.0 - std::pow(pd, -kp.alpha * j - kp.n));
    double mag_log = double(j) * log_at - log_fact - double(m) * (kp.alpha * j + kp.n) * logp;
    double term = (j % 2 == 0 ? 1.0 : -1.0) * ratio * std::exp(mag_log);
    double mag = std::abs(term);
    if (j <= max_terms) {
      acc.add(term);
      if (mag > prev_mag) decreasing = false;
      prev_mag = mag;
    } else {
      next_mag = mag;
    }
  }
  out.value = acc.value();
  out.remainder_bound = next_mag;
  out.certified = decreasing && next_mag < prev_mag;
  return out;
}

/// Cumulative radial law F_t(l) = Z-mass of the ball ||x|| <= p^l:
///   (1-p^{-n}) sum_{j>=0} p^{-jn} exp(-at p^{-(l+j) a}).
inline double radial_cdf(int l, double t, const KernelParams& kp) {
  kp.validate();
  if (t <= 0.0) throw std::domain_error("radial_cdf: t > 0 required");
  double logp = kp.logp();
  KahanSum acc;
  for (int j = 0; j <= kp.series.hard_cap; ++j) {
    double expo = kp.a * t * std::exp(double(-(l + j)) * kp.alpha * logp);
    double term = std::exp(double(-j) * kp.n * logp - expo);
    acc.add(term);
    if (std::exp(double(-j) * kp.n * logp) < 1e-18) break;
    if (j == kp.series.hard_cap) throw std::domain_error("radial_cdf: series did not converge");
  }
  double f = kp.sphere_factor() * acc.value();
  return std::min(f, 1.0);
}

/// 1 - F_t(l), computed directly so the tail is not lost to cancellation:
///   (1-p^{-n}) sum_{j>=0} p^{-jn} (1 - exp(-at p^{-(l+j) a})).
inline double radial_cdf_complement(int l, double t, const KernelParams& kp) {
  kp.validate();
  if (t <= 0.0) throw std::domain_error("radial_cdf_complement: t > 0 required");
  double logp = kp.logp();
  KahanSum acc;
  for (int j = 0; j <= kp.series.hard_cap; ++j) {
    double expo = kp.a * t * std::exp(double(-(l + j)) * kp.alpha * logp);
    double term = std::exp(double(-j) * kp.n * logp) * (-std::expm1(-expo));
    acc.add(term);
    if (j > 2 && term < kp.series.eps * (acc.value() + 1e-300)) break;
    if (j == kp.series.hard_cap)
      throw std::domain_error("radial_cdf_complement: series did not converge");
  }
  return kp.sphere_factor() * acc.value();
}

/// Sphere mass F_t(m) - F_t(m-1) evaluated without subtracting the two CDFs.
inline double sphere_mass(int m, double t, const KernelParams& kp) {
  return z_tent(m, t, kp) * std::exp(double(m) * kp.n * kp.logp()) * kp.sphere_factor();
}

inline SpectralMultiplier kernel_multiplier(const KernelParams& kp, double t) {
  double logp = kp.logp();
  double at = kp.a * t;
  double alpha = kp.alpha;
  return SpectralMultiplier{kp.prime, kp.n, [at, alpha, logp](int k) {
                              double u = std::exp(double(k) * alpha * logp);
                              return -at * u;  // log of e^{-at p^{k alpha}}
                            }};
}

/// (D_T^gamma Z)(x,t) = int Psi(x.eta) ||eta||^gamma e^{-at ||eta||^alpha} d^n eta,
/// for 0 < gamma <= alpha (the range where the exchange is justified).
inline double DgammaZ(RadiusArg m, double t, double gamma, const KernelParams& kp) {
  kp.validate();
  if (t <= 0.0) throw std::domain_error("DgammaZ: t > 0 required");
  if (gamma <= 0.0 || gamma > kp.alpha)
    throw std::domain_error("DgammaZ: gamma must lie in (0, alpha]");
  SpectralMultiplier g = kernel_multiplier(kp, t);
  return m ? spectral_value_at(g, gamma, *m, kp.series)
           : spectral_value_at_zero(g, gamma, kp.series);
}

/// dZ/dt = -a int Psi(x.xi) ||xi||^alpha e^{-at ||xi||^alpha} d^n xi;
/// termwise this is -a (D_T^alpha Z).
inline double dZ_dt(RadiusArg m, double t, const KernelParams& kp) {
  kp.validate();
  if (t <= 0.0) throw std::domain_error("dZ_dt: t > 0 required");
  SpectralMultiplier g = kernel_multiplier(kp, t);
  return -kp.a * (m ? spectral_value_at(g, kp.alpha, *m, kp.series)
                    : spectral_value_at_zero(g, kp.alpha, kp.series));
}

/// Independent route for dZ/dt: the tent sum differentiated term by term.
inline double dZ_dt_tent(RadiusArg m, double t, const KernelParams& kp) {
  kp.validate();
  if (t <= 0.0) throw std::domain_error("dZ_dt_tent: t > 0 required");
  double logp = kp.logp();
  auto term = [&](long long l, bool* pre_peak) -> double {
    double A = kp.a * t * std::exp(double(l) * kp.alpha * logp);
    *pre_peak = !(A < 745.0);
    if (*pre_peak) return 0.0;
    double B = A * std::exp(kp.alpha * logp);
    double wl = double(l) * kp.n * logp;
    double lo = std::exp(wl + std::log(kp.a) + kp.alpha * double(l) * logp - A);
    double hi = B > 745.0 ? 0.0
                          : std::exp(wl + std::log(kp.a) + kp.alpha * double(l + 1) * logp - B);
    return hi - lo;
  };
  KahanSum acc;
  long long start = m ? -(long long)*m : 0;
  double prev = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= kp.series.hard_cap; ++j) {
    bool pre_peak = false;
    double v = term(start - j, &pre_peak);
    acc.add(v);
    if (!pre_peak) {
      double mag = std::abs(v);
      if (j > 2 && mag <= prev && mag < kp.series.eps * (std::abs(acc.value()) + 1e-300)) break;
      prev = mag;
    }
    if (j == kp.series.hard_cap) throw std::domain_error("dZ_dt_tent: series did not converge");
  }
  if (!m) {
    prev = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= kp.series.hard_cap; ++j) {
      bool pre_peak = false;
      double v = term(j, &pre_peak);
      acc.add(v);
      double mag = std::abs(v);
      if (j > 2 && mag <= prev && mag < kp.series.eps * (std::abs(acc.value()) + 1e-300)) break;
      prev = mag;
      if (j == kp.series.hard_cap) throw std::domain_error("dZ_dt_tent: series did not converge");
    }
  }
  return acc.value();
}

/// An immutable tabulated slice Z(., t): the radial profile plus exact
/// evaluator tails so any radius stays reachable. The table spans enough
/// spheres that the mass outside is below tail_mass_eps.
class KernelSlice {
 public:
  KernelSlice(const KernelParams& kp, double t, double tail_mass_eps = 1e-16)
      : params_(kp), t_(t), radial_(build(kp, t, tail_mass_eps)) {}

  const KernelParams& params() const { return params_; }
  double t() const { return t_; }
  const RadialFunction& radial() const { return radial_; }

  double value(RadiusArg m) const {
    return m ? radial_.at_exp(*m).real() : radial_.value_at_zero().real();
  }

 private:
  static RadialFunction build(const KernelParams& kp, double t, double tail_eps) {
    kp.validate();
    if (t <= 0.0) throw std::domain_error("kernel slice: t > 0 required");
    double logp = kp.logp();
    double z0 = std::max(z_tent(kAtZero, t, kp), 1e-300);
    // low end: everything below m_lo carries mass <= z0 p^{n m_lo}
    double lo = std::clamp((std::log(tail_eps) - std::log(z0)) / (kp.n * logp), -4000.0, 4000.0);
    int m_lo = int(std::floor(lo)) - 2;
    // high end: extend until the complement of the CDF is below tail_eps
    int m_hi = m_lo + 1;
    double at = kp.a * t;
    m_hi = std::max(m_hi, int(std::ceil((std::log(std::max(at, 1e-6)) - std::log(tail_eps)) /
                                        (kp.alpha * logp))) + 2);
    while (radial_cdf_complement(m_hi, t, kp) > tail_eps) ++m_hi;

    std::vector<complex_t> table;
    table.reserve(size_t(m_hi - m_lo + 1));
    for (int m = m_lo; m <= m_hi; ++m) table.emplace_back(z_tent(m, t, kp), 0.0);
    KernelParams captured = kp;
    auto eval = [captured, t](int m) { return complex_t(z_tent(m, t, captured), 0.0); };
    return RadialFunction(kp.prime, kp.n, m_lo, std::move(table), complex_t(z0, 0.0),
                          TailLo::evaluator(eval), TailHi::evaluator(eval));
  }

  KernelParams params_;
  double t_;
  RadialFunction radial_;
};

/// Memoizes slices per t for one parameter set; safe for concurrent readers
/// with serialized (internally locked) writes.
class KernelCache {
 public:
  explicit KernelCache(const KernelParams& kp) : params_(kp) {}

  const KernelParams& params() const { return params_; }

  std::shared_ptr<const KernelSlice> slice(double t) {
    {
      std::shared_lock lock(mutex_);
      auto it = slices_.find(t);
      if (it != slices_.end()) return it->second;
    }
    auto made = std::make_shared<const KernelSlice>(params_, t);
    std::unique_lock lock(mutex_);
    auto [it, inserted] = slices_.emplace(t, made);
    return it->second;
  }

 private:
  KernelParams params_;
  std::map<double, std::shared_ptr<const KernelSlice>> slices_;
  std::shared_mutex mutex_;
};

struct SemigroupValue {
  double value = 0.0;
  double tail_bound = 0.0;
};

/// (Z(., t) * Z(., t'))(x) assembled from the radial law alone:
/// spheres ||y|| < ||x|| see the constant Z(x,t), the matching sphere is an
/// exact ball difference, and the outer spheres pair the two radial decays.
inline SemigroupValue semigroup_convolve(const KernelParams& kp, double t, double t_prime,
                                         RadiusArg m) {
  kp.validate();
  double pd = double(kp.prime);
  double sf = kp.sphere_factor();
  KahanSum acc;
  SemigroupValue out;
  int start;
  if (m) {
    // inner: Z(x - y, t) = z_t(m) for ||y|| < p^m
    acc.add(z_tent(*m, t, kp) * radial_cdf(*m - 1, t_prime, kp));
    // matching sphere ||y|| = p^m: integral of z_t over B_m minus the coset
    // around x, where the integrand is the constant z_t(m)
    double ball_part = radial_cdf(*m, t, kp) -
                       z_tent(*m, t, kp) * std::pow(pd, double(*m - 1) * kp.n);
    acc.add(z_tent(*m, t_prime, kp) * ball_part);
    start = *m + 1;
  } else {
    // x = 0: sum over all spheres of z_t(k) z_t'(k) vol(S_k); the lower
    // half converges geometrically
    for (int j = 1; j <= kp.series.hard_cap; ++j) {
      int k = 1 - j;
      double term = z_tent(k, t, kp) * z_tent(k, t_prime, kp) * std::pow(pd, double(k) * kp.n) * sf;
      acc.add(term);
      if (term < kp.series.eps * (acc.value() + 1e-300)) break;
      if (j == kp.series.hard_cap) throw std::domain_error("semigroup: inner series stalled");
    }
    start = 1;
  }
  double prev = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= kp.series.hard_cap; ++j) {
    int k = start + j;
    double term = z_tent(k, t, kp) * z_tent(k, t_prime, kp) * std::pow(pd, double(k) * kp.n) * sf;
    acc.add(term);
    if (term < prev && term < kp.series.eps * (acc.value() + 1e-300)) {
      out.tail_bound = term * 2.0;
      break;
    }
    prev = term;
    if (j == kp.series.hard_cap) throw std::domain_error("semigroup: outer series stalled");
  }
  out.value = acc.value();
  return out;
}

enum class KernelBoundKind { Value, TimeDerivative, Dgamma };

struct BoundCheckResult {
  double c_hat = 0.0;          // empirical constant on the fitting grid
  double c_hat_refined = 0.0;  // same functional on the refined grid
  int violations = 0;          // validation-grid points above c_hat*(1+slack)
  int validation_points = 0;
};

/// Decay-bound machinery: fit the constant
///   C = sup Z(x,t) (t^{1/alpha} + ||x||)^{alpha+n} / t        (Value)
///   C = sup |dZ/dt| (t^{1/alpha} + ||x||)^{alpha+n}           (TimeDerivative)
///   C = sup |D^g Z| (t^{1/alpha} + ||x||)^{gamma+n}           (Dgamma)
/// on a coarse grid and count violations of C (1 + slack) on a finer one.
inline BoundCheckResult bound_check(const std::vector<double>& t_grid,
                                    const std::vector<int>& m_grid, const KernelParams& kp,
                                    KernelBoundKind kind, double gamma = 0.0,
                                    int refine_factor = 10, double slack = 1e-12) {
  kp.validate();
  double pd = double(kp.prime);
  auto ratio = [&](int m, double t) -> double {
    double radius = std::pow(pd, double(m));
    double scale = std::pow(t, 1.0 / kp.alpha) + radius;
    switch (kind) {
      case KernelBoundKind::Value:
        return z_tent(m, t, kp) * std::pow(scale, kp.alpha + kp.n) / t;
      case KernelBoundKind::TimeDerivative:
        return std::abs(dZ_dt(m, t, kp)) * std::pow(scale, kp.alpha + kp.n);
      case KernelBoundKind::Dgamma:
        return std::abs(DgammaZ(m, t, gamma, kp)) * std::pow(scale, gamma + kp.n);
    }
    return 0.0;
  };

  BoundCheckResult res;
  for (double t : t_grid)
    for (int m : m_grid) res.c_hat = std::max(res.c_hat, ratio(m, t));

  // refined grid: laid log-uniformly between consecutive t values
  std::vector<double> fine;
  if (t_grid.size() == 1) {
    fine = t_grid;
  } else {
    for (size_t i = 0; i + 1 < t_grid.size(); ++i)
      for (int j = 0; j < refine_factor; ++j) {
        double w = double(j) / refine_factor;
        fine.push_back(t_grid[i] * std::pow(t_grid[i + 1] / t_grid[i], w));
      }
    fine.push_back(t_grid.back());
  }
  double allowed = res.c_hat * (1.0 + slack);
  for (double t : fine)
    for (int m : m_grid) {
      double r = ratio(m, t);
      res.c_hat_refined = std::max(res.c_hat_refined, r);
      ++res.validation_points;
      if (r > allowed) ++res.violations;
    }
  return res;
}

}  // namespace padic
