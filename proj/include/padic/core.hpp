#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "padic/rational.hpp"

namespace padic {

using complex_t = std::complex<double>;

/// Sentinel valuation for the zero element (ord(0) = +inf).
inline constexpr int kOrderInfinity = std::numeric_limits<int>::max();

/// An element of Q_p at finite digit precision: x = p^order * sum_j d_j p^j
/// with d_0 != 0 unless the value is zero. Digits are stored least
/// significant first; everything beyond the stored window is unknown and
/// arithmetic truncates there. Values are immutable after construction.
class PAdicScalar {
 public:
  static constexpr int kDefaultWindow = 24;

  /// The zero element (ord = +inf, empty digit vector).
  explicit PAdicScalar(long long prime) : prime_(prime), order_(kOrderInfinity) {
    check_prime(prime);
  }

  static PAdicScalar zero(long long prime) { return PAdicScalar(prime); }

  /// Exact embedding of an integer (negative values get the usual
  /// complemented expansion, truncated at the window).
  static PAdicScalar from_integer(long long prime, long long value,
                                  int window = kDefaultWindow) {
    check_prime(prime);
    PAdicScalar x(prime);
    if (value == 0) return x;
    int ord = 0;
    while (value % prime == 0) {
      value /= prime;
      ++ord;
    }
    x.order_ = ord;
    long long v = value;
    for (int j = 0; j < window; ++j) {
      long long d = v % prime;
      if (d < 0) d += prime;
      x.digits_.push_back(uint32_t(d));
      v = (v - d) / prime;
      // keep padding with exact zeros once v == 0 (terminating expansion)
    }
    return x;
  }

  /// num/den with den != 0; powers of p are factored into the valuation and
  /// the unit part expanded by repeated division mod p.
  static PAdicScalar from_rational(long long prime, long long num, long long den,
                                   int window = kDefaultWindow) {
    check_prime(prime);
    if (den == 0) throw std::domain_error("p-adic from_rational: zero denominator");
    PAdicScalar x(prime);
    if (num == 0) return x;
    int ord = 0;
    while (num % prime == 0) {
      num /= prime;
      ++ord;
    }
    while (den % prime == 0) {
      den /= prime;
      --ord;
    }
    x.order_ = ord;
    long long den_inv = mod_inverse(((den % prime) + prime) % prime, prime);
    long long cur = num;
    for (int j = 0; j < window; ++j) {
      long long c = ((cur % prime) + prime) % prime;
      long long d = (c * den_inv) % prime;
      x.digits_.push_back(uint32_t(d));
      cur = (cur - d * den) / prime;
    }
    return x;
  }

  /// Builds a value from an explicit digit span starting at exponent
  /// `lowest_exp` (used by window enumeration and the sampler). Leading
  /// zeros are stripped into the valuation; all-zero digits give 0. The
  /// digits describe the value exactly, so the window is padded with the
  /// trailing zeros that are genuinely there.
  static PAdicScalar from_digits(long long prime, int lowest_exp,
                                 const std::vector<uint32_t>& digits) {
    check_prime(prime);
    size_t lead = 0;
    while (lead < digits.size() && digits[lead] == 0) ++lead;
    PAdicScalar x(prime);
    if (lead == digits.size()) return x;
    x.order_ = lowest_exp + int(lead);
    x.digits_.assign(digits.begin() + lead, digits.end());
    if (x.digits_.size() < size_t(kDefaultWindow)) x.digits_.resize(size_t(kDefaultWindow), 0);
    return x;
  }

  long long prime() const { return prime_; }
  bool is_zero() const { return order_ == kOrderInfinity; }
  int order() const { return order_; }
  const std::vector<uint32_t>& digits() const { return digits_; }

  /// Exponent e with |x|_p = p^e, i.e. e = -ord(x); throws for zero.
  int norm_exp() const {
    if (is_zero()) throw std::domain_error("norm_exp of zero");
    return -order_;
  }

  double norm() const { return is_zero() ? 0.0 : std::pow(double(prime_), -double(order_)); }

  /// Exponent of the first unknown digit: digits at exponents >= horizon are
  /// not represented. Zero is exact (horizon +inf).
  long long horizon() const {
    if (is_zero()) return std::numeric_limits<long long>::max();
    return (long long)order_ + (long long)digits_.size();
  }

  uint32_t digit_at(long long exponent) const {
    if (is_zero()) return 0;
    long long j = exponent - order_;
    if (j < 0 || j >= (long long)digits_.size()) return 0;
    return digits_[size_t(j)];
  }

  PAdicScalar operator-() const {
    if (is_zero()) return *this;
    PAdicScalar r(prime_);
    r.order_ = order_;
    r.digits_.resize(digits_.size());
    r.digits_[0] = uint32_t(prime_ - digits_[0]);
    for (size_t j = 1; j < digits_.size(); ++j)
      r.digits_[j] = uint32_t(prime_ - 1 - digits_[j]);
    return r;
  }

  PAdicScalar operator+(const PAdicScalar& o) const {
    require_same_prime(o);
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    int lo = std::min(order_, o.order_);
    long long hi = std::min(horizon(), o.horizon());
    std::vector<uint32_t> out;
    out.reserve(size_t(hi - lo));
    long long carry = 0;
    for (long long e = lo; e < hi; ++e) {
      long long s = carry + digit_at(e) + o.digit_at(e);
      out.push_back(uint32_t(s % prime_));
      carry = s / prime_;
    }
    return from_digits(prime_, lo, out);
  }

  PAdicScalar operator-(const PAdicScalar& o) const { return *this + (-o); }

  PAdicScalar operator*(const PAdicScalar& o) const {
    require_same_prime(o);
    if (is_zero() || o.is_zero()) return PAdicScalar(prime_);
    size_t len = std::min(digits_.size(), o.digits_.size());
    std::vector<uint64_t> acc(len, 0);
    for (size_t i = 0; i < len; ++i) {
      if (digits_[i] == 0) continue;
      for (size_t j = 0; j + i < len; ++j)
        acc[i + j] += uint64_t(digits_[i]) * o.digits_[j];
    }
    std::vector<uint32_t> out(len);
    uint64_t carry = 0;
    for (size_t k = 0; k < len; ++k) {
      uint64_t s = acc[k] + carry;
      out[k] = uint32_t(s % uint64_t(prime_));
      carry = s / uint64_t(prime_);
    }
    PAdicScalar r(prime_);
    r.order_ = order_ + o.order_;  // units multiply to a unit: no stripping
    r.digits_ = std::move(out);
    return r;
  }

  PAdicScalar pow(unsigned k) const {
    PAdicScalar r = from_integer(prime_, 1, int(std::max<size_t>(digits_.size(), 1)));
    if (is_zero()) return k == 0 ? r : PAdicScalar(prime_);
    PAdicScalar base = *this;
    while (k > 0) {
      if (k & 1u) r = r * base;
      base = base * base;
      k >>= 1u;
    }
    return r;
  }

  bool operator==(const PAdicScalar& o) const {
    if (prime_ != o.prime_) return false;
    if (is_zero() || o.is_zero()) return is_zero() && o.is_zero();
    if (order_ != o.order_) return false;
    long long hi = std::min(horizon(), o.horizon());
    for (long long e = order_; e < hi; ++e)
      if (digit_at(e) != o.digit_at(e)) return false;
    return true;
  }
  bool operator!=(const PAdicScalar& o) const { return !(*this == o); }

 private:
  static void check_prime(long long p) {
    if (p < 2) throw std::domain_error("prime must be >= 2");
  }
  void require_same_prime(const PAdicScalar& o) const {
    if (prime_ != o.prime_) throw std::domain_error("mixed primes");
  }
  static long long mod_inverse(long long a, long long m) {
    long long g = m, x = 0, x1 = 1, a1 = a;
    while (a1 != 0) {
      long long q = g / a1;
      g -= q * a1;
      std::swap(g, a1);
      x -= q * x1;
      std::swap(x, x1);
    }
    if (g != 1) throw std::domain_error("mod_inverse: not invertible");
    return ((x % m) + m) % m;
  }

  long long prime_;
  int order_;
  std::vector<uint32_t> digits_;
};

/// A point of Q_p^n: n scalars over a common prime. Norm is the max of the
/// coordinate norms.
class PAdicPoint {
 public:
  explicit PAdicPoint(std::vector<PAdicScalar> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) throw std::domain_error("empty point");
    for (const auto& c : coords_)
      if (c.prime() != coords_.front().prime()) throw std::domain_error("mixed primes");
  }

  static PAdicPoint origin(long long prime, int n) {
    return PAdicPoint(std::vector<PAdicScalar>(size_t(n), PAdicScalar::zero(prime)));
  }

  long long prime() const { return coords_.front().prime(); }
  int dim() const { return int(coords_.size()); }
  const PAdicScalar& operator[](int i) const { return coords_[size_t(i)]; }
  const std::vector<PAdicScalar>& coords() const { return coords_; }

  bool is_zero() const {
    return std::all_of(coords_.begin(), coords_.end(),
                       [](const PAdicScalar& c) { return c.is_zero(); });
  }

  /// ||x|| = p^e; throws for the zero point.
  int norm_exp() const {
    int best = std::numeric_limits<int>::min();
    bool any = false;
    for (const auto& c : coords_)
      if (!c.is_zero()) {
        best = std::max(best, c.norm_exp());
        any = true;
      }
    if (!any) throw std::domain_error("norm_exp of zero point");
    return best;
  }

  double norm() const {
    return is_zero() ? 0.0 : std::pow(double(prime()), double(norm_exp()));
  }

  PAdicPoint operator+(const PAdicPoint& o) const {
    require_compatible(o);
    std::vector<PAdicScalar> out;
    out.reserve(coords_.size());
    for (size_t i = 0; i < coords_.size(); ++i) out.push_back(coords_[i] + o.coords_[i]);
    return PAdicPoint(std::move(out));
  }

  PAdicPoint operator-(const PAdicPoint& o) const {
    require_compatible(o);
    std::vector<PAdicScalar> out;
    out.reserve(coords_.size());
    for (size_t i = 0; i < coords_.size(); ++i) out.push_back(coords_[i] - o.coords_[i]);
    return PAdicPoint(std::move(out));
  }

  bool operator==(const PAdicPoint& o) const { return coords_ == o.coords_; }

 private:
  void require_compatible(const PAdicPoint& o) const {
    if (o.dim() != dim() || o.prime() != prime()) throw std::domain_error("incompatible points");
  }
  std::vector<PAdicScalar> coords_;
};

inline PAdicScalar dot(const PAdicPoint& x, const PAdicPoint& y) {
  if (x.dim() != y.dim()) throw std::domain_error("dot: dimension mismatch");
  PAdicScalar acc = PAdicScalar::zero(x.prime());
  for (int i = 0; i < x.dim(); ++i) acc = acc + x[i] * y[i];
  return acc;
}

/// ||x||_p as an exact power of p (0 for the zero point).
inline Rational norm_rational(const PAdicPoint& x) {
  if (x.is_zero()) return Rational::zero();
  return Rational::pow_int(x.prime(), x.norm_exp());
}

inline double norm(const PAdicPoint& x) { return x.norm(); }

/// Fractional part {x}_p as an exact rational in [0,1).
inline Rational fractional_part(const PAdicScalar& x) {
  if (x.is_zero() || x.order() >= 0) return Rational::zero();
  int g = -x.order();  // number of negative-exponent digits
  __int128 num = 0;
  __int128 pk = 1;
  for (int j = 0; j < g; ++j) {
    num += pk * x.digit_at(x.order() + j);
    pk = detail::checked_mul(pk, x.prime());
  }
  return Rational(num, pk);
}

/// Standard additive character Psi(x) = exp(2 pi i {x}_p).
inline complex_t character(const PAdicScalar& x) {
  Rational f = fractional_part(x);
  if (f.is_zero()) return complex_t(1.0, 0.0);
  double angle = 2.0 * std::numbers::pi * f.to_double();
  return std::polar(1.0, angle);
}

/// Psi(x . y) for points (the n-dimensional character of the pairing).
inline complex_t character_dot(const PAdicPoint& x, const PAdicPoint& y) {
  return character(dot(x, y));
}

/// Ball B_gamma(center) = { x : ||x - center|| <= p^gamma }.
class Ball {
 public:
  Ball(PAdicPoint center, int radius_exp)
      : center_(std::move(center)), radius_exp_(radius_exp) {}

  static Ball unit_ball(long long prime, int n) {
    return Ball(PAdicPoint::origin(prime, n), 0);
  }

  const PAdicPoint& center() const { return center_; }
  int radius_exp() const { return radius_exp_; }
  long long prime() const { return center_.prime(); }
  int dim() const { return center_.dim(); }

  bool contains(const PAdicPoint& x) const {
    for (int i = 0; i < center_.dim(); ++i) {
      PAdicScalar d = x[i] - center_[i];
      if (!d.is_zero() && d.order() < -radius_exp_) return false;
    }
    return true;
  }

  /// Haar volume p^(n*gamma), exact.
  Rational volume() const {
    return Rational::pow_int(prime(), (long long)radius_exp_ * dim());
  }

  double volume_d() const {
    return std::pow(double(prime()), double(radius_exp_) * dim());
  }

  bool contains_ball(const Ball& o) const {
    return o.radius_exp_ <= radius_exp_ && contains(o.center_);
  }

  /// Ultrametricity: two balls are nested or disjoint, never partially
  /// overlapping.
  bool disjoint_from(const Ball& o) const {
    return !contains(o.center_) && !o.contains(center_);
  }

  bool same_ball(const Ball& o) const {
    return radius_exp_ == o.radius_exp_ && contains(o.center_);
  }

 private:
  PAdicPoint center_;
  int radius_exp_;
};

/// Volume of the intersection of two balls: one contains the other or they
/// are disjoint.
inline Rational intersection_volume(const Ball& a, const Ball& b) {
  if (a.contains_ball(b)) return b.volume();
  if (b.contains_ball(a)) return a.volume();
  return Rational::zero();
}

/// Same in binary64 (exact for the exponent ranges used in series work,
/// where the rational mantissas would overflow).
inline double intersection_volume_d(const Ball& a, const Ball& b) {
  if (a.contains_ball(b)) return b.volume_d();
  if (b.contains_ball(a)) return a.volume_d();
  return 0.0;
}

/// Exhaustive enumeration grid: coset representatives of B_{-L}^n inside
/// B_K^n, i.e. the p^{n(K+L)} points with digits at exponents -K..L-1.
/// This is the brute-force integration oracle used across the project.
class FiniteWindow {
 public:
  static constexpr long long kDefaultCosetCap = 1LL << 26;

  FiniteWindow(long long prime, int n, int outer_exp, int inner_exp,
               long long coset_cap = kDefaultCosetCap)
      : prime_(prime), n_(n), outer_exp_(outer_exp), inner_exp_(inner_exp), cap_(coset_cap) {
    if (n < 1) throw std::domain_error("window: n >= 1 required");
    if (outer_exp + inner_exp < 0) throw std::domain_error("window: K + L must be >= 0");
    long long digits_per_coord = outer_exp + inner_exp;
    long double count = std::pow((long double)prime, (long double)(digits_per_coord * n));
    coset_count_ = count > 4e18L ? std::numeric_limits<long long>::max() : (long long)count;
  }

  long long prime() const { return prime_; }
  int dim() const { return n_; }
  int outer_exp() const { return outer_exp_; }
  int inner_exp() const { return inner_exp_; }
  long long coset_count() const { return coset_count_; }

  /// Haar measure of each coset, p^{-nL}.
  Rational coset_measure() const {
    return Rational::pow_int(prime_, -(long long)inner_exp_ * n_);
  }

  double coset_measure_d() const {
    return std::pow(double(prime_), -double(inner_exp_) * n_);
  }

  /// Total measure covered, p^{nK}.
  Rational total_measure() const {
    return Rational::pow_int(prime_, (long long)outer_exp_ * n_);
  }

  /// Calls fn on every coset representative, in lexicographic digit order.
  /// Enumeration above the configured cap is refused (resource error).
  template <typename Fn>
  void for_each_rep(Fn&& fn) const {
    if (coset_count_ > cap_) throw std::length_error("window exceeds enumeration cap");
    int digits_per_coord = outer_exp_ + inner_exp_;
    std::vector<uint32_t> odo(size_t(n_ * digits_per_coord), 0);
    while (true) {
      std::vector<PAdicScalar> coords;
      coords.reserve(size_t(n_));
      for (int i = 0; i < n_; ++i) {
        std::vector<uint32_t> d(odo.begin() + i * digits_per_coord,
                                odo.begin() + (i + 1) * digits_per_coord);
        coords.push_back(PAdicScalar::from_digits(prime_, -outer_exp_, d));
      }
      fn(PAdicPoint(std::move(coords)));
      // odometer increment
      size_t j = 0;
      for (; j < odo.size(); ++j) {
        if (++odo[j] < uint32_t(prime_)) break;
        odo[j] = 0;
      }
      if (j == odo.size()) break;
    }
  }

 private:
  long long prime_;
  int n_;
  int outer_exp_;
  int inner_exp_;
  long long cap_;
  long long coset_count_;
};

/// Neumaier-compensated accumulator; the series work sums many cancelling
/// terms and plain += loses digits we need.
class KahanSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class KahanSumComplex {
 public:
  void add(complex_t v) {
    re_.add(v.real());
    im_.add(v.imag());
  }
  complex_t value() const { return complex_t(re_.value(), im_.value()); }

 private:
  KahanSum re_, im_;
};

/// Sum of f over the window's coset representatives weighted by the coset
/// measure. Exact quadrature for integrands locally constant at exponent
/// <= L on B_K (the caller asserts this).
template <typename Fn>
complex_t window_integrate(Fn&& f, const FiniteWindow& w) {
  KahanSumComplex acc;
  double meas = w.coset_measure_d();
  w.for_each_rep([&](const PAdicPoint& rep) { acc.add(complex_t(f(rep)) * meas); });
  return acc.value();
}

/// Sphere slice of a window sum: only representatives with ||rep|| = p^k.
template <typename Fn>
complex_t window_integrate_sphere(Fn&& f, const FiniteWindow& w, int k) {
  KahanSumComplex acc;
  double meas = w.coset_measure_d();
  w.for_each_rep([&](const PAdicPoint& rep) {
    if (!rep.is_zero() && rep.norm_exp() == k) acc.add(complex_t(f(rep)) * meas);
  });
  return acc.value();
}

/// Integral of Psi(x . xi) over the sphere ||xi|| = p^k, exact (the three
/// cases of the Fourier ball/sphere exchange):
///   p^{kn}(1 - p^{-n})  when ||x|| <= p^{-k},
///   -p^{(k-1)n}         when ||x|| =  p^{-k+1},
///   0                   when ||x|| >  p^{-k+1}.
inline Rational sphere_character_integral(const PAdicPoint& x, int k) {
  long long p = x.prime();
  long long n = x.dim();
  if (x.is_zero() || x.norm_exp() <= -k)
    return Rational::pow_int(p, (long long)k * n) - Rational::pow_int(p, ((long long)k - 1) * n);
  if (x.norm_exp() == -k + 1) return -Rational::pow_int(p, ((long long)k - 1) * n);
  return Rational::zero();
}

/// Same closed form, keyed by the norm exponent alone (m = log_p ||x||;
/// pass by_norm_exp = nullopt semantics via the zero flag).
inline double sphere_character_integral_d(bool x_is_zero, int m, int k, long long p, int n) {
  double pd = double(p);
  if (x_is_zero || m <= -k)
    return std::pow(pd, double(k) * n) * (1.0 - std::pow(pd, -double(n)));
  if (m == -k + 1) return -std::pow(pd, double(k - 1) * n);
  return 0.0;
}

}  // namespace padic
