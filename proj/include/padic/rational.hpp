#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace padic {

namespace detail {

inline __int128 abs128(__int128 v) { return v < 0 ? -v : v; }

inline __int128 gcd128(__int128 a, __int128 b) {
  a = abs128(a);
  b = abs128(b);
  while (b != 0) {
    __int128 r = a % b;
    a = b;
    b = r;
  }
  return a;
}

inline __int128 checked_mul(__int128 a, __int128 b) {
  __int128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("rational overflow (mul)");
  return r;
}

inline __int128 checked_add(__int128 a, __int128 b) {
  __int128 r;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("rational overflow (add)");
  return r;
}

inline std::string int128_to_string(__int128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? (unsigned __int128)(-v) : (unsigned __int128)v;
  std::string s;
  while (u != 0) {
    s.insert(s.begin(), char('0' + int(u % 10)));
    u /= 10;
  }
  return neg ? "-" + s : s;
}

}  // namespace detail

/// Exact rational arithmetic on 128-bit integers. Everything the sphere
/// integrals and ball volumes produce is of the form (integer) / p^e, so the
/// denominators stay within range at desk scale; overflow throws rather than
/// silently wrapping.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(long long n) : num_(n), den_(1) {}
  Rational(__int128 n, __int128 d) : num_(n), den_(d) { normalize(); }

  static Rational zero() { return Rational(); }
  static Rational one() { return Rational(1); }

  /// p^e for integer e of either sign.
  static Rational pow_int(long long base, long long e) {
    if (base <= 0) throw std::domain_error("pow_int: base must be positive");
    __int128 v = 1;
    long long k = e >= 0 ? e : -e;
    for (long long i = 0; i < k; ++i) v = detail::checked_mul(v, base);
    return e >= 0 ? Rational(v, 1) : Rational(1, v);
  }

  __int128 num() const { return num_; }
  __int128 den() const { return den_; }

  bool is_zero() const { return num_ == 0; }

  Rational operator-() const { return Rational(-num_, den_, no_normalize{}); }

  Rational operator+(const Rational& o) const {
    __int128 g = detail::gcd128(den_, o.den_);
    __int128 dl = den_ / g;
    __int128 dr = o.den_ / g;
    __int128 n = detail::checked_add(detail::checked_mul(num_, dr), detail::checked_mul(o.num_, dl));
    __int128 d = detail::checked_mul(dl, o.den_);
    return Rational(n, d);
  }

  Rational operator-(const Rational& o) const { return *this + (-o); }

  Rational operator*(const Rational& o) const {
    __int128 g1 = detail::gcd128(num_, o.den_);
    __int128 g2 = detail::gcd128(o.num_, den_);
    __int128 n = detail::checked_mul(num_ / g1, o.num_ / g2);
    __int128 d = detail::checked_mul(den_ / g2, o.den_ / g1);
    return Rational(n, d, no_normalize{});
  }

  Rational operator/(const Rational& o) const {
    if (o.num_ == 0) throw std::domain_error("rational division by zero");
    return *this * Rational(o.den_, o.num_);
  }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }

  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const {
    return detail::checked_mul(num_, o.den_) < detail::checked_mul(o.num_, den_);
  }
  bool operator<=(const Rational& o) const { return *this < o || *this == o; }
  bool operator>(const Rational& o) const { return o < *this; }
  bool operator>=(const Rational& o) const { return o <= *this; }

  double to_double() const {
    return double((long double)num_ / (long double)den_);
  }

  std::string to_string() const {
    if (den_ == 1) return detail::int128_to_string(num_);
    return detail::int128_to_string(num_) + "/" + detail::int128_to_string(den_);
  }

 private:
  struct no_normalize {};
  Rational(__int128 n, __int128 d, no_normalize) : num_(n), den_(d) {}

  void normalize() {
    if (den_ == 0) throw std::domain_error("rational with zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    if (num_ == 0) {
      den_ = 1;
      return;
    }
    __int128 g = detail::gcd128(num_, den_);
    num_ /= g;
    den_ /= g;
  }

  __int128 num_;
  __int128 den_;
};

}  // namespace padic
