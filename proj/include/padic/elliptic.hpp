#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "padic/core.hpp"
#include "padic/rng.hpp"

namespace padic {

/// Homogeneous polynomial of degree d in n variables with unit coefficients
/// (integers coprime to p), f(0) = 0.
class HomogeneousPoly {
 public:
  struct Monomial {
    std::vector<int> exps;  // exponent vector, entries sum to d
    long long coeff;        // coprime to p
  };

  HomogeneousPoly(long long prime, int n, int degree, std::vector<Monomial> monomials)
      : prime_(prime), n_(n), degree_(degree), monomials_(std::move(monomials)) {
    if (prime < 2) throw std::domain_error("poly: prime >= 2");
    if (n < 1 || degree < 1) throw std::domain_error("poly: n >= 1 and d >= 1");
    if (monomials_.empty()) throw std::domain_error("poly: no monomials (f = 0)");
    for (const auto& m : monomials_) {
      if (int(m.exps.size()) != n) throw std::domain_error("poly: exponent arity mismatch");
      int total = 0;
      for (int e : m.exps) {
        if (e < 0) throw std::domain_error("poly: negative exponent");
        total += e;
      }
      if (total != degree) throw std::domain_error("poly: monomial of wrong degree");
      if (total == 0) throw std::domain_error("poly: constant term (f(0) != 0)");
      if (m.coeff % prime == 0)
        throw std::domain_error("poly: coefficient not a p-adic unit");
    }
  }

  long long prime() const { return prime_; }
  int vars() const { return n_; }
  int degree() const { return degree_; }
  const std::vector<Monomial>& monomials() const { return monomials_; }

  /// f-bar evaluated at a point of F_p^n.
  long long eval_mod_p(const std::vector<long long>& x) const {
    long long acc = 0;
    for (const auto& m : monomials_) {
      long long term = ((m.coeff % prime_) + prime_) % prime_;
      for (int i = 0; i < n_; ++i)
        for (int e = 0; e < m.exps[size_t(i)]; ++e) term = (term * (x[size_t(i)] % prime_)) % prime_;
      acc = (acc + term) % prime_;
    }
    return acc;
  }

  /// f evaluated in p-adic digit arithmetic.
  PAdicScalar eval(const PAdicPoint& x) const {
    if (x.dim() != n_ || x.prime() != prime_) throw std::domain_error("poly: point mismatch");
    PAdicScalar acc = PAdicScalar::zero(prime_);
    for (const auto& m : monomials_) {
      PAdicScalar term = PAdicScalar::from_integer(prime_, m.coeff);
      for (int i = 0; i < n_; ++i)
        if (m.exps[size_t(i)] > 0) term = term * x[i].pow(unsigned(m.exps[size_t(i)]));
      acc = acc + term;
    }
    return acc;
  }

  HomogeneousPoly multiply(const HomogeneousPoly& o) const {
    if (o.prime_ != prime_ || o.n_ != n_) throw std::domain_error("poly: mixed rings");
    std::map<std::vector<int>, long long> combined;
    for (const auto& a : monomials_)
      for (const auto& b : o.monomials_) {
        std::vector<int> e(static_cast<size_t>(n_));
        for (int i = 0; i < n_; ++i) e[size_t(i)] = a.exps[size_t(i)] + b.exps[size_t(i)];
        combined[e] += a.coeff * b.coeff;
      }
    std::vector<Monomial> ms;
    for (auto& [e, c] : combined)
      if (c != 0) ms.push_back({e, c});
    return HomogeneousPoly(prime_, n_, degree_ + o.degree_, std::move(ms));
  }

  /// Extends the variable list (new variables get exponent 0).
  HomogeneousPoly extended(int new_n) const {
    std::vector<Monomial> ms = monomials_;
    for (auto& m : ms) m.exps.resize(size_t(new_n), 0);
    return HomogeneousPoly(prime_, new_n, degree_, std::move(ms));
  }

 private:
  long long prime_;
  int n_;
  int degree_;
  std::vector<Monomial> monomials_;
};

/// Ellipticity modulo p: the reduction has no root in F_p^n other than 0.
/// Exhaustive over the p^n points; refuses oversized enumerations.
inline bool is_elliptic_mod_p(const HomogeneousPoly& f, long long cap = 1LL << 26) {
  long long p = f.prime();
  int n = f.vars();
  long double count = std::pow((long double)p, (long double)n);
  if (count > (long double)cap) throw std::length_error("ellipticity enumeration above cap");
  std::vector<long long> x(size_t(n), 0);
  for (;;) {
    // odometer over F_p^n
    int i = 0;
    for (; i < n; ++i) {
      if (++x[size_t(i)] < p) break;
      x[size_t(i)] = 0;
    }
    if (i == n) break;  // wrapped: all points visited
    if (f.eval_mod_p(x) == 0) return false;
  }
  return true;
}

struct EllipticityWitness {
  std::vector<int> stratum;      // the subset I (1-based indices)
  std::vector<long long> point;  // the root found on that stratum
};

/// Strong ellipticity modulo p: for every non-empty I in {1..n}, the
/// restriction of f-bar to the stratum { x_i != 0 iff i in I } has no root.
/// Returns the first failing (I, x) as a witness.
inline bool is_strongly_elliptic(const HomogeneousPoly& f,
                                 std::optional<EllipticityWitness>* witness = nullptr,
                                 long long cap = 1LL << 26) {
  long long p = f.prime();
  int n = f.vars();
  long double count = std::pow((long double)p, (long double)n);
  if (count > (long double)cap) throw std::length_error("ellipticity enumeration above cap");
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    // enumerate the stratum: coordinates in I range over F_p^x, others 0
    std::vector<long long> digit(idx.size(), 1);
    for (;;) {
      std::vector<long long> x(size_t(n), 0);
      for (size_t j = 0; j < idx.size(); ++j) x[size_t(idx[j])] = digit[j];
      if (f.eval_mod_p(x) == 0) {
        if (witness) {
          EllipticityWitness w;
          for (int i : idx) w.stratum.push_back(i + 1);
          w.point = x;
          *witness = std::move(w);
        }
        return false;
      }
      size_t j = 0;
      for (; j < digit.size(); ++j) {
        if (++digit[j] < p) break;
        digit[j] = 1;
      }
      if (j == digit.size()) break;
    }
  }
  if (witness) witness->reset();
  return true;
}

/// The inductive generator: start from g = x_1 and repeatedly form
/// g^l - upsilon x_{k+1}^{l deg(g)} with upsilon lacking an l-th root in
/// F_p^x. For p = 2 no such upsilon exists and the construction stops at
/// n = 1, reported as unsupported.
inline HomogeneousPoly generate_strongly_elliptic(long long p, int n_target, uint64_t seed) {
  if (p < 2) throw std::domain_error("generate: prime >= 2");
  if (n_target < 1) throw std::domain_error("generate: n >= 1");
  HomogeneousPoly g(p, 1, 1, {{{1}, 1}});
  if (n_target == 1) return g;
  if (p == 2)
    throw std::domain_error(
        "generate: F_2^x has no power non-residues; the inductive construction is "
        "unsupported for p = 2 beyond one variable");

  CounterRng rng(seed, 0x9e3779b97f4a7c15ull);
  for (int k = 1; k < n_target; ++k) {
    // smallest l >= 2 admitting a non-l-th-power, then a seeded pick among them
    int l_pick = 0;
    std::vector<long long> candidates;
    for (int l = 2; l < int(p); ++l) {
      std::vector<bool> is_power(size_t(p), false);
      for (long long w = 1; w < p; ++w) {
        long long v = 1;
        for (int e = 0; e < l; ++e) v = (v * w) % p;
        is_power[size_t(v)] = true;
      }
      for (long long u = 2; u < p; ++u)
        if (!is_power[size_t(u)]) candidates.push_back(u);
      if (!candidates.empty()) {
        l_pick = l;
        break;
      }
    }
    if (candidates.empty())
      throw std::domain_error("generate: no power non-residue found for any l");
    long long upsilon = candidates[size_t(rng.uniform_int(candidates.size()))];

    int d = g.degree();
    HomogeneousPoly gl = g;
    for (int e = 1; e < l_pick; ++e) gl = gl.multiply(g);
    gl = gl.extended(k + 1);
    std::vector<HomogeneousPoly::Monomial> ms = gl.monomials();
    std::vector<int> pure(size_t(k + 1), 0);
    pure[size_t(k)] = l_pick * d;
    ms.push_back({pure, -upsilon});
    g = HomogeneousPoly(p, k + 1, l_pick * d, std::move(ms));
  }
  return g;
}

struct NormIdentityReport {
  long long samples = 0;
  long long violations = 0;
  long long precision_failures = 0;  // ord(f(x)) unresolved within the digit window
};

/// The norm identity |f(x)|_p = ||x||_p^d, checked exactly (both sides are
/// powers of p) on the supplied sample points.
inline NormIdentityReport norm_identity_check(const HomogeneousPoly& f,
                                              const std::vector<PAdicPoint>& samples) {
  NormIdentityReport rep;
  for (const auto& x : samples) {
    ++rep.samples;
    PAdicScalar v = f.eval(x);
    if (x.is_zero()) {
      if (!v.is_zero()) ++rep.violations;
      continue;
    }
    if (v.is_zero()) {
      // all computed digits vanished: cancellation beyond the window
      ++rep.precision_failures;
      continue;
    }
    if (-v.order() != f.degree() * x.norm_exp()) ++rep.violations;
  }
  return rep;
}

/// Random sample points with norm exponents in [m_lo, m_hi].
inline std::vector<PAdicPoint> random_window_points(long long p, int n, int m_lo, int m_hi,
                                                    long long count, uint64_t seed,
                                                    int window = PAdicScalar::kDefaultWindow) {
  CounterRng rng(seed, 0x5de5ull);
  std::vector<PAdicPoint> out;
  out.reserve(size_t(count));
  for (long long i = 0; i < count; ++i) {
    std::vector<PAdicScalar> cs;
    cs.reserve(size_t(n));
    for (int c = 0; c < n; ++c) {
      int m = m_lo + int(rng.uniform_int(uint64_t(m_hi - m_lo + 1)));
      std::vector<uint32_t> d(static_cast<size_t>(window));
      d[0] = 1 + uint32_t(rng.uniform_int(uint64_t(p - 1)));
      for (size_t j = 1; j < d.size(); ++j) d[j] = uint32_t(rng.uniform_int(uint64_t(p)));
      cs.push_back(PAdicScalar::from_digits(p, -m, d));
    }
    out.emplace_back(std::move(cs));
  }
  return out;
}

}  // namespace padic
