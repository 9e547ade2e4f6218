#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "padic/core.hpp"
#include "padic/heat_kernel.hpp"
#include "padic/radial.hpp"
#include "padic/taibleson.hpp"

namespace padic {

/// Time factor of a separable source.
struct TimeProfile {
  enum class Kind { One, Poly, Exponential };
  Kind kind = Kind::One;
  std::vector<double> coeffs;  // Poly: sum coeffs[i] tau^i
  double scale = 1.0;          // Exponential: scale * exp(rate * tau)
  double rate = 0.0;

  static TimeProfile one() { return {}; }
  static TimeProfile poly(std::vector<double> c) { return {Kind::Poly, std::move(c), 0.0, 0.0}; }
  static TimeProfile exponential(double s, double r) { return {Kind::Exponential, {}, s, r}; }

  double operator()(double tau) const {
    switch (kind) {
      case Kind::One: return 1.0;
      case Kind::Poly: {
        double v = 0.0;
        for (size_t i = coeffs.size(); i-- > 0;) v = v * tau + coeffs[i];
        return v;
      }
      case Kind::Exponential: return scale * std::exp(rate * tau);
    }
    return 0.0;
  }
};

/// Source term f(x, t): zero, constant in t, or separable spatial * time.
struct SourceTerm {
  enum class Kind { Zero, Constant, Separable };
  Kind kind = Kind::Zero;
  std::optional<LocallyConstantFunction> spatial;
  TimeProfile time;

  static SourceTerm zero() { return {}; }
  static SourceTerm constant(LocallyConstantFunction s) {
    return {Kind::Constant, std::move(s), TimeProfile::one()};
  }
  static SourceTerm separable(LocallyConstantFunction s, TimeProfile g) {
    return {Kind::Separable, std::move(s), std::move(g)};
  }

  bool is_zero() const { return kind == Kind::Zero; }

  complex_t evaluate(const PAdicPoint& x, double tau) const {
    if (kind == Kind::Zero) return {0.0, 0.0};
    double g = kind == Kind::Constant ? 1.0 : time(tau);
    return spatial->evaluate(x) * g;
  }

  double growth_exp() const { return kind == Kind::Zero ? 0.0 : spatial->growth_exp(); }
  int loc_exp() const { return kind == Kind::Zero ? 0 : spatial->loc_exp(); }
};

/// The Cauchy problem du/dt + a D_T^alpha u = f, u(.,0) = phi, on (0, T],
/// with datum and source in M_lambda, 0 <= lambda < alpha.
struct CauchyProblem {
  KernelParams params;
  LocallyConstantFunction phi;
  SourceTerm source;
  double T;

  double lambda() const { return std::max(phi.growth_exp(), source.growth_exp()); }
  int loc_exp() const { return std::max(phi.loc_exp(), source.loc_exp()); }

  void validate() const {
    params.validate();
    if (T <= 0.0) throw std::domain_error("cauchy: T > 0 required");
    if (lambda() >= params.alpha)
      throw std::domain_error(
          "cauchy: growth exponent must satisfy 0 <= lambda < alpha (existence hypothesis)");
    if (!phi.has_tail())
      throw std::domain_error("cauchy: initial datum needs a tail model (total function)");
  }
};

namespace detail {

inline FiniteWindow convolution_window(const LocallyConstantFunction& f, const PAdicPoint& x,
                                       long long prime, int n) {
  int x_exp = x.is_zero() ? 0 : x.norm_exp();
  int supp = f.support_exp();
  if (supp == std::numeric_limits<int>::min()) supp = 0;
  int tab = f.has_tail() ? f.tail()->m_hi() : 0;
  int K = std::max({supp, x_exp, tab, 0}) + 2;
  return FiniteWindow(prime, n, K, std::max(f.loc_exp(), -K + 1));
}

/// Adaptive Simpson on [lo, hi] with a uniform panel floor. Panels that
/// exhaust the depth budget contribute their last extrapolation-error
/// estimate to `unresolved`, so the caller can tell when the requested
/// tolerance was not certified.
template <typename Fn>
complex_t adaptive_simpson(Fn&& f, double lo, double hi, double tol, int floor_panels,
                           double* unresolved = nullptr, int max_depth = 24) {
  auto simpson = [](complex_t fa, complex_t fm, complex_t fb, double h) {
    return (h / 6.0) * (fa + 4.0 * fm + fb);
  };
  double leftover = 0.0;
  std::function<complex_t(double, double, complex_t, complex_t, complex_t, complex_t, double, int)>
      rec = [&](double a, double b, complex_t fa, complex_t fm, complex_t fb, complex_t whole,
                double eps, int depth) -> complex_t {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    complex_t flm = f(lm), frm = f(rm);
    complex_t left = simpson(fa, flm, fm, m - a);
    complex_t right = simpson(fm, frm, fb, b - m);
    complex_t delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    if (depth <= 0) {
      leftover += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    return rec(a, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
           rec(m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
  };

  KahanSumComplex total;
  double h = (hi - lo) / floor_panels;
  complex_t f_right = f(lo);
  for (int i = 0; i < floor_panels; ++i) {
    double a = lo + i * h;
    double b = i + 1 == floor_panels ? hi : a + h;
    complex_t fa = f_right;
    complex_t fm = f(0.5 * (a + b));
    complex_t fb = f(b);
    f_right = fb;
    complex_t whole = simpson(fa, fm, fb, b - a);
    total.add(rec(a, b, fa, fm, fb, whole, tol / floor_panels, max_depth));
  }
  if (unresolved) *unresolved = leftover;
  return total.value();
}

}  // namespace detail

/// u1(x,t) = int Z(x - xi, t) phi(xi) d^n xi; at t = 0 the datum itself.
inline complex_t solve_homogeneous(const CauchyProblem& prob, KernelCache& cache,
                                   const PAdicPoint& x, double t) {
  prob.validate();
  if (t < 0.0 || t > prob.T) throw std::domain_error("solve: t in [0, T] required");
  if (t == 0.0) return prob.phi.evaluate(x);
  auto slice = cache.slice(t);
  FiniteWindow w = detail::convolution_window(prob.phi, x, prob.params.prime, prob.params.n);
  return convolve_window(prob.phi, slice->radial(), x, w, prob.params.series).value;
}

struct DuhamelOptions {
  double tol = 1e-10;
  int floor_panels = 64;
};

/// u2(x,t) = int_0^t ( int Z(x - xi, t - tau) f(xi, tau) d^n xi ) d tau.
/// The inner integral extends continuously to tau = t with value f(x, t),
/// so the quadrature needs no endpoint special-casing.
inline complex_t solve_duhamel(const CauchyProblem& prob, KernelCache& cache, const PAdicPoint& x,
                               double t, DuhamelOptions opt = {}) {
  prob.validate();
  if (t < 0.0 || t > prob.T) throw std::domain_error("solve: t in [0, T] required");
  if (prob.source.is_zero() || t == 0.0) return {0.0, 0.0};

  const LocallyConstantFunction& spatial = *prob.source.spatial;
  FiniteWindow w = detail::convolution_window(spatial, x, prob.params.prime, prob.params.n);
  auto spatial_conv = [&](double s) -> complex_t {  // int Z(x-xi, s) spatial(xi) dxi
    auto slice = cache.slice(s);
    return convolve_window(spatial, slice->radial(), x, w, prob.params.series).value;
  };
  auto integrand = [&](double tau) -> complex_t {
    if (tau >= t) return prob.source.evaluate(x, t);
    double g = prob.source.kind == SourceTerm::Kind::Constant ? 1.0 : prob.source.time(tau);
    if (g == 0.0) return {0.0, 0.0};
    return g * spatial_conv(t - tau);
  };
  double unresolved = 0.0;
  complex_t value =
      detail::adaptive_simpson(integrand, 0.0, t, opt.tol, opt.floor_panels, &unresolved);
  if (unresolved > opt.tol)
    throw std::runtime_error("duhamel quadrature: tolerance unreachable, achieved about " +
                             std::to_string(unresolved));
  return value;
}

struct GrowthCertificate {
  double constant = 0.0;  // C with |u| <= C (1 + ||x||^lambda) on the probe grid
  double lambda = 0.0;
};

/// The solved field u = u1 + u2 with its shared kernel cache.
class SolutionField {
 public:
  SolutionField(CauchyProblem prob, std::shared_ptr<KernelCache> cache)
      : prob_(std::move(prob)), cache_(std::move(cache)) {}

  const CauchyProblem& problem() const { return prob_; }
  KernelCache& cache() const { return *cache_; }

  complex_t evaluate(const PAdicPoint& x, double t) const {
    return solve_homogeneous(prob_, *cache_, x, t) + solve_duhamel(prob_, *cache_, x, t);
  }

  /// Measures C = sup |u| / (1 + ||x||^lambda) over a probe grid of sphere
  /// radii and times (growth certificate: one C for all t <= T).
  GrowthCertificate certify_growth(const std::vector<int>& m_probes,
                                   const std::vector<double>& t_probes) const {
    GrowthCertificate cert;
    cert.lambda = prob_.lambda();
    long long p = prob_.params.prime;
    int n = prob_.params.n;
    for (double t : t_probes) {
      for (int m : m_probes) {
        PAdicPoint x = sphere_point(p, n, m);
        double w = 1.0 + std::pow(double(p), double(m) * cert.lambda);
        cert.constant = std::max(cert.constant, std::abs(evaluate(x, t)) / w);
      }
      PAdicPoint o = PAdicPoint::origin(p, n);
      cert.constant = std::max(cert.constant, std::abs(evaluate(o, t)) / 2.0);
    }
    return cert;
  }

  /// Canonical point on the sphere ||x|| = p^m: (p^{-m}, 0, ..., 0).
  static PAdicPoint sphere_point(long long prime, int n, int m) {
    std::vector<PAdicScalar> cs;
    cs.reserve(size_t(n));
    cs.push_back(PAdicScalar::from_digits(prime, -m, {1}));
    for (int i = 1; i < n; ++i) cs.push_back(PAdicScalar::zero(prime));
    return PAdicPoint(std::move(cs));
  }

 private:
  CauchyProblem prob_;
  std::shared_ptr<KernelCache> cache_;
};

inline SolutionField solve(const CauchyProblem& prob) {
  prob.validate();
  auto cache = std::make_shared<KernelCache>(prob.params);
  return SolutionField(prob, std::move(cache));
}

/// Freezes u(., t) as a locally constant function: window cosets carry the
/// exact values, and beyond the window the field is radial (all problem data
/// here have radial far fields), sampled through an evaluator tail.
inline LocallyConstantFunction materialize_solution(const SolutionField& u, double t,
                                                    int window_exp) {
  const CauchyProblem& prob = u.problem();
  long long p = prob.params.prime;
  int n = prob.params.n;
  int l = prob.loc_exp();
  FiniteWindow w(p, n, window_exp, l);
  std::vector<LocallyConstantFunction::Piece> pieces;
  pieces.reserve(size_t(std::min(w.coset_count(), (long long)(1 << 20))));
  w.for_each_rep([&](const PAdicPoint& rep) {
    pieces.push_back({Ball(rep, -l), u.evaluate(rep, t)});
  });
  // the tail closes over its own copy of the field, so the snapshot stays
  // valid independently of the caller's object
  auto far = [field = u, t, p, n](int m) -> complex_t {
    return field.evaluate(SolutionField::sphere_point(p, n, m), t);
  };
  RadialFunction tail(p, n, window_exp + 1, {far(window_exp + 1)}, {0.0, 0.0},
                      TailLo::zero(), TailHi::evaluator(far));
  return LocallyConstantFunction(std::move(pieces), std::move(tail), l, prob.lambda(),
                                 prob.phi.growth_const(), /*validate=*/false);
}

struct ResidualEntry {
  int m = 0;  // norm exponent of the probe, INT_MIN for the origin
  double t = 0.0;
  double residual = 0.0;
};

struct ResidualReport {
  double max_abs = 0.0;
  std::vector<ResidualEntry> entries;
};

struct ResidualOptions {
  double fd_step = 1e-4;
  int window_exp = 6;
};

/// Verifies du/dt + a (D_T^alpha u) - f = 0 pointwise: the time derivative
/// by central differences, the operator by the hypersingular integral
/// applied to a frozen snapshot of u(., t).
inline ResidualReport residual_check(const SolutionField& u, const std::vector<int>& m_probes,
                                     bool include_origin, const std::vector<double>& t_probes,
                                     ResidualOptions opt = {}) {
  const CauchyProblem& prob = u.problem();
  long long p = prob.params.prime;
  int n = prob.params.n;
  OperatorParams op{p, n, prob.params.alpha, prob.params.series};

  ResidualReport rep;
  for (double t : t_probes) {
    if (t - opt.fd_step <= 0.0 || t + opt.fd_step > prob.T)
      throw std::domain_error("residual_check: t +- h must stay inside (0, T]");
    LocallyConstantFunction snapshot = materialize_solution(u, t, opt.window_exp);
    auto probe = [&](const PAdicPoint& x, int m_tag) {
      complex_t up = u.evaluate(x, t + opt.fd_step);
      complex_t um = u.evaluate(x, t - opt.fd_step);
      complex_t du_dt = (up - um) / (2.0 * opt.fd_step);
      complex_t Du = apply_hypersingular(snapshot, op, x);
      complex_t r = du_dt + prob.params.a * Du - prob.source.evaluate(x, t);
      rep.entries.push_back({m_tag, t, std::abs(r)});
      rep.max_abs = std::max(rep.max_abs, std::abs(r));
    };
    for (int m : m_probes) probe(SolutionField::sphere_point(p, n, m), m);
    if (include_origin) probe(PAdicPoint::origin(p, n), std::numeric_limits<int>::min());
  }
  return rep;
}

}  // namespace padic
