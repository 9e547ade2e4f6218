#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "padic/core.hpp"

namespace padic {

/// Tail model below the tabulated radius range.
struct TailLo {
  enum class Kind { Zero, Constant, Evaluator };
  Kind kind = Kind::Zero;
  complex_t value{0.0, 0.0};                    // Constant
  std::function<complex_t(int)> eval;           // Evaluator, by radius exponent

  static TailLo zero() { return {}; }
  static TailLo constant(complex_t v) { return {Kind::Constant, v, nullptr}; }
  static TailLo evaluator(std::function<complex_t(int)> f) {
    return {Kind::Evaluator, {}, std::move(f)};
  }
};

/// Tail model above the tabulated radius range. The power law is
/// c * p^(m*sigma) on the sphere of radius p^m.
struct TailHi {
  enum class Kind { Zero, PowerLaw, Evaluator };
  Kind kind = Kind::Zero;
  complex_t coeff{0.0, 0.0};
  double sigma = 0.0;
  std::function<complex_t(int)> eval;

  static TailHi zero() { return {}; }
  static TailHi power_law(complex_t c, double sigma) { return {Kind::PowerLaw, c, sigma, nullptr}; }
  static TailHi evaluator(std::function<complex_t(int)> f) {
    return {Kind::Evaluator, {}, 0.0, std::move(f)};
  }
};

/// A function of ||x|| alone: tabulated sphere values for radius exponents
/// in [m_lo, m_hi], tail models outside, and a separate value at x = 0
/// (which lies on no sphere).
class RadialFunction {
 public:
  RadialFunction(long long prime, int n, int m_lo, std::vector<complex_t> table,
                 complex_t value_at_zero, TailLo tail_lo = TailLo::zero(),
                 TailHi tail_hi = TailHi::zero())
      : prime_(prime),
        n_(n),
        m_lo_(m_lo),
        table_(std::move(table)),
        value_at_zero_(value_at_zero),
        tail_lo_(std::move(tail_lo)),
        tail_hi_(std::move(tail_hi)) {
    if (n < 1) throw std::domain_error("radial function: n >= 1");
  }

  static RadialFunction zero_function(long long prime, int n) {
    return RadialFunction(prime, n, 0, {}, {0.0, 0.0});
  }

  /// Indicator of the ball ||x|| <= p^gamma as a radial function.
  static RadialFunction ball_indicator(long long prime, int n, int gamma) {
    std::vector<complex_t> tab{complex_t(1.0, 0.0)};
    RadialFunction f(prime, n, gamma, std::move(tab), complex_t(1.0, 0.0),
                     TailLo::constant(complex_t(1.0, 0.0)), TailHi::zero());
    return f;
  }

  long long prime() const { return prime_; }
  int dim() const { return n_; }
  int m_lo() const { return m_lo_; }
  int m_hi() const { return m_lo_ + int(table_.size()) - 1; }
  complex_t value_at_zero() const { return value_at_zero_; }
  const TailLo& tail_lo() const { return tail_lo_; }
  const TailHi& tail_hi() const { return tail_hi_; }

  /// Value on the sphere ||x|| = p^m.
  complex_t at_exp(int m) const {
    if (!table_.empty() && m >= m_lo_ && m <= m_hi()) return table_[size_t(m - m_lo_)];
    if (table_.empty() || m < m_lo_) {
      switch (tail_lo_.kind) {
        case TailLo::Kind::Zero: return {0.0, 0.0};
        case TailLo::Kind::Constant: return tail_lo_.value;
        case TailLo::Kind::Evaluator: return tail_lo_.eval(m);
      }
    }
    switch (tail_hi_.kind) {
      case TailHi::Kind::Zero: return {0.0, 0.0};
      case TailHi::Kind::PowerLaw:
        return tail_hi_.coeff * std::pow(double(prime_), double(m) * tail_hi_.sigma);
      case TailHi::Kind::Evaluator: return tail_hi_.eval(m);
    }
    return {0.0, 0.0};
  }

  complex_t evaluate(const PAdicPoint& x) const {
    if (x.is_zero()) return value_at_zero_;
    return at_exp(x.norm_exp());
  }

 private:
  long long prime_;
  int n_;
  int m_lo_;
  std::vector<complex_t> table_;
  complex_t value_at_zero_;
  TailLo tail_lo_;
  TailHi tail_hi_;
};

/// Series-truncation policy shared by the radial sums.
struct SeriesPolicy {
  double eps = 1e-16;   // relative term cutoff
  int hard_cap = 400;   // max sphere indices per direction
};

/// Integral over Q_p^n of a radial function: sum of sphere masses
/// f(m) p^{mn} (1 - p^{-n}) plus closed-form tail contributions.
/// Throws std::domain_error when a tail model diverges.
inline complex_t integrate_radial(const RadialFunction& f, SeriesPolicy pol = {}) {
  long long p = f.prime();
  int n = f.dim();
  double pd = double(p);
  double sphere_factor = 1.0 - std::pow(pd, -double(n));
  KahanSumComplex acc;
  auto sphere_vol = [&](int m) { return std::pow(pd, double(m) * n) * sphere_factor; };

  for (int m = f.m_lo(); m <= f.m_hi(); ++m) acc.add(f.at_exp(m) * sphere_vol(m));

  // below the table
  switch (f.tail_lo().kind) {
    case TailLo::Kind::Zero:
      break;
    case TailLo::Kind::Constant: {
      // sum_{m < m_lo} p^{mn}(1-p^{-n}) = p^{(m_lo-1)n}
      acc.add(f.tail_lo().value * std::pow(pd, double(f.m_lo() - 1) * n));
      break;
    }
    case TailLo::Kind::Evaluator: {
      double scale = std::abs(acc.value()) + 1e-300;
      for (int j = 1; j <= pol.hard_cap; ++j) {
        complex_t term = f.at_exp(f.m_lo() - j) * sphere_vol(f.m_lo() - j);
        acc.add(term);
        if (std::abs(term) < pol.eps * std::max(scale, std::abs(acc.value()))) break;
        if (j == pol.hard_cap) throw std::domain_error("integrate_radial: lower tail did not converge");
      }
      break;
    }
  }

  // above the table
  switch (f.tail_hi().kind) {
    case TailHi::Kind::Zero:
      break;
    case TailHi::Kind::PowerLaw: {
      double sigma = f.tail_hi().sigma;
      if (sigma + n >= 0.0)
        throw std::domain_error("integrate_radial: divergent power-law tail (sigma >= -n)");
      // sum_{m > m_hi} c p^{m(sigma+n)} (1-p^{-n})
      double r = std::pow(pd, sigma + n);
      acc.add(f.tail_hi().coeff * sphere_factor * std::pow(pd, double(f.m_hi() + 1) * (sigma + n)) /
              (1.0 - r));
      break;
    }
    case TailHi::Kind::Evaluator: {
      double scale = std::abs(acc.value()) + 1e-300;
      double prev = std::numeric_limits<double>::infinity();
      int growing = 0;
      for (int j = 1; j <= pol.hard_cap; ++j) {
        complex_t term = f.at_exp(f.m_hi() + j) * sphere_vol(f.m_hi() + j);
        acc.add(term);
        double mag = std::abs(term);
        if (mag < pol.eps * std::max(scale, std::abs(acc.value()))) break;
        growing = mag > prev ? growing + 1 : 0;
        if (growing > 24) throw std::domain_error("integrate_radial: upper tail diverges");
        prev = mag;
        if (j == pol.hard_cap) throw std::domain_error("integrate_radial: upper tail did not converge");
      }
      break;
    }
  }
  return acc.value();
}

/// Mass of the ball ||x|| <= p^gamma under a radial density:
/// sum_{m <= gamma} f(m) p^{mn}(1-p^{-n}).
inline complex_t radial_ball_mass(const RadialFunction& f, int gamma, SeriesPolicy pol = {}) {
  long long p = f.prime();
  int n = f.dim();
  double pd = double(p);
  double sphere_factor = 1.0 - std::pow(pd, -double(n));
  KahanSumComplex acc;
  int top = std::min(gamma, f.m_hi());
  for (int m = f.m_lo(); m <= top; ++m)
    acc.add(f.at_exp(m) * std::pow(pd, double(m) * n) * sphere_factor);
  if (gamma > f.m_hi()) {
    // tabulate-to-gamma range served by the upper tail model
    switch (f.tail_hi().kind) {
      case TailHi::Kind::Zero:
        break;
      case TailHi::Kind::PowerLaw: {
        double sigma = f.tail_hi().sigma;
        double r = std::pow(pd, sigma + n);
        // finite geometric block m in (m_hi, gamma]
        double lo = std::pow(pd, double(f.m_hi() + 1) * (sigma + n));
        double hi = std::pow(pd, double(gamma + 1) * (sigma + n));
        double block = r == 1.0 ? double(gamma - f.m_hi()) * lo : (lo - hi) / (1.0 - r);
        acc.add(f.tail_hi().coeff * sphere_factor * block);
        break;
      }
      case TailHi::Kind::Evaluator: {
        for (int m = f.m_hi() + 1; m <= gamma; ++m)
          acc.add(f.at_exp(m) * std::pow(pd, double(m) * n) * sphere_factor);
        break;
      }
    }
  }
  int lo_end = std::min(gamma, f.m_lo() - 1);
  switch (f.tail_lo().kind) {
    case TailLo::Kind::Zero:
      break;
    case TailLo::Kind::Constant:
      acc.add(f.tail_lo().value * std::pow(pd, double(lo_end) * n));
      break;
    case TailLo::Kind::Evaluator: {
      double scale = std::abs(acc.value()) + 1e-300;
      for (int j = 0; j <= pol.hard_cap; ++j) {
        int m = lo_end - j;
        complex_t term = f.at_exp(m) * std::pow(pd, double(m) * n) * sphere_factor;
        acc.add(term);
        if (std::abs(term) < pol.eps * std::max(scale, std::abs(acc.value()))) break;
        if (j == pol.hard_cap) throw std::domain_error("radial_ball_mass: lower tail did not converge");
      }
      break;
    }
  }
  return acc.value();
}

/// Piecewise-constant function: disjoint (ball, value) pieces, an optional
/// radial tail outside the pieces, the exponent of local constancy l
/// (phi(x + x') = phi(x) for ||x'|| <= p^{-l}) and an M_lambda growth
/// certificate |phi| <= C (1 + ||x||^lambda).
class LocallyConstantFunction {
 public:
  struct Piece {
    Ball ball;
    complex_t value;
  };

  LocallyConstantFunction(std::vector<Piece> pieces, std::optional<RadialFunction> tail,
                          int loc_exp, double growth_exp = 0.0, double growth_const = 1.0,
                          bool validate = true)
      : pieces_(std::move(pieces)),
        tail_(std::move(tail)),
        loc_exp_(loc_exp),
        growth_exp_(growth_exp),
        growth_const_(growth_const) {
    if (growth_exp_ < 0.0) throw std::domain_error("growth exponent must be >= 0");
    if (validate) validate_disjoint();
  }

  /// Indicator of a single ball, extended by zero.
  static LocallyConstantFunction indicator(Ball b, complex_t value = {1.0, 0.0}) {
    int l = -b.radius_exp();
    std::vector<Piece> ps{{std::move(b), value}};
    auto zero_tail = RadialFunction::zero_function(ps.front().ball.prime(), ps.front().ball.dim());
    return LocallyConstantFunction(std::move(ps), zero_tail, l, 0.0, std::abs(value));
  }

  /// Constant function c on all of Q_p^n.
  static LocallyConstantFunction constant(long long prime, int n, complex_t c) {
    RadialFunction tail(prime, n, 0, {c}, c, TailLo::constant(c),
                        TailHi::evaluator([c](int) { return c; }));
    return LocallyConstantFunction({}, std::move(tail), 0, 0.0, std::abs(c) + 1e-300);
  }

  /// Builds a layered description (possibly nested balls, innermost wins)
  /// by refining it into disjoint pieces.
  static LocallyConstantFunction layered(std::vector<Piece> layers,
                                         std::optional<RadialFunction> tail, int loc_exp,
                                         double growth_exp = 0.0, double growth_const = 1.0);

  int piece_count() const { return int(pieces_.size()); }
  const std::vector<Piece>& pieces() const { return pieces_; }
  const std::optional<RadialFunction>& tail() const { return tail_; }
  int loc_exp() const { return loc_exp_; }
  double growth_exp() const { return growth_exp_; }
  double growth_const() const { return growth_const_; }

  long long prime() const {
    return pieces_.empty() ? tail_->prime() : pieces_.front().ball.prime();
  }
  int dim() const { return pieces_.empty() ? tail_->dim() : pieces_.front().ball.dim(); }

  bool has_tail() const { return tail_.has_value(); }

  /// True when the function vanishes outside its pieces.
  bool compactly_supported() const {
    if (!tail_) return true;  // partial function; treated as compact by callers that checked
    if (tail_->tail_hi().kind != TailHi::Kind::Zero) return false;
    if (tail_->tail_lo().kind == TailLo::Kind::Constant && std::abs(tail_->tail_lo().value) != 0.0)
      return false;
    if (tail_->tail_lo().kind == TailLo::Kind::Evaluator) return false;
    for (int m = tail_->m_lo(); m <= tail_->m_hi(); ++m)
      if (std::abs(tail_->at_exp(m)) != 0.0) return false;
    return std::abs(tail_->value_at_zero()) == 0.0 || !pieces_.empty();
  }

  /// Largest radius exponent among pieces (INT_MIN when there are none).
  int support_exp() const {
    int k = std::numeric_limits<int>::min();
    for (const auto& pc : pieces_) {
      int reach = pc.ball.radius_exp();
      if (!pc.ball.center().is_zero()) reach = std::max(reach, pc.ball.center().norm_exp());
      k = std::max(k, reach);
    }
    return k;
  }

  complex_t evaluate(const PAdicPoint& x) const {
    for (const auto& pc : pieces_)
      if (pc.ball.contains(x)) return pc.value;
    if (!tail_) throw std::domain_error("locally constant function: point outside all pieces and no tail");
    return tail_->evaluate(x);
  }

 private:
  void validate_disjoint() const {
    for (size_t i = 0; i < pieces_.size(); ++i)
      for (size_t j = i + 1; j < pieces_.size(); ++j)
        if (!pieces_[i].ball.disjoint_from(pieces_[j].ball))
          throw std::domain_error("locally constant function: pieces overlap");
  }

  std::vector<Piece> pieces_;
  std::optional<RadialFunction> tail_;
  int loc_exp_;
  double growth_exp_;
  double growth_const_;
};

inline LocallyConstantFunction LocallyConstantFunction::layered(
    std::vector<Piece> layers, std::optional<RadialFunction> tail, int loc_exp,
    double growth_exp, double growth_const) {
  // sort innermost (smallest radius) first; earlier layers shadow later ones
  std::stable_sort(layers.begin(), layers.end(), [](const Piece& a, const Piece& b) {
    return a.ball.radius_exp() < b.ball.radius_exp();
  });
  std::vector<Piece> out;
  for (size_t i = 0; i < layers.size(); ++i) {
    std::vector<Ball> holes;
    for (size_t j = 0; j < i; ++j)
      if (layers[i].ball.contains_ball(layers[j].ball)) holes.push_back(layers[j].ball);
    if (holes.empty()) {
      out.push_back(layers[i]);
      continue;
    }
    // refine layer i into cosets at the finest hole radius and keep the
    // ones outside every hole
    int res = layers[i].ball.radius_exp();
    for (const Ball& h : holes) res = std::min(res, h.radius_exp());
    long long p = layers[i].ball.prime();
    int n = layers[i].ball.dim();
    int span = layers[i].ball.radius_exp() - res;
    FiniteWindow w(p, n, span, 0);
    w.for_each_rep([&](const PAdicPoint& rep) {
      // rep digits live at exponents [-span, -1]; the cosets of B_res in the
      // layer ball want them at [-radius, -res-1], a shift by -res
      std::vector<PAdicScalar> shifted;
      shifted.reserve(size_t(n));
      for (int c = 0; c < n; ++c) {
        const PAdicScalar& rc = rep[c];
        if (rc.is_zero()) {
          shifted.push_back(PAdicScalar::zero(p));
        } else {
          std::vector<uint32_t> d(rc.digits());
          shifted.push_back(PAdicScalar::from_digits(p, rc.order() - res, d));
        }
      }
      PAdicPoint center = layers[i].ball.center() + PAdicPoint(std::move(shifted));
      Ball coset(center, res);
      for (const Ball& h : holes)
        if (!coset.disjoint_from(h)) return;
      out.push_back({coset, layers[i].value});
    });
  }
  return LocallyConstantFunction(std::move(out), std::move(tail), loc_exp, growth_exp,
                                 growth_const);
}

/// Integral of phi over the ball B_gamma(c), exact: pieces contribute their
/// intersection volumes (nested-or-disjoint), the radial tail contributes a
/// closed-form ball mass minus what the pieces shadow.
inline complex_t ball_integral(const LocallyConstantFunction& phi, const PAdicPoint& c,
                               int gamma, SeriesPolicy pol = {}) {
  Ball target(c, gamma);
  KahanSumComplex acc;
  for (const auto& pc : phi.pieces()) {
    double v = intersection_volume_d(pc.ball, target);
    if (v != 0.0) acc.add(pc.value * v);
  }
  if (phi.has_tail()) {
    const RadialFunction& g = *phi.tail();
    // integral of the radial tail over B_gamma(c)
    auto radial_over_ball = [&](const Ball& b) -> complex_t {
      if (b.center().is_zero() || b.center().norm_exp() <= b.radius_exp())
        return radial_ball_mass(g, b.radius_exp(), pol);
      return g.at_exp(b.center().norm_exp()) * b.volume_d();
    };
    acc.add(radial_over_ball(target));
    for (const auto& pc : phi.pieces()) {
      if (intersection_volume_d(pc.ball, target) == 0.0) continue;
      const Ball& inner = target.contains_ball(pc.ball) ? pc.ball : target;
      acc.add(-radial_over_ball(inner));
    }
  }
  return acc.value();
}

/// Integral of y -> phi(x - y) over the sphere ||y|| = p^k, i.e. the
/// integral of phi over { z : ||z - x|| = p^k }.
inline complex_t sphere_integral(const LocallyConstantFunction& phi, const PAdicPoint& x, int k,
                                 SeriesPolicy pol = {}) {
  return ball_integral(phi, x, k, pol) - ball_integral(phi, x, k - 1, pol);
}

struct ConvolutionResult {
  complex_t value{0.0, 0.0};
  double tail_bound = 0.0;  // magnitude estimate of everything truncated
};

/// Convolution (g * phi)(x) = integral of g(x - xi) phi(xi) d^n xi for a
/// radial g: decomposed over spheres ||x - xi|| = p^k. The window delimits
/// the exactly-summed range; beyond outer_exp the product of the tail models
/// is summed numerically and reported in tail_bound when truncated.
inline ConvolutionResult convolve_window(const LocallyConstantFunction& phi,
                                         const RadialFunction& g, const PAdicPoint& x,
                                         const FiniteWindow& w, SeriesPolicy pol = {}) {
  if (w.inner_exp() < phi.loc_exp())
    throw std::domain_error("convolve_window: window resolution coarser than loc_exp");
  long long p = g.prime();
  int n = g.dim();
  double pd = double(p);
  double sphere_factor = 1.0 - std::pow(pd, -double(n));
  KahanSumComplex acc;

  // inner mass: phi is constant on B_{-L}(x)
  complex_t phi_x = phi.evaluate(x);
  acc.add(phi_x * radial_ball_mass(g, -w.inner_exp(), pol));

  // exact mid-range spheres
  for (int k = -w.inner_exp() + 1; k <= w.outer_exp(); ++k)
    acc.add(g.at_exp(k) * sphere_integral(phi, x, k, pol));

  // far tail: both factors radial out there
  ConvolutionResult res;
  int x_exp = x.is_zero() ? std::numeric_limits<int>::min() : x.norm_exp();
  int supp = phi.support_exp();
  int far_start = std::max({w.outer_exp() + 1, x_exp + 1,
                            supp == std::numeric_limits<int>::min() ? w.outer_exp() + 1 : supp + 1});
  for (int k = w.outer_exp() + 1; k < far_start; ++k)
    acc.add(g.at_exp(k) * sphere_integral(phi, x, k, pol));

  if (phi.has_tail()) {
    double scale = std::abs(acc.value()) + 1e-300;
    double prev = std::numeric_limits<double>::infinity();
    int growing = 0;
    bool converged = false;
    complex_t last{0.0, 0.0};
    for (int j = 0; j < pol.hard_cap; ++j) {
      int k = far_start + j;
      complex_t term =
          g.at_exp(k) * phi.tail()->at_exp(k) * std::pow(pd, double(k) * n) * sphere_factor;
      acc.add(term);
      last = term;
      double mag = std::abs(term);
      if (mag < pol.eps * std::max(scale, std::abs(acc.value()))) {
        converged = true;
        break;
      }
      growing = mag > prev ? growing + 1 : 0;
      if (growing > 24)
        throw std::domain_error("convolve_window: tail diverges (growth incompatible with kernel decay)");
      prev = mag;
    }
    if (!converged) res.tail_bound = std::abs(last) * 2.0 * double(pol.hard_cap);
  } else {
    // partial function without tail: only valid when pieces cover the far
    // range, i.e. compact support inside the window
    if (supp > w.outer_exp())
      throw std::domain_error("convolve_window: support exceeds window and no tail model");
  }
  res.value = acc.value();
  return res;
}

}  // namespace padic
