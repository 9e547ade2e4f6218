#include <doctest.h>

#include <cmath>

#include "padic/json_io.hpp"
#include "padic/radial.hpp"
#include "padic/rng.hpp"

using namespace padic;

namespace {

PAdicPoint sphere_point(long long p, int n, int m) {
  std::vector<PAdicScalar> cs;
  cs.push_back(PAdicScalar::from_digits(p, -m, {1}));
  for (int i = 1; i < n; ++i) cs.push_back(PAdicScalar::zero(p));
  return PAdicPoint(std::move(cs));
}

// brute-force evaluation by innermost-containing-ball scan
complex_t innermost_scan(const std::vector<LocallyConstantFunction::Piece>& layers,
                         const PAdicPoint& x) {
  const LocallyConstantFunction::Piece* best = nullptr;
  for (const auto& pc : layers)
    if (pc.ball.contains(x) && (!best || pc.ball.radius_exp() < best->ball.radius_exp()))
      best = &pc;
  REQUIRE(best != nullptr);
  return best->value;
}

}  // namespace

TEST_SUITE_BEGIN("radial");

TEST_CASE("integrate_radial of the unit-ball indicator") {
  for (long long p : {2LL, 5LL})
    for (int n : {1, 3}) {
      RadialFunction f = RadialFunction::ball_indicator(p, n, 0);
      CHECK(std::abs(integrate_radial(f) - complex_t(1.0, 0.0)) < 1e-14);
    }
}

TEST_CASE("integrate_radial geometric series") {
  // f(m) = p^{-m(alpha+n)} for m >= 1, zero elsewhere; p=2, n=1, alpha=1:
  // sum_{m>=1} 2^{-2m} 2^{m-1} = 1/2
  std::vector<complex_t> table;
  for (int m = 1; m <= 40; ++m) table.emplace_back(std::pow(2.0, -2.0 * m), 0.0);
  RadialFunction f(2, 1, 1, std::move(table), {0.0, 0.0});
  CHECK(std::abs(integrate_radial(f) - complex_t(0.5, 0.0)) < 1e-12);

  // same integral with the power-law tail model instead of a long table
  RadialFunction g(2, 1, 1, {complex_t(0.25, 0.0)}, {0.0, 0.0}, TailLo::zero(),
                   TailHi::power_law({1.0, 0.0}, -2.0));
  CHECK(std::abs(integrate_radial(g) - complex_t(0.5, 0.0)) < 1e-14);
}

TEST_CASE("integrate_radial rejects divergent tails") {
  RadialFunction f(2, 1, 0, {complex_t(1.0, 0.0)}, {1.0, 0.0}, TailLo::zero(),
                   TailHi::power_law({1.0, 0.0}, -1.0));  // sigma = -n: divergent
  CHECK_THROWS_AS(integrate_radial(f), std::domain_error);

  RadialFunction g(2, 1, 0, {complex_t(1.0, 0.0)}, {1.0, 0.0}, TailLo::zero(),
                   TailHi::evaluator([](int) { return complex_t(1.0, 0.0); }));
  CHECK_THROWS(integrate_radial(g));
}

TEST_CASE("evaluate piecewise and radial") {
  long long p = 3;
  int n = 2;
  auto ind = LocallyConstantFunction::indicator(Ball::unit_ball(p, n));
  CHECK(ind.evaluate(PAdicPoint::origin(p, n)) == complex_t(1.0, 0.0));
  CHECK(ind.evaluate(sphere_point(p, n, 1)) == complex_t(0.0, 0.0));

  // partial function: no tail means points outside the pieces are an error
  LocallyConstantFunction partial({{Ball::unit_ball(p, n), {1.0, 0.0}}}, std::nullopt, 0);
  CHECK_THROWS_AS(partial.evaluate(sphere_point(p, n, 2)), std::domain_error);
}

TEST_CASE("pieces must be disjoint") {
  long long p = 2;
  Ball outer(PAdicPoint::origin(p, 1), 2);
  Ball inner(PAdicPoint::origin(p, 1), 0);
  CHECK_THROWS_AS(LocallyConstantFunction({{outer, {1.0, 0.0}}, {inner, {2.0, 0.0}}},
                                          std::nullopt, 0),
                  std::domain_error);
}

TEST_CASE("layered construction resolves nested balls to the innermost value") {
  long long p = 2;
  Ball outer(PAdicPoint::origin(p, 1), 2);
  Ball inner(PAdicPoint::origin(p, 1), 0);
  Ball off(PAdicPoint({PAdicScalar::from_integer(p, 2)}), -1);
  std::vector<LocallyConstantFunction::Piece> layers{
      {outer, {1.0, 0.0}}, {inner, {2.0, 0.0}}, {off, {5.0, 0.0}}};
  auto f = LocallyConstantFunction::layered(layers, std::nullopt, 1);

  FiniteWindow w(p, 1, 2, 2);
  w.for_each_rep([&](const PAdicPoint& x) {
    CHECK(f.evaluate(x) == innermost_scan(layers, x));
  });
  // the refinement really is disjoint: total measure of pieces = vol(outer)
  double vol = 0.0;
  for (const auto& pc : f.pieces()) vol += pc.ball.volume_d();
  CHECK(vol == doctest::Approx(outer.volume_d()));
}

TEST_CASE("ball and sphere integrals match brute-force enumeration") {
  long long p = 3;
  int n = 1;
  // two disjoint pieces plus a radial tail
  Ball b1(PAdicPoint({PAdicScalar::from_integer(p, 1)}), -1);
  Ball b2(PAdicPoint({PAdicScalar::from_integer(p, 3)}), -2);
  RadialFunction tail(p, n, 1, {complex_t(0.5, 0.0)}, {0.0, 0.0}, TailLo::zero(),
                      TailHi::power_law({2.0, 0.0}, -3.0));
  LocallyConstantFunction f({{b1, {2.0, 0.0}}, {b2, {-1.0, 0.0}}}, tail, 2);

  for (int mx : {-1, 0, 1}) {
    PAdicPoint x = sphere_point(p, n, mx);
    for (int k = -1; k <= 3; ++k) {
      FiniteWindow w(p, n, 4, 3);
      complex_t brute = window_integrate(
          [&](const PAdicPoint& y) {
            PAdicPoint z = x - y;
            bool on_sphere = !z.is_zero() && z.norm_exp() == k;
            if (!on_sphere) return complex_t(0.0, 0.0);
            // evaluate f directly by membership
            if (b1.contains(y)) return complex_t(2.0, 0.0);
            if (b2.contains(y)) return complex_t(-1.0, 0.0);
            return tail.evaluate(y);
          },
          w);
      // brute integrates over y with ||x - y|| = p^k: same as sphere_integral
      complex_t geo = sphere_integral(f, x, k);
      CHECK(std::abs(brute - geo) < 1e-12);
    }
  }
}

TEST_CASE("convolve_window with the constant kernel reproduces the mass") {
  long long p = 2;
  int n = 1;
  auto ind = LocallyConstantFunction::indicator(Ball::unit_ball(p, n));
  // g = 1 everywhere below the table top, zero above: integral of the
  // indicator against it is exactly vol(Z_p) = 1
  std::vector<complex_t> tab(size_t(9), complex_t(1.0, 0.0));
  RadialFunction g(p, n, -2, std::move(tab), {1.0, 0.0}, TailLo::constant({1.0, 0.0}),
                   TailHi::zero());
  FiniteWindow w(p, n, 3, 2);
  auto res = convolve_window(ind, g, PAdicPoint::origin(p, n), w);
  CHECK(std::abs(res.value - complex_t(1.0, 0.0)) < 1e-12);
  CHECK(res.tail_bound == 0.0);
}

TEST_CASE("convolve_window equals brute-force window integration") {
  long long p = 2;
  int n = 2;
  auto phi = LocallyConstantFunction::indicator(Ball::unit_ball(p, n));
  // a decaying radial kernel, constant on B_{-2} so the brute-force grid at
  // resolution 2 sees a locally constant integrand
  double c0 = std::pow(2.0, 2.5 * 2) / 7.0;
  std::vector<complex_t> tab;
  for (int m = -2; m <= 6; ++m)
    tab.emplace_back(m <= -2 ? c0 : std::pow(2.0, -2.5 * m) / 7.0, 0.0);
  RadialFunction g(p, n, -2, std::move(tab), {c0, 0.0}, TailLo::constant({c0, 0.0}),
                   TailHi::power_law({1.0 / 7.0, 0.0}, -2.5));

  for (int mx : {-1, 0, 1, 2}) {
    PAdicPoint x = sphere_point(p, n, mx);
    FiniteWindow w(p, n, 3, 2);
    complex_t brute = window_integrate(
        [&](const PAdicPoint& xi) { return g.evaluate(x - xi) * phi.evaluate(xi); }, w);
    // brute covers ||xi|| <= p^3 which holds all of supp(phi): full integral
    auto res = convolve_window(phi, g, x, w);
    CHECK(std::abs(res.value - brute) < 1e-12);
  }
}

TEST_CASE("convolution is linear") {
  long long p = 3;
  int n = 1;
  Ball unit = Ball::unit_ball(p, n);
  Ball off(PAdicPoint({PAdicScalar::from_digits(p, -1, {1})}), -1);
  auto f1 = LocallyConstantFunction::indicator(unit);
  auto f2 = LocallyConstantFunction::indicator(off);
  std::vector<complex_t> tab;
  for (int m = -8; m <= 8; ++m) tab.emplace_back(std::pow(3.0, -1.7 * m), 0.0);
  RadialFunction g(p, n, -8, std::move(tab), {std::pow(3.0, 1.7 * 8), 0.0},
                   TailLo::constant({std::pow(3.0, 1.7 * 8), 0.0}),
                   TailHi::power_law({1.0, 0.0}, -1.7));

  // a f1 + b f2 as a two-piece function (the supports are disjoint)
  complex_t a{2.0, 0.0}, b{-3.0, 0.0};
  auto combo = LocallyConstantFunction({{unit, a}, {off, b}},
                                       RadialFunction::zero_function(p, n), 1);

  FiniteWindow w(p, n, 2, 1);
  for (int mx : {0, 1}) {
    PAdicPoint x = sphere_point(p, n, mx);
    complex_t lhs = convolve_window(combo, g, x, w).value;
    complex_t rhs = a * convolve_window(f1, g, x, w).value +
                    b * convolve_window(f2, g, x, w).value;
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("convolution output is locally constant") {
  long long p = 2;
  int n = 1;
  auto phi = LocallyConstantFunction::indicator(Ball::unit_ball(p, n));
  std::vector<complex_t> tab;
  for (int m = -8; m <= 8; ++m) tab.emplace_back(std::pow(2.0, -2.0 * m), 0.0);
  RadialFunction g(p, n, -8, std::move(tab), {std::pow(2.0, 16.0), 0.0},
                   TailLo::constant({std::pow(2.0, 16.0), 0.0}),
                   TailHi::power_law({1.0, 0.0}, -2.0));
  FiniteWindow w(p, n, 2, 1);

  PAdicPoint x = sphere_point(p, n, 1);
  complex_t base = convolve_window(phi, g, x, w).value;
  // perturbations within the constancy radius p^{-l(phi)} = 1 do not move it
  for (long long delta : {1, 2, 3}) {
    PAdicPoint xp = x + PAdicPoint({PAdicScalar::from_integer(p, delta)});
    complex_t moved = convolve_window(phi, g, xp, w).value;
    CHECK(std::abs(moved - base) < 1e-12);
  }
}

TEST_CASE("convolve_window rejects growth incompatible with decay") {
  long long p = 2;
  int n = 1;
  // phi grows like ||x||^3 while g decays only like ||x||^{-3}
  RadialFunction growth(p, n, 0, {complex_t(1.0, 0.0)}, {1.0, 0.0}, TailLo::constant({1.0, 0.0}),
                        TailHi::evaluator([](int m) { return complex_t(std::pow(2.0, 3.0 * m), 0.0); }));
  LocallyConstantFunction phi({}, growth, 0, 3.0, 1.0);
  RadialFunction g(p, n, 0, {complex_t(1.0, 0.0)}, {1.0, 0.0}, TailLo::constant({1.0, 0.0}),
                   TailHi::power_law({1.0, 0.0}, -3.0));
  FiniteWindow w(p, n, 2, 0);
  CHECK_THROWS_AS(convolve_window(phi, g, PAdicPoint::origin(p, n), w), std::domain_error);
}

TEST_CASE("integrate_radial agrees with window enumeration on compact support") {
  for (long long p : {2LL, 3LL}) {
    for (int n : {1, 2}) {
      // constant on B_{-2} so the quadrature premise (locally constant at
      // the window resolution) holds; zero beyond the table
      complex_t inner{1.75, -0.25};
      std::vector<complex_t> tab;
      for (int m = -2; m <= 2; ++m)
        tab.emplace_back(m <= -2 ? inner : complex_t(std::cos(double(m)) + 0.5, 0.25 * m));
      RadialFunction f(p, n, -2, std::move(tab), inner, TailLo::constant(inner), TailHi::zero());
      complex_t closed = integrate_radial(f);
      FiniteWindow w(p, n, 2, 3);
      complex_t brute = window_integrate([&](const PAdicPoint& x) { return f.evaluate(x); }, w);
      CHECK(std::abs(closed - brute) < 1e-12);
    }
  }
}

TEST_CASE("radial ball mass closed forms") {
  long long p = 2;
  int n = 1;
  RadialFunction ind = RadialFunction::ball_indicator(p, n, 0);
  CHECK(std::abs(radial_ball_mass(ind, 0) - complex_t(1.0, 0.0)) < 1e-14);
  CHECK(std::abs(radial_ball_mass(ind, -2) - complex_t(0.25, 0.0)) < 1e-14);
  CHECK(std::abs(radial_ball_mass(ind, 5) - complex_t(1.0, 0.0)) < 1e-14);
}

TEST_CASE("locally constant functions survive the JSON round trip") {
  long long p = 3;
  int n = 2;
  Ball b1 = Ball::unit_ball(p, n);
  Ball b2(PAdicPoint({PAdicScalar::from_digits(p, -2, {2, 1}), PAdicScalar::zero(p)}), 0);
  RadialFunction tail(p, n, 1, {complex_t(0.25, -0.5)}, {0.0, 0.0}, TailLo::zero(),
                      TailHi::power_law({0.125, 0.0}, -4.0));
  LocallyConstantFunction f({{b1, {1.0, 2.0}}, {b2, {-3.0, 0.5}}}, tail, 2, 0.0, 3.5);

  json j = lcf_to_json(f);
  LocallyConstantFunction g = lcf_from_json(j, p, n);
  CHECK(g.loc_exp() == f.loc_exp());
  CHECK(g.piece_count() == f.piece_count());
  CounterRng rng(17);
  FiniteWindow w(p, n, 3, 2);
  w.for_each_rep([&](const PAdicPoint& x) {
    CHECK(std::abs(f.evaluate(x) - g.evaluate(x)) == 0.0);
  });
  // the tail models also round-trip: integrals agree exactly
  FiniteWindow w2(p, n, 2, 2);
  auto c1 = convolve_window(f, RadialFunction::ball_indicator(p, n, 4),
                            PAdicPoint::origin(p, n), w2);
  auto c2 = convolve_window(g, RadialFunction::ball_indicator(p, n, 4),
                            PAdicPoint::origin(p, n), w2);
  CHECK(std::abs(c1.value - c2.value) == 0.0);
}

TEST_SUITE_END();
