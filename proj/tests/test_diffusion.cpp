#include <doctest.h>

#include <cmath>
#include <map>

#include "padic/diffusion.hpp"

using namespace padic;

namespace {

const KernelParams kSimParams{2, 1, 1.0, 1.0, {}};

}  // namespace

TEST_SUITE_BEGIN("diffusion");

TEST_CASE("increment law: masses, clipping, kernel consistency") {
  for (long long p : {2LL, 3LL})
    for (int n : {1, 2}) {
      KernelParams kp{p, n, 1.0, 1.0, {}};
      for (double t : {0.1, 1.0}) {
        IncrementLaw law = build_increment_law(kp, t, {-32, 40, 1e-9});
        double total = 0.0;
        for (double q : law.pmf) {
          CHECK(q >= 0.0);
          total += q;
        }
        CHECK(std::abs(total + law.clipped_mass - 1.0) < 1e-12);
        CHECK(law.clipped_mass < 1e-9);

        // pmf equals the cdf difference (independent series route)
        for (int m : {-3, 0, 2, 5}) {
          double cdf_diff = radial_cdf(m, t, kp) - radial_cdf(m - 1, t, kp);
          CHECK(std::abs(law.probability(m) - cdf_diff) < 1e-10);
        }
        // and the pmf ratios reproduce the kernel's radial ratios
        for (int m : {1, 2, 3}) {
          double lhs = law.probability(m) / law.probability(m - 1);
          double rhs = z_tent(m, t, kp) / z_tent(m - 1, t, kp) *
                       std::pow(double(p), double(n));
          CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
        }
      }
    }
}

TEST_CASE("increment law refuses windows that clip too much") {
  KernelParams kp{2, 1, 0.5, 1.0, {}};
  // alpha = 1/2 has heavy tails: a +-8 window at t = 10 clips far more
  // than 1e-9
  CHECK_THROWS_AS(build_increment_law(kp, 10.0, {-8, 8, 1e-9}), std::domain_error);
}

TEST_CASE("median radius scales like t^{1/alpha}") {
  // at l = log_p t^{1/alpha} the cdf is scale-free: one fixed value for all
  // powers of p^alpha (exact self-similarity of the kernel law)
  KernelParams kp = kSimParams;
  double f0 = radial_cdf(2, 4.0, kp);
  for (double t : {4.0, 16.0, 64.0}) {
    int l = int(std::lround(std::log2(t)));
    double f = radial_cdf(l, t, kp);
    CHECK(f == doctest::Approx(f0).epsilon(1e-12));
    CHECK(f > 0.5);
    CHECK(f < 0.6);
  }
}

TEST_CASE("sampled radii follow the exact pmf") {
  IncrementLaw law = build_increment_law(kSimParams, 1.0, {-32, 40, 1e-9});
  CounterRng rng(0x5eed0001ull);
  const int N = 100000;
  std::vector<int> radii;
  radii.reserve(N);
  for (int i = 0; i < N; ++i) {
    bool clipped = false;
    PAdicPoint y = sample_increment(law, rng, &clipped);
    CHECK(!clipped);
    radii.push_back(y.norm_exp());
  }
  EmpiricalReport rep = empirical_vs_exact(radii, law);
  CHECK(rep.chi_square.p_value > 0.01);
  CHECK(rep.chi_square.bins_used >= 20);
  CHECK(rep.total_variation < 0.05);
}

TEST_CASE("conditional on the radius, leading digits are uniform") {
  // n = 1: the leading digit of a sphere point is uniform on {1..p-1}
  {
    KernelParams kp{5, 1, 1.0, 1.0, {}};
    IncrementLaw law = build_increment_law(kp, 1.0, {-32, 40, 1e-9});
    CounterRng rng(0x5eed0002ull);
    std::vector<double> counts(4, 0.0);
    const int N = 40000;
    for (int i = 0; i < N; ++i) {
      PAdicPoint y = sample_increment(law, rng);
      counts[size_t(y[0].digits()[0] - 1)] += 1.0;
    }
    std::vector<double> expected(4, N / 4.0);
    auto res = chi_square_test(counts, expected);
    CHECK(res.p_value > 0.01);
  }

  // n = 2: the pair of digits at the radius scale is uniform over the
  // p^2 - 1 admissible patterns (not both zero)
  {
    KernelParams kp{3, 2, 1.0, 1.0, {}};
    IncrementLaw law = build_increment_law(kp, 1.0, {-32, 40, 1e-9});
    CounterRng rng(0x5eed0003ull);
    std::map<std::pair<uint32_t, uint32_t>, double> counts;
    const int N = 40000;
    for (int i = 0; i < N; ++i) {
      PAdicPoint y = sample_increment(law, rng);
      int m = y.norm_exp();
      uint32_t d0 = y[0].is_zero() || y[0].norm_exp() < m ? 0 : y[0].digits()[0];
      uint32_t d1 = y[1].is_zero() || y[1].norm_exp() < m ? 0 : y[1].digits()[0];
      counts[{d0, d1}] += 1.0;
    }
    CHECK(counts.size() == 8);  // 3^2 - 1 patterns
    std::vector<double> obs, expd;
    for (auto& [k, v] : counts) {
      obs.push_back(v);
      expd.push_back(N / 8.0);
    }
    auto res = chi_square_test(obs, expd);
    CHECK(res.p_value > 0.01);
  }
}

TEST_CASE("simulation basics: zero steps, determinism") {
  auto none = simulate(kSimParams, 0.5, 0, 4, 42);
  CHECK(none.size() == 4);
  for (const auto& tr : none) {
    CHECK(tr.states.size() == 1);
    CHECK(tr.states[0].is_zero());
  }

  auto run1 = simulate(kSimParams, 0.5, 16, 8, 20240817);
  auto run2 = simulate(kSimParams, 0.5, 16, 8, 20240817);
  REQUIRE(run1.size() == run2.size());
  for (size_t i = 0; i < run1.size(); ++i) {
    REQUIRE(run1[i].states.size() == run2[i].states.size());
    for (size_t s = 0; s < run1[i].states.size(); ++s)
      CHECK(run1[i].states[s] == run2[i].states[s]);
  }

  // thread-parallel run produces the same trajectories
  auto run3 = simulate(kSimParams, 0.5, 16, 8, 20240817, {}, {}, 2);
  for (size_t i = 0; i < run1.size(); ++i)
    for (size_t s = 0; s < run1[i].states.size(); ++s)
      CHECK(run1[i].states[s] == run3[i].states[s]);

  // a different seed moves the paths
  auto run4 = simulate(kSimParams, 0.5, 16, 8, 999);
  bool any_diff = false;
  for (size_t i = 0; i < run1.size() && !any_diff; ++i)
    any_diff = !(run1[i].states.back() == run4[i].states.back());
  CHECK(any_diff);
}

TEST_CASE("Chapman-Kolmogorov: two steps of t match one step of 2t") {
  double t = 0.5;
  const int N = 100000;
  auto trajs = simulate(kSimParams, t, 2, N, 0xCC2024ull);
  std::vector<int> radii = displacement_radii(trajs, 2);
  IncrementLaw law2t = build_increment_law(kSimParams, 2.0 * t, {-32, 40, 1e-9});
  EmpiricalReport rep = empirical_vs_exact(radii, law2t);
  CHECK(rep.chi_square.p_value > 0.01);
  CHECK(rep.chi_square.bins_used >= 20);
}

TEST_CASE("spatial homogeneity: step law independent of the current state") {
  double t = 1.0;
  const int N = 60000;
  auto trajs = simulate(kSimParams, t, 2, N, 77);
  IncrementLaw law = build_increment_law(kSimParams, t, {-32, 40, 1e-9});

  // condition the second increment on the radius of the state after step 1
  std::vector<int> small_state, large_state;
  for (const auto& tr : trajs) {
    PAdicPoint inc = tr.states[2] - tr.states[1];
    int r1 = tr.states[1].is_zero() ? std::numeric_limits<int>::min() : tr.states[1].norm_exp();
    (r1 <= 0 ? small_state : large_state).push_back(inc.norm_exp());
  }
  REQUIRE(small_state.size() > 5000);
  REQUIRE(large_state.size() > 5000);
  auto rep_small = empirical_vs_exact(small_state, law);
  auto rep_large = empirical_vs_exact(large_state, law);
  CHECK(rep_small.chi_square.p_value > 0.01);
  CHECK(rep_large.chi_square.p_value > 0.01);
}

TEST_CASE("one-dimensional sampling never rejects") {
  // every draw on the sphere already attains the norm: leading digit nonzero
  IncrementLaw law = build_increment_law(kSimParams, 1.0, {-32, 40, 1e-9});
  CounterRng rng(5);
  for (int i = 0; i < 2000; ++i) {
    PAdicPoint y = sample_increment(law, rng);
    CHECK(y[0].digits()[0] != 0);
  }
}

TEST_SUITE_END();
