#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <thread>
#include <vector>

#include "padic/core.hpp"
#include "padic/heat_kernel.hpp"
#include "padic/rng.hpp"
#include "padic/stats.hpp"

namespace padic {

/// Exact radial law of one diffusion increment over time t: the sphere
/// masses of Z(., t) on a finite radius window, with the clipped mass
/// outside the window tracked explicitly.
struct IncrementLaw {
  KernelParams params;
  double t = 0.0;
  int m_lo = 0;
  int m_hi = 0;
  std::vector<double> pmf;  // pmf[m - m_lo] = P(||Y|| = p^m)
  double clipped_mass = 0.0;

  double probability(int m) const {
    if (m < m_lo || m > m_hi) return 0.0;
    return pmf[size_t(m - m_lo)];
  }
};

struct IncrementWindow {
  int m_lo = -32;
  int m_hi = 32;
  double clipped_bound = 1e-9;
};

/// Builds the increment law pmf(m) = F_t(m) - F_t(m-1) on [m_lo, m_hi].
/// Throws when the window clips more than the configured bound.
inline IncrementLaw build_increment_law(const KernelParams& kp, double t,
                                        IncrementWindow win = {}) {
  kp.validate();
  if (t <= 0.0) throw std::domain_error("increment law: t > 0 required");
  IncrementLaw law{kp, t, win.m_lo, win.m_hi, {}, 0.0};
  law.pmf.reserve(size_t(win.m_hi - win.m_lo + 1));
  for (int m = win.m_lo; m <= win.m_hi; ++m) law.pmf.push_back(sphere_mass(m, t, kp));
  double below = radial_cdf(win.m_lo - 1, t, kp);
  double above = radial_cdf_complement(win.m_hi, t, kp);
  law.clipped_mass = below + above;
  if (law.clipped_mass > win.clipped_bound)
    throw std::domain_error("increment law: window too small, clipped mass above bound");
  return law;
}

/// Per-run state precision: digits are kept for exponents in
/// [-valuation_hi, valuation_hi]; increments beyond the law window trigger
/// the resample policy and raise the step's clipped flag.
struct SimConfig {
  int valuation_span = 32;  // state digits span exponents -span .. span
};

/// Draws the increment radius by inverse CDF over the pmf, then a point
/// uniform on that sphere: each coordinate uniform in the ball, rejected
/// until the norm is attained (acceptance 1 - p^{-n}); in dimension one the
/// leading digit is drawn nonzero directly.
inline PAdicPoint sample_increment(const IncrementLaw& law, CounterRng& rng,
                                   bool* clipped_flag = nullptr, int valuation_span = 32) {
  long long p = law.params.prime;
  int n = law.params.n;
  int m = law.m_lo;
  for (;;) {
    double u = rng.uniform01();
    double acc = 0.0;
    bool hit = false;
    for (int i = 0; i < int(law.pmf.size()); ++i) {
      acc += law.pmf[size_t(i)];
      if (u < acc) {
        m = law.m_lo + i;
        hit = true;
        break;
      }
    }
    if (hit) break;
    if (clipped_flag) *clipped_flag = true;  // fell into the clipped band: resample
  }

  int digit_count = valuation_span + m + 1;  // exponents -m .. valuation_span
  if (digit_count < 1) digit_count = 1;
  std::vector<std::vector<uint32_t>> coords;
  coords.resize(size_t(n));
  for (;;) {
    bool norm_attained = false;
    for (int i = 0; i < n; ++i) {
      auto& d = coords[size_t(i)];
      d.resize(size_t(digit_count));
      for (auto& digit : d) digit = uint32_t(rng.uniform_int(uint64_t(p)));
      if (n == 1) {
        d[0] = 1 + uint32_t(rng.uniform_int(uint64_t(p - 1)));  // sphere directly
        norm_attained = true;
      } else if (d[0] != 0) {
        norm_attained = true;
      }
    }
    if (norm_attained) break;
  }
  std::vector<PAdicScalar> cs;
  cs.reserve(size_t(n));
  for (int i = 0; i < n; ++i)
    cs.push_back(PAdicScalar::from_digits(p, -m, coords[size_t(i)]));
  return PAdicPoint(std::move(cs));
}

struct Trajectory {
  uint64_t seed = 0;
  uint64_t path_index = 0;
  std::vector<double> times;
  std::vector<PAdicPoint> states;
  std::vector<bool> clipped;  // per increment step
};

/// Independent paths with i.i.d. exact-law increments; path k uses the
/// stream key seed XOR k, so results are reproducible and order-independent.
inline std::vector<Trajectory> simulate(const KernelParams& kp, double t_step, int n_steps,
                                        int n_paths, uint64_t seed, SimConfig cfg = {},
                                        IncrementWindow win = {}, int n_threads = 1) {
  kp.validate();
  if (n_steps < 0 || n_paths < 0) throw std::domain_error("simulate: negative counts");
  IncrementLaw law = build_increment_law(kp, t_step, win);

  std::vector<Trajectory> out;
  out.resize(size_t(n_paths));
  auto run_path = [&](int path) {
    Trajectory& traj = out[size_t(path)];
    traj.seed = seed;
    traj.path_index = uint64_t(path);
    CounterRng rng(seed, uint64_t(path));
    PAdicPoint state = PAdicPoint::origin(kp.prime, kp.n);
    traj.times.push_back(0.0);
    traj.states.push_back(state);
    for (int s = 1; s <= n_steps; ++s) {
      bool clip = false;
      PAdicPoint inc = sample_increment(law, rng, &clip, cfg.valuation_span);
      state = state + inc;
      traj.times.push_back(double(s) * t_step);
      traj.states.push_back(state);
      traj.clipped.push_back(clip);
    }
  };

  if (n_threads <= 1 || n_paths <= 1) {
    for (int k = 0; k < n_paths; ++k) run_path(k);
  } else {
    std::vector<std::thread> pool;
    int workers = std::min(n_threads, n_paths);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int k = w; k < n_paths; k += workers) run_path(k);
      });
    for (auto& th : pool) th.join();
  }
  return out;
}

struct EmpiricalReport {
  ChiSquareResult chi_square;
  double total_variation = 0.0;
  long long samples = 0;
  std::vector<double> observed;  // per law bin
};

/// Chi-square and total-variation distance between the empirical radius
/// histogram of per-step displacements and the exact pmf.
inline EmpiricalReport empirical_vs_exact(const std::vector<int>& radii,
                                          const IncrementLaw& law) {
  EmpiricalReport rep;
  rep.samples = (long long)radii.size();
  size_t bins = law.pmf.size();
  rep.observed.assign(bins, 0.0);
  for (int m : radii) {
    if (m < law.m_lo || m > law.m_hi)
      throw std::domain_error("empirical_vs_exact: radius outside law window");
    rep.observed[size_t(m - law.m_lo)] += 1.0;
  }
  std::vector<double> expected(bins);
  for (size_t i = 0; i < bins; ++i) expected[i] = law.pmf[i] * double(rep.samples);
  rep.chi_square = chi_square_test(rep.observed, expected);
  rep.total_variation = total_variation(rep.observed, double(rep.samples), law.pmf);
  return rep;
}

/// Radius exponents of the displacements X_{step} - X_0 across trajectories
/// (step = trajectory length - 1 when steps is negative).
inline std::vector<int> displacement_radii(const std::vector<Trajectory>& trajs, int step = -1) {
  std::vector<int> out;
  out.reserve(trajs.size());
  for (const auto& tr : trajs) {
    size_t s = step < 0 ? tr.states.size() - 1 : size_t(step);
    if (s >= tr.states.size()) throw std::domain_error("displacement_radii: step out of range");
    PAdicPoint d = tr.states[s] - tr.states[0];
    if (d.is_zero()) throw std::domain_error("displacement_radii: zero displacement");
    out.push_back(d.norm_exp());
  }
  return out;
}

}  // namespace padic
