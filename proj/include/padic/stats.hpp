#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace padic {

namespace detail {

/// Regularized lower incomplete gamma P(s, x) by its power series
/// (converges fast for x < s + 1).
inline double gamma_p_series(double s, double x) {
  double ap = s;
  double sum = 1.0 / s;
  double del = sum;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

/// Regularized upper incomplete gamma Q(s, x) by Lentz continued fraction
/// (converges fast for x >= s + 1).
inline double gamma_q_cf(double s, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    double an = -double(i) * (double(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

}  // namespace detail

/// Regularized upper incomplete gamma Q(s, x) = Gamma(s,x)/Gamma(s).
inline double gamma_q(double s, double x) {
  if (s <= 0.0 || x < 0.0) throw std::domain_error("gamma_q: s > 0 and x >= 0 required");
  if (x == 0.0) return 1.0;
  return x < s + 1.0 ? 1.0 - detail::gamma_p_series(s, x) : detail::gamma_q_cf(s, x);
}

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int bins_used = 0;
};

/// Pearson chi-square of observed counts against expected counts, merging
/// adjacent low-expectation bins (classical >= 5 rule) before forming the
/// statistic. The p-value is Q(dof/2, stat/2).
inline ChiSquareResult chi_square_test(const std::vector<double>& observed,
                                       const std::vector<double>& expected,
                                       double min_expected = 5.0) {
  if (observed.size() != expected.size())
    throw std::domain_error("chi_square_test: size mismatch");
  std::vector<double> obs_m, exp_m;
  double o_acc = 0.0, e_acc = 0.0;
  for (size_t i = 0; i < observed.size(); ++i) {
    o_acc += observed[i];
    e_acc += expected[i];
    if (e_acc >= min_expected) {
      obs_m.push_back(o_acc);
      exp_m.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (!exp_m.empty()) {
      obs_m.back() += o_acc;
      exp_m.back() += e_acc;
    } else {
      obs_m.push_back(o_acc);
      exp_m.push_back(e_acc);
    }
  }
  ChiSquareResult res;
  res.bins_used = int(obs_m.size());
  if (res.bins_used < 2) {
    res.dof = 0;
    res.p_value = 1.0;
    return res;
  }
  for (size_t i = 0; i < obs_m.size(); ++i) {
    double d = obs_m[i] - exp_m[i];
    res.statistic += d * d / exp_m[i];
  }
  res.dof = res.bins_used - 1;
  res.p_value = gamma_q(0.5 * res.dof, 0.5 * res.statistic);
  return res;
}

/// Total variation distance between an empirical histogram (counts, total N)
/// and a probability vector.
inline double total_variation(const std::vector<double>& counts, double n_total,
                              const std::vector<double>& pmf) {
  if (counts.size() != pmf.size()) throw std::domain_error("total_variation: size mismatch");
  double tv = 0.0;
  for (size_t i = 0; i < counts.size(); ++i) tv += std::abs(counts[i] / n_total - pmf[i]);
  return 0.5 * tv;
}

}  // namespace padic
