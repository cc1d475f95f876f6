// Test-only oracles, kept independent of the implementation paths they
// check: a brute-force lambda-grid Whittle search with its own value
// iteration, and a quadrature-based t-distribution CDF.
#pragma once

#include <array>
#include <cmath>

#include "rmab/model.hpp"

namespace oracles {

// Full value iteration at a fixed subsidy, written from the Bellman
// equations directly (no shared code with the solver).
inline std::array<double, 2> oracle_value_iteration(
    const rmab::TransitionModel& m, double lambda, double beta,
    std::array<double, 2>* q_gap_out) {
  double v0 = 0.0, v1 = 0.0;
  double qp0 = 0, qp1 = 0, qa0 = 0, qa1 = 0;
  for (int iter = 0; iter < 200000; ++iter) {
    qp0 = lambda + 0.0 + beta * (m.prob[0][0][0] * v0 + m.prob[0][0][1] * v1);
    qp1 = lambda + 1.0 + beta * (m.prob[0][1][0] * v0 + m.prob[0][1][1] * v1);
    qa0 = 0.0 + beta * (m.prob[1][0][0] * v0 + m.prob[1][0][1] * v1);
    qa1 = 1.0 + beta * (m.prob[1][1][0] * v0 + m.prob[1][1][1] * v1);
    const double n0 = qp0 > qa0 ? qp0 : qa0;
    const double n1 = qp1 > qa1 ? qp1 : qa1;
    const double change = std::max(std::abs(n0 - v0), std::abs(n1 - v1));
    v0 = n0;
    v1 = n1;
    if (change <= 1e-11) break;
  }
  if (q_gap_out) {
    (*q_gap_out)[0] = qa0 - qp0;
    (*q_gap_out)[1] = qa1 - qp1;
  }
  return {v0, v1};
}

// Brute-force Whittle index: sweep lambda over the search interval on a
// uniform grid, run full value iteration at every point, and linearly
// interpolate the first sign change of the active-minus-passive gap.
inline double oracle_whittle_grid(const rmab::TransitionModel& m, rmab::State s,
                                  double beta, double step = 1e-4) {
  const double bound = 1.0 / (1.0 - beta);
  const int si = rmab::idx(s);
  double prev_lambda = -bound;
  std::array<double, 2> gaps{};
  oracle_value_iteration(m, prev_lambda, beta, &gaps);
  double prev_gap = gaps[si];
  for (double lambda = -bound + step; lambda <= bound + step / 2;
       lambda += step) {
    oracle_value_iteration(m, lambda, beta, &gaps);
    const double gap = gaps[si];
    if (gap <= 0.0) {
      if (prev_gap <= 0.0) return prev_lambda;
      // Linear interpolation inside the bracketing cell.
      return prev_lambda + step * prev_gap / (prev_gap - gap);
    }
    prev_lambda = lambda;
    prev_gap = gap;
  }
  return bound;
}

// Student t CDF (upper tail doubled) via adaptive Simpson quadrature over
// the density; independent of the incomplete-beta implementation.
inline double t_density(double x, int df) {
  const double half = 0.5 * (df + 1);
  const double log_c = std::lgamma(half) - std::lgamma(0.5 * df) -
                       0.5 * std::log(df * 3.14159265358979323846);
  return std::exp(log_c - half * std::log1p(x * x / df));
}

inline double simpson(double a, double b, int df, int n) {
  const double h = (b - a) / n;
  double sum = t_density(a, df) + t_density(b, df);
  for (int i = 1; i < n; ++i) {
    sum += t_density(a + i * h, df) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

inline double oracle_t_two_sided_p(double t, int df) {
  const double at = std::abs(t);
  // Central mass on [-|t|, |t|]; complement is the two-sided p.
  const double central = simpson(-at, at, df, 20000);
  double p = 1.0 - central;
  if (p < 0.0) p = 0.0;
  if (p > 1.0) p = 1.0;
  return p;
}

}  // namespace oracles
