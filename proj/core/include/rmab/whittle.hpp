#pragma once

#include <array>
#include <span>
#include <vector>

#include "rmab/model.hpp"

namespace rmab {

// Fixed point of the subsidy-lambda Bellman operator
//   Q(s,p) = lambda + R(s) + beta * sum_s' P^p(s,s') V(s')
//   Q(s,a) =          R(s) + beta * sum_s' P^a(s,s') V(s')
//   V(s)   = max(Q(s,p), Q(s,a))
// where the reward of the *current* state is charged at each step.
struct SubsidySolution {
  std::array<double, 2> v{};
  std::array<double, 2> q_passive{};
  std::array<double, 2> q_active{};
  double lambda = 0.0;
  double beta = 0.0;
  double residual = 0.0;              // final sup-norm change
  int sweeps = 0;
  std::vector<double> residual_history;  // sup-norm change per sweep
};

// Value iteration from V == 0 until the sup-norm change drops to eps.
// Throws NumericalError if max_sweeps is exhausted (beta too close to 1
// or eps unreachable).
SubsidySolution solve_subsidy_mdp(const TransitionModel& m, double lambda,
                                  double beta, double eps = 1e-9,
                                  int max_sweeps = 100000);

// Whittle index: the infimum subsidy at which the planner is indifferent
// between acting and resting in state s. Located by bisection on lambda
// over [-1/(1-beta), 1/(1-beta)] to bracket width <= tol; exact Q ties
// resolve toward the lower lambda. Throws NumericalError when the
// active-minus-passive gap fails to change sign over the interval
// (degenerate model), reporting both endpoint gaps.
double whittle_index(const TransitionModel& m, State s, double beta,
                     double tol = 1e-6);

// Grid diagnostic for the monotone-crossing assumption behind the
// bisection: the set of states where passive is optimal must only grow
// with lambda. Failures are reported, never thrown.
struct IndexabilityReport {
  bool indexable = true;
  // Per state, lambda values at which the passive-optimal set lost that
  // state while sweeping lambda upward.
  std::array<std::vector<double>, 2> shrink_lambdas;
  int grid_points = 0;
};

IndexabilityReport check_indexability(const TransitionModel& m, double beta,
                                      int grid_points = 201);

// Precomputed Whittle indices for every (cluster, state) pair: 2k values,
// constant-time lookup, immutable and shareable once built.
struct IndexTable {
  double beta = 0.0;
  std::vector<std::array<double, 2>> values;  // [cluster][state]

  int clusters() const { return static_cast<int>(values.size()); }
  double at(int cluster, State s) const { return values[cluster][idx(s)]; }
};

// Builds the 2k table. Models must be validated and fully imputed;
// bracket failures propagate with the offending cluster id attached.
IndexTable precompute_index_table(std::span<const TransitionModel> models,
                                  double beta, double tol = 1e-6);

}  // namespace rmab
