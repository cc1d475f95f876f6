#include "rmab/whittle.hpp"

#include <cmath>
#include <sstream>

#include "rmab/errors.hpp"

namespace rmab {

namespace {

// The Q-gap at the bracket endpoints is bounded away from zero by
// construction (|gap| >= 1 in exact arithmetic); this slack only absorbs
// value-iteration residue.
constexpr double kGapSlack = 1e-7;

double q_gap(const TransitionModel& m, State s, double lambda, double beta,
             double eps) {
  const SubsidySolution sol = solve_subsidy_mdp(m, lambda, beta, eps);
  return sol.q_active[idx(s)] - sol.q_passive[idx(s)];
}

}  // namespace

SubsidySolution solve_subsidy_mdp(const TransitionModel& m, double lambda,
                                  double beta, double eps, int max_sweeps) {
  if (beta < 0.0 || beta >= 1.0) {
    throw NumericalError("discount factor must lie in [0, 1)");
  }
  if (eps <= 0.0) {
    throw NumericalError("value-iteration tolerance must be positive");
  }

  SubsidySolution sol;
  sol.lambda = lambda;
  sol.beta = beta;

  std::array<double, 2> v{0.0, 0.0};
  std::array<double, 2> qp{};
  std::array<double, 2> qa{};

  const auto backup = [&](const std::array<double, 2>& value) {
    for (int s = 0; s < 2; ++s) {
      const double r = static_cast<double>(s);
      qp[s] = lambda + r +
              beta * (m.prob[0][s][0] * value[0] + m.prob[0][s][1] * value[1]);
      qa[s] = r +
              beta * (m.prob[1][s][0] * value[0] + m.prob[1][s][1] * value[1]);
    }
  };

  double residual = 0.0;
  int sweeps = 0;
  for (; sweeps < max_sweeps; ++sweeps) {
    backup(v);
    residual = 0.0;
    for (int s = 0; s < 2; ++s) {
      const double nv = std::max(qp[s], qa[s]);
      residual = std::max(residual, std::abs(nv - v[s]));
      v[s] = nv;
    }
    sol.residual_history.push_back(residual);
    if (residual <= eps) break;
  }
  if (residual > eps) {
    std::ostringstream os;
    os << "value iteration did not converge in " << max_sweeps
       << " sweeps (residual " << residual << ", beta " << beta << ", eps "
       << eps << ")";
    throw NumericalError(os.str());
  }

  // One extra backup from the converged values so that
  // v(s) == max(q_passive(s), q_active(s)) holds exactly.
  backup(v);
  for (int s = 0; s < 2; ++s) v[s] = std::max(qp[s], qa[s]);

  sol.v = v;
  sol.q_passive = qp;
  sol.q_active = qa;
  sol.residual = residual;
  sol.sweeps = sweeps + 1;
  return sol;
}

double whittle_index(const TransitionModel& m, State s, double beta,
                     double tol) {
  if (tol <= 0.0) throw NumericalError("bisection tolerance must be positive");
  const double bound = 1.0 / (1.0 - beta);
  const double vi_eps = 1e-9;

  double lo = -bound;
  double hi = bound;
  const double gap_lo = q_gap(m, s, lo, beta, vi_eps);
  const double gap_hi = q_gap(m, s, hi, beta, vi_eps);
  if (gap_lo < -kGapSlack || gap_hi > kGapSlack) {
    std::ostringstream os;
    os << "whittle bisection bracket failure for state " << to_string(s)
       << ": gap(" << lo << ") = " << gap_lo << ", gap(" << hi
       << ") = " << gap_hi;
    throw NumericalError(os.str());
  }

  // gap is non-increasing in lambda; a gap of exactly zero moves the upper
  // end so the result lands on the infimum of the indifference set.
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (q_gap(m, s, mid, beta, vi_eps) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

IndexabilityReport check_indexability(const TransitionModel& m, double beta,
                                      int grid_points) {
  IndexabilityReport report;
  report.grid_points = grid_points;
  if (grid_points < 2) return report;

  const double bound = 1.0 / (1.0 - beta);
  std::array<bool, 2> passive_seen{false, false};
  for (int i = 0; i < grid_points; ++i) {
    const double lambda =
        -bound + (2.0 * bound) * static_cast<double>(i) /
                     static_cast<double>(grid_points - 1);
    const SubsidySolution sol = solve_subsidy_mdp(m, lambda, beta, 1e-9);
    for (int s = 0; s < 2; ++s) {
      const bool passive_opt =
          sol.q_passive[s] >= sol.q_active[s] - 1e-12;
      if (passive_seen[s] && !passive_opt) {
        report.indexable = false;
        report.shrink_lambdas[s].push_back(lambda);
      }
      passive_seen[s] = passive_seen[s] || passive_opt;
    }
  }
  return report;
}

IndexTable precompute_index_table(std::span<const TransitionModel> models,
                                  double beta, double tol) {
  IndexTable table;
  table.beta = beta;
  table.values.reserve(models.size());
  for (std::size_t c = 0; c < models.size(); ++c) {
    const TransitionModel m = validate_transition_model(models[c]);
    try {
      table.values.push_back(
          {whittle_index(m, State::NotEngaging, beta, tol),
           whittle_index(m, State::Engaging, beta, tol)});
    } catch (const NumericalError& e) {
      std::ostringstream os;
      os << "cluster " << c << ": " << e.what();
      throw NumericalError(os.str());
    }
  }
  return table;
}

}  // namespace rmab
