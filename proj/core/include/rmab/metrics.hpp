#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "rmab/model.hpp"
#include "rmab/trial_log.hpp"

namespace rmab {

// Engagement drop at week t relative to week 0, summed over arms:
// sum_n (s_{n,0} - s_{n,t}). Arms that improved contribute negatively;
// nothing is clipped.
int drop_current(const TrialLog& log, int t);

// Cumulative engagement drop: sum over zeta = 0..t of drop_current(zeta).
int drop_cumulative(const TrialLog& log, int t);

// Drops prevented by a policy relative to the standard of care at week t;
// positive means the policy prevented drops.
int drops_prevented(const TrialLog& policy_log, const TrialLog& csoc_log,
                    int t);

// 100 * (control - treatment) / control. Throws DataError on zero control.
double percent_reduction(double drops_treatment, double drops_control);

// Rescales a policy's mean reward so CSOC maps to 0 and Whittle to 100.
// Throws NumericalError when the anchors coincide.
double normalized_reward(double r_alg, double r_csoc, double r_whittle);

// Which (cluster, state) groups a policy spent its calls on, with the
// call's success probability P^a_{s,E} as annotation, plus the week-1
// targeting and conversion shares.
struct SelectionAudit {
  // weekly_counts[w][(cluster, state index)] = calls that week.
  std::vector<std::map<std::pair<int, int>, int>> weekly_counts;
  // success_prob[(cluster, state index)] = P^a_{s,E} of that group.
  std::map<std::pair<int, int>, double> success_prob;
  int week1_calls = 0;
  int week1_calls_to_ne = 0;
  double week1_ne_share = 0.0;   // fraction of week-1 calls on NE arms
  double ne_conversion_share = 0.0;  // of those, fraction engaging at the end
};

SelectionAudit selection_audit(const TrialLog& log,
                               std::span<const TransitionModel> cluster_models);

}  // namespace rmab
