#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rmab/model.hpp"

namespace rmab {

// Complete record of one simulation trial: per week and arm, the state the
// arm was in and the action it received. Rewards are the state values and
// reconstruct exactly from the states. Compact columnar storage so 30+
// trials of thousand-arm cohorts stay cheap.
struct TrialLog {
  std::string policy;
  std::uint64_t seed = 0;
  int trial = 0;
  int weeks = 0;
  int n_arms = 0;
  std::vector<int> cluster_ids;         // per arm
  std::vector<std::int8_t> states;      // weeks * n_arms, week-major
  std::vector<std::int8_t> actions;     // same layout, 0 = passive

  State state_at(int week, int arm) const {
    return state_from_index(states[static_cast<std::size_t>(week) * n_arms + arm]);
  }
  Action action_at(int week, int arm) const {
    return actions[static_cast<std::size_t>(week) * n_arms + arm] == 0
               ? Action::Passive
               : Action::Active;
  }
  double reward_at(int week, int arm) const {
    return static_cast<double>(states[static_cast<std::size_t>(week) * n_arms + arm]);
  }

  // Sum over weeks of beta^t * (total engagement that week).
  double total_discounted_reward(double beta) const;
};

struct LogInvariantReport {
  int budget_violations = 0;    // weeks where actions exceed the budget
  int sleeping_violations = 0;  // pairs of calls closer than eta weeks
  int csoc_actions = 0;         // only counted when the log's policy is csoc
  bool ok() const {
    return budget_violations == 0 && sleeping_violations == 0 &&
           csoc_actions == 0;
  }
};

// Audits a finished log against the budget schedule and the eta-week
// sleeping constraint.
LogInvariantReport verify_log_invariants(const TrialLog& log,
                                         std::span<const int> m_schedule,
                                         int eta);

}  // namespace rmab
