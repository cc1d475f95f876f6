#include "rmab/trial_log.hpp"

#include <cmath>

namespace rmab {

double TrialLog::total_discounted_reward(double beta) const {
  double total = 0.0;
  double discount = 1.0;
  for (int w = 0; w < weeks; ++w) {
    int engaged = 0;
    for (int n = 0; n < n_arms; ++n) {
      engaged += states[static_cast<std::size_t>(w) * n_arms + n];
    }
    total += discount * engaged;
    discount *= beta;
  }
  return total;
}

LogInvariantReport verify_log_invariants(const TrialLog& log,
                                         std::span<const int> m_schedule,
                                         int eta) {
  LogInvariantReport report;
  const bool is_csoc = log.policy == "csoc";
  std::vector<int> last_call(log.n_arms, -1);
  for (int w = 0; w < log.weeks; ++w) {
    int calls = 0;
    for (int n = 0; n < log.n_arms; ++n) {
      if (log.action_at(w, n) != Action::Active) continue;
      calls++;
      if (is_csoc) report.csoc_actions++;
      if (last_call[n] >= 0 && w - last_call[n] < eta) {
        report.sleeping_violations++;
      }
      last_call[n] = w;
    }
    const int m = m_schedule.empty()
                      ? 0
                      : m_schedule[std::min<std::size_t>(w, m_schedule.size() - 1)];
    if (calls > m) report.budget_violations++;
  }
  return report;
}

}  // namespace rmab
