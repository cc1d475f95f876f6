#include "rmab/metrics.hpp"

#include <cmath>

#include "rmab/errors.hpp"

namespace rmab {

int drop_current(const TrialLog& log, int t) {
  if (t < 0 || t >= log.weeks) throw DataError("drop_current: week out of range");
  int drop = 0;
  for (int n = 0; n < log.n_arms; ++n) {
    drop += static_cast<int>(log.states[n]) -
            static_cast<int>(log.states[static_cast<std::size_t>(t) * log.n_arms + n]);
  }
  return drop;
}

int drop_cumulative(const TrialLog& log, int t) {
  int total = 0;
  for (int zeta = 0; zeta <= t; ++zeta) total += drop_current(log, zeta);
  return total;
}

int drops_prevented(const TrialLog& policy_log, const TrialLog& csoc_log,
                    int t) {
  if (policy_log.weeks != csoc_log.weeks) {
    throw DataError("drops_prevented: logs have different horizons");
  }
  return drop_cumulative(csoc_log, t) - drop_cumulative(policy_log, t);
}

double percent_reduction(double drops_treatment, double drops_control) {
  if (drops_control == 0.0) {
    throw DataError("percent_reduction: control drops are zero");
  }
  return 100.0 * (drops_control - drops_treatment) / drops_control;
}

double normalized_reward(double r_alg, double r_csoc, double r_whittle) {
  const double denom = r_whittle - r_csoc;
  if (denom == 0.0) {
    throw NumericalError("normalized reward: whittle and csoc rewards coincide");
  }
  return 100.0 * (r_alg - r_csoc) / denom;
}

SelectionAudit selection_audit(
    const TrialLog& log, std::span<const TransitionModel> cluster_models) {
  SelectionAudit audit;
  audit.weekly_counts.resize(log.weeks);

  std::vector<int> week1_ne_arms;
  for (int w = 0; w < log.weeks; ++w) {
    for (int n = 0; n < log.n_arms; ++n) {
      if (log.action_at(w, n) != Action::Active) continue;
      const int cluster = log.cluster_ids[n];
      const State s = log.state_at(w, n);
      const auto key = std::make_pair(cluster, idx(s));
      audit.weekly_counts[w][key]++;
      if (audit.success_prob.find(key) == audit.success_prob.end() &&
          cluster >= 0 &&
          cluster < static_cast<int>(cluster_models.size())) {
        audit.success_prob[key] =
            cluster_models[cluster].to_engaging(Action::Active, s);
      }
      if (w == 0) {
        audit.week1_calls++;
        if (s == State::NotEngaging) {
          audit.week1_calls_to_ne++;
          week1_ne_arms.push_back(n);
        }
      }
    }
  }

  if (audit.week1_calls > 0) {
    audit.week1_ne_share = static_cast<double>(audit.week1_calls_to_ne) /
                           audit.week1_calls;
  }
  if (!week1_ne_arms.empty() && log.weeks > 0) {
    int converted = 0;
    for (const int n : week1_ne_arms) {
      if (log.state_at(log.weeks - 1, n) == State::Engaging) converted++;
    }
    audit.ne_conversion_share =
        static_cast<double>(converted) / week1_ne_arms.size();
  }
  return audit;
}

}  // namespace rmab
