#include "rmab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rmab/dates.hpp"
#include "rmab/errors.hpp"
#include "rmab/metrics.hpp"

namespace rmab {

namespace {

constexpr std::uint64_t kCohortTag = stream_tag("cohort");
constexpr std::uint64_t kArmTag = stream_tag("arm");
constexpr std::uint64_t kEvolveTag = stream_tag("evolve");
constexpr std::uint64_t kPolicyTag = stream_tag("policy");

// Enrollment dates are staggered over a four-week window so round-robin
// ordering is meaningful.
const std::int64_t kEnrollmentBase = days_from_civil(2021, 2, 16);

TransitionModel draw_archetype_model(int archetype, const ArchetypeRanges& r,
                                     Rng& rng) {
  if (archetype == kArchetypeNonRecoverable) {
    const double p_ne = rng.uniform(r.nr_p_ne_e_lo, r.nr_p_ne_e_hi);
    const double p_e = rng.uniform(r.nr_p_e_e_lo, r.nr_p_e_e_hi);
    const double a_ne = rng.uniform(r.nr_a_ne_e_lo, r.nr_a_ne_e_hi);
    const double a_e =
        std::min(1.0, p_e + rng.uniform(r.nr_e_uplift_lo, r.nr_e_uplift_hi));
    return make_model(p_ne, p_e, a_ne, a_e);
  }
  const double p_ne = rng.uniform(r.sc_p_ne_e_lo, r.sc_p_ne_e_hi);
  const double p_e = rng.uniform(r.sc_p_e_e_lo, r.sc_p_e_e_hi);
  const double a_ne =
      std::min(1.0, p_ne + rng.uniform(r.sc_uplift_lo, r.sc_uplift_hi));
  const double a_e =
      std::min(1.0, p_e + rng.uniform(r.sc_uplift_lo, r.sc_uplift_hi));
  return make_model(p_ne, p_e, a_ne, a_e);
}

// Registration-style features. The first four carry the archetype signal
// scaled by the informativeness knob; the rest are pure noise.
std::vector<double> draw_features(int archetype, double informativeness,
                                  Rng& rng) {
  const double sign = archetype == kArchetypeNonRecoverable ? 1.0 : -1.0;
  const double w = informativeness;
  std::vector<double> f(8);
  f[0] = 28.0 + 5.0 * sign * w + 4.0 * rng.normal();            // age
  f[1] = 20.0 + 5.0 * sign * w + 4.0 * rng.normal();            // gestation age
  f[2] = 3.0 + 1.9 * sign * w + 1.5 * rng.normal();             // income bracket
  f[3] = 2.5 + 1.6 * sign * w + 1.25 * rng.normal();            // education level
  f[4] = static_cast<double>(rng.below(5));                     // children
  f[5] = static_cast<double>(rng.below(4));                     // language
  f[6] = static_cast<double>(rng.below(3));                     // call slot
  f[7] = rng.bernoulli(0.7) ? 1.0 : 0.0;                        // phone owner
  return f;
}

const std::vector<std::string>& synthetic_feature_names() {
  static const std::vector<std::string> names = {
      "age",      "gestation_age", "income_bracket", "education_level",
      "children", "language",      "call_slot",      "phone_owner"};
  return names;
}

std::vector<int> shuffled_archetypes(int n_arms, double fraction_nr,
                                     std::uint64_t seed) {
  const int n_nr = static_cast<int>(std::llround(fraction_nr * n_arms));
  std::vector<int> archetype(n_arms, kArchetypeSelfCorrecting);
  std::fill(archetype.begin(), archetype.begin() + std::min(n_nr, n_arms),
            kArchetypeNonRecoverable);
  Rng rng(derive_seed(seed, {stream_tag("archetype")}));
  for (int i = n_arms - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(i + 1));
    std::swap(archetype[i], archetype[j]);
  }
  return archetype;
}

double sample_stderr(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (const double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(n - 1)) /
         std::sqrt(static_cast<double>(n));
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double m = 0.0;
  for (const double x : xs) m += x;
  return m / static_cast<double>(xs.size());
}

}  // namespace

Cohort generate_cohort(const CohortSpec& spec) {
  if (spec.n_arms < 1) throw DataError("cohort: need at least one arm");
  if (spec.fraction_nonrecoverable < 0.0 || spec.fraction_nonrecoverable > 1.0) {
    throw DataError("cohort: fraction_nonrecoverable must lie in [0, 1]");
  }
  Cohort cohort;
  cohort.archetype = shuffled_archetypes(
      spec.n_arms, spec.fraction_nonrecoverable, spec.seed);
  cohort.arms.resize(spec.n_arms);
  cohort.ground_truth.resize(spec.n_arms);
  cohort.initial_states.resize(spec.n_arms);
  cohort.cluster_ids.resize(spec.n_arms);
  for (int i = 0; i < spec.n_arms; ++i) {
    Rng rng(derive_seed(spec.seed, {kCohortTag, kArmTag,
                                    static_cast<std::uint64_t>(i)}));
    cohort.ground_truth[i] =
        draw_archetype_model(cohort.archetype[i], spec.ranges, rng);
    Beneficiary& b = cohort.arms[i];
    b.id = "arm" + std::to_string(i);
    b.features =
        draw_features(cohort.archetype[i], spec.feature_informativeness, rng);
    b.enrollment_day = kEnrollmentBase + static_cast<std::int64_t>(rng.below(28));
    cohort.initial_states[i] =
        rng.bernoulli(0.5) ? State::Engaging : State::NotEngaging;
    cohort.cluster_ids[i] = i;
  }
  cohort.planning_models = cohort.ground_truth;
  return cohort;
}

Cohort cohort_from_models(std::span<const TransitionModel> cluster_models,
                          std::span<const double> weights, int n_arms,
                          std::uint64_t seed) {
  if (cluster_models.empty()) throw DataError("cohort: no cluster models");
  if (!weights.empty() && weights.size() != cluster_models.size()) {
    throw DataError("cohort: weight count does not match cluster count");
  }
  std::vector<double> cum(cluster_models.size());
  double total = 0.0;
  for (std::size_t c = 0; c < cluster_models.size(); ++c) {
    total += weights.empty() ? 1.0 : weights[c];
    cum[c] = total;
  }
  if (total <= 0.0) throw DataError("cohort: weights sum to zero");

  Cohort cohort;
  cohort.planning_models.assign(cluster_models.begin(), cluster_models.end());
  cohort.arms.resize(n_arms);
  cohort.ground_truth.resize(n_arms);
  cohort.archetype.assign(n_arms, -1);
  cohort.initial_states.resize(n_arms);
  cohort.cluster_ids.resize(n_arms);
  for (int i = 0; i < n_arms; ++i) {
    Rng rng(derive_seed(seed, {kCohortTag, kArmTag,
                               static_cast<std::uint64_t>(i)}));
    const double u = rng.uniform01() * total;
    int cluster = 0;
    while (cluster + 1 < static_cast<int>(cum.size()) && u > cum[cluster]) {
      cluster++;
    }
    cohort.cluster_ids[i] = cluster;
    cohort.ground_truth[i] = cluster_models[cluster];
    Beneficiary& b = cohort.arms[i];
    b.id = "arm" + std::to_string(i);
    b.enrollment_day = kEnrollmentBase + static_cast<std::int64_t>(rng.below(28));
    cohort.initial_states[i] =
        rng.bernoulli(0.5) ? State::Engaging : State::NotEngaging;
  }
  return cohort;
}

SyntheticHistory synthesize_training_data(const CohortSpec& spec, int weeks,
                                          double active_rate) {
  const Cohort cohort = generate_cohort(spec);
  SyntheticHistory history;
  history.train.feature_names = synthetic_feature_names();
  history.train.beneficiaries = cohort.arms;
  history.archetype = cohort.archetype;
  history.ground_truth_passive.resize(cohort.n_arms());

  for (int i = 0; i < cohort.n_arms(); ++i) {
    history.ground_truth_passive[i] = cohort.ground_truth[i].passive_vector();
    Rng rng(derive_seed(spec.seed, {stream_tag("history"),
                                    static_cast<std::uint64_t>(i)}));
    State s = cohort.initial_states[i];
    auto& trajectory = history.train.beneficiaries[i].trajectory;
    trajectory.reserve(weeks);
    for (int w = 0; w < weeks; ++w) {
      const Action a =
          rng.bernoulli(active_rate) ? Action::Active : Action::Passive;
      const State next = evolve(s, a, cohort.ground_truth[i], rng);
      trajectory.push_back({s, a, next});
      s = next;
    }
  }
  return history;
}

TrialLog run_trial(const Cohort& cohort, const PolicyConfig& policy,
                   int weeks, std::span<const int> m_schedule, int eta,
                   std::uint64_t base_seed, int trial) {
  const int n = cohort.n_arms();
  if (policy.kind == PolicyKind::Whittle && policy.table == nullptr) {
    throw DataError("whittle policy requires a precomputed index table");
  }
  if (eta < 1) throw DataError("eta must be at least 1");

  TrialLog log;
  log.policy = to_string(policy.kind);
  log.seed = base_seed;
  log.trial = trial;
  log.weeks = weeks;
  log.n_arms = n;
  log.cluster_ids = cohort.cluster_ids;
  log.states.resize(static_cast<std::size_t>(weeks) * n);
  log.actions.assign(static_cast<std::size_t>(weeks) * n, 0);

  CohortState cs;
  cs.arms.resize(n);
  for (int i = 0; i < n; ++i) {
    cs.arms[i].state = cohort.initial_states[i];
    cs.arms[i].cluster = cohort.cluster_ids[i];
    cs.arms[i].enrollment_day = cohort.arms[i].enrollment_day;
    cs.arms[i].weeks_since_last_call = kNeverCalled;
  }
  std::vector<int> last_call(n, -1);

  Rng policy_rng(derive_seed(base_seed, {kPolicyTag,
                                         static_cast<std::uint64_t>(trial)}));

  for (int w = 0; w < weeks; ++w) {
    cs.week = w;
    for (int i = 0; i < n; ++i) {
      cs.arms[i].weeks_since_last_call =
          last_call[i] < 0 ? kNeverCalled : w - last_call[i];
      log.states[static_cast<std::size_t>(w) * n + i] =
          static_cast<std::int8_t>(idx(cs.arms[i].state));
    }
    const int m = m_schedule.empty()
                      ? 0
                      : m_schedule[std::min<std::size_t>(w, m_schedule.size() - 1)];

    std::vector<int> selected;
    if (m > 0 && policy.kind != PolicyKind::Csoc) {
      const std::vector<int> eligible = eligible_arms(cs, eta);
      switch (policy.kind) {
        case PolicyKind::Whittle:
          selected = select_whittle(cs, *policy.table, m, eligible);
          break;
        case PolicyKind::RoundRobin:
          selected = select_round_robin(cs, m, eligible);
          break;
        case PolicyKind::Random:
          selected = select_random(m, eligible, policy_rng);
          break;
        case PolicyKind::Myopic:
          selected = select_myopic(cs, cohort.planning_models, m, eligible);
          break;
        case PolicyKind::Csoc:
          break;
      }
    }
    for (const int id : selected) {
      log.actions[static_cast<std::size_t>(w) * n + id] = 1;
      last_call[id] = w;
    }

    for (int i = 0; i < n; ++i) {
      const Action a = log.actions[static_cast<std::size_t>(w) * n + i] == 1
                           ? Action::Active
                           : Action::Passive;
      Rng arm_rng(derive_seed(base_seed,
                              {kEvolveTag, static_cast<std::uint64_t>(trial),
                               static_cast<std::uint64_t>(i),
                               static_cast<std::uint64_t>(w)}));
      cs.arms[i].state = evolve(cs.arms[i].state, a, cohort.ground_truth[i],
                                arm_rng);
    }
  }
  return log;
}

namespace {

ExperimentResult run_experiment_impl(
    const CohortSpec* spec, const Cohort* fixed_cohort,
    std::span<const PolicyKind> policies, int trials, int weeks,
    std::span<const int> m_schedule, double beta, int eta,
    std::uint64_t base_seed, const ExperimentOptions& options) {
  ExperimentResult result;
  result.trials = trials;
  result.weeks = weeks;
  result.beta = beta;
  result.eta = eta;
  result.m_schedule.assign(m_schedule.begin(), m_schedule.end());

  const std::size_t n_pol = policies.size();
  result.policies.resize(n_pol);
  for (std::size_t p = 0; p < n_pol; ++p) {
    result.policies[p].policy = to_string(policies[p]);
    result.policies[p].drops_prevented_mean.assign(weeks, 0.0);
  }

  int csoc_at = -1;
  int whittle_at = -1;
  for (std::size_t p = 0; p < n_pol; ++p) {
    if (policies[p] == PolicyKind::Csoc) csoc_at = static_cast<int>(p);
    if (policies[p] == PolicyKind::Whittle) whittle_at = static_cast<int>(p);
  }

  std::vector<std::vector<double>> final_drops(n_pol);
  std::vector<std::vector<double>> week1_shares(n_pol);
  std::vector<std::vector<double>> conversions(n_pol);

  IndexTable fixed_table;
  if (fixed_cohort != nullptr && whittle_at >= 0) {
    fixed_table = precompute_index_table(fixed_cohort->planning_models, beta);
  }

  for (int j = 0; j < trials; ++j) {
    Cohort generated;
    const Cohort* cohort = fixed_cohort;
    if (cohort == nullptr) {
      CohortSpec trial_spec = *spec;
      trial_spec.seed = derive_seed(base_seed, {kCohortTag,
                                                static_cast<std::uint64_t>(j)});
      generated = generate_cohort(trial_spec);
      cohort = &generated;
    }

    IndexTable trial_table;
    const IndexTable* table = &fixed_table;
    if (fixed_cohort == nullptr && whittle_at >= 0) {
      trial_table = precompute_index_table(cohort->planning_models, beta);
      table = &trial_table;
    }

    std::vector<TrialLog> logs;
    logs.reserve(n_pol);
    for (std::size_t p = 0; p < n_pol; ++p) {
      PolicyConfig config;
      config.kind = policies[p];
      config.table = policies[p] == PolicyKind::Whittle ? table : nullptr;
      logs.push_back(run_trial(*cohort, config, weeks, m_schedule, eta,
                               base_seed, j));
      if (options.on_log) options.on_log(logs.back());
    }

    for (std::size_t p = 0; p < n_pol; ++p) {
      PolicyAggregate& agg = result.policies[p];
      agg.per_trial_reward.push_back(logs[p].total_discounted_reward(beta));
      final_drops[p].push_back(drop_cumulative(logs[p], weeks - 1));
      const SelectionAudit audit =
          selection_audit(logs[p], cohort->planning_models);
      week1_shares[p].push_back(audit.week1_ne_share);
      conversions[p].push_back(audit.ne_conversion_share);
      if (csoc_at >= 0) {
        for (int t = 0; t < weeks; ++t) {
          agg.drops_prevented_mean[t] +=
              drops_prevented(logs[p], logs[csoc_at], t) /
              static_cast<double>(trials);
        }
      }
    }
    if (csoc_at >= 0 && whittle_at >= 0) {
      const double rc = logs[csoc_at].total_discounted_reward(beta);
      const double rw = logs[whittle_at].total_discounted_reward(beta);
      for (std::size_t p = 0; p < n_pol; ++p) {
        result.policies[p].per_trial_normalized.push_back(
            normalized_reward(logs[p].total_discounted_reward(beta), rc, rw));
      }
    }
  }

  for (std::size_t p = 0; p < n_pol; ++p) {
    PolicyAggregate& agg = result.policies[p];
    agg.mean_reward = mean_of(agg.per_trial_reward);
    agg.stderr_reward = sample_stderr(agg.per_trial_reward);
    agg.final_cumulative_drop_mean = mean_of(final_drops[p]);
    agg.week1_ne_call_share = mean_of(week1_shares[p]);
    agg.ne_conversion_share = mean_of(conversions[p]);
    if (!agg.per_trial_normalized.empty()) {
      agg.normalized_mean = mean_of(agg.per_trial_normalized);
      agg.normalized_stderr = sample_stderr(agg.per_trial_normalized);
    }
  }
  if (csoc_at >= 0 && whittle_at >= 0) {
    const double rc = result.policies[csoc_at].mean_reward;
    const double rw = result.policies[whittle_at].mean_reward;
    for (auto& agg : result.policies) {
      agg.normalized = normalized_reward(agg.mean_reward, rc, rw);
    }
  }
  return result;
}

}  // namespace

ExperimentResult run_experiment(const CohortSpec& spec,
                                std::span<const PolicyKind> policies,
                                int trials, int weeks,
                                std::span<const int> m_schedule, double beta,
                                int eta, std::uint64_t base_seed,
                                const ExperimentOptions& options) {
  return run_experiment_impl(&spec, nullptr, policies, trials, weeks,
                             m_schedule, beta, eta, base_seed, options);
}

ExperimentResult run_experiment_on_cohort(
    const Cohort& cohort, std::span<const PolicyKind> policies, int trials,
    int weeks, std::span<const int> m_schedule, double beta, int eta,
    std::uint64_t base_seed, const ExperimentOptions& options) {
  return run_experiment_impl(nullptr, &cohort, policies, trials, weeks,
                             m_schedule, beta, eta, base_seed, options);
}

}  // namespace rmab
