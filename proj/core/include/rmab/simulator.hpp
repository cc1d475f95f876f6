#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rmab/clustering.hpp"
#include "rmab/model.hpp"
#include "rmab/policies.hpp"
#include "rmab/trial_log.hpp"
#include "rmab/whittle.hpp"

namespace rmab {

// Parameter ranges for the two synthetic archetypes. Non-recoverable arms
// rarely re-engage on their own (P^p_{NE,E} < 0.2) but respond strongly to
// a call; self-correcting arms lapse sporadically and bounce back without
// help, so a call buys almost nothing.
struct ArchetypeRanges {
  double nr_p_ne_e_lo = 0.0, nr_p_ne_e_hi = 0.2;
  double nr_p_e_e_lo = 0.4, nr_p_e_e_hi = 0.7;
  double nr_a_ne_e_lo = 0.6, nr_a_ne_e_hi = 0.8;
  double nr_e_uplift_lo = 0.0, nr_e_uplift_hi = 0.05;

  double sc_p_ne_e_lo = 0.8, sc_p_ne_e_hi = 0.95;
  double sc_p_e_e_lo = 0.85, sc_p_e_e_hi = 0.99;
  double sc_uplift_lo = 0.0, sc_uplift_hi = 0.05;
};

struct CohortSpec {
  int n_arms = 1000;
  double fraction_nonrecoverable = 0.5;  // x
  // 0 = features carry no archetype signal, 1 = archetype recoverable from
  // features with near-perfect accuracy.
  double feature_informativeness = 1.0;
  std::uint64_t seed = 0;
  ArchetypeRanges ranges;
};

constexpr int kArchetypeSelfCorrecting = 0;
constexpr int kArchetypeNonRecoverable = 1;

// A simulated cohort: per arm the ground-truth dynamics the simulator
// evolves, the latent archetype label, the initial state, the cluster id
// the planner keys on, and the models the planner is allowed to see.
struct Cohort {
  std::vector<Beneficiary> arms;  // features + enrollment, empty trajectories
  std::vector<TransitionModel> ground_truth;    // per arm
  std::vector<int> archetype;                   // per arm
  std::vector<State> initial_states;            // per arm
  std::vector<int> cluster_ids;                 // per arm
  std::vector<TransitionModel> planning_models; // per cluster id

  int n_arms() const { return static_cast<int>(ground_truth.size()); }
};

// Draws an adversarial-mix cohort: round(x * n) non-recoverable arms,
// the rest self-correcting, archetypes shuffled across arm ids, initial
// states split roughly half E / half NE. Planning models are the per-arm
// ground truth (cluster id = arm id).
Cohort generate_cohort(const CohortSpec& spec);

// Cohort whose arms are drawn from k known cluster models (weights give
// the expected cluster mix). Ground truth per arm is its cluster's model.
Cohort cohort_from_models(std::span<const TransitionModel> cluster_models,
                          std::span<const double> weights, int n_arms,
                          std::uint64_t seed);

// Historical data for the offline pipeline: evolves a cohort for the given
// number of weeks, calling each arm independently with probability
// active_rate per week, and returns the trajectories plus ground truth.
struct SyntheticHistory {
  TrainingData train;
  std::vector<std::array<double, 2>> ground_truth_passive;  // per beneficiary
  std::vector<int> archetype;
};

SyntheticHistory synthesize_training_data(const CohortSpec& spec, int weeks,
                                          double active_rate);

// Policy configuration for a rollout. Whittle needs the index table;
// myopic needs the planning models; random draws from its own substream.
struct PolicyConfig {
  PolicyKind kind = PolicyKind::Csoc;
  const IndexTable* table = nullptr;
};

// Rolls the cohort forward `weeks` rounds under one policy. Evolution
// noise for (arm, week) comes from a substream of (base_seed, trial, arm,
// week): common random numbers across policies, so paired comparisons
// differ only through the actions taken.
TrialLog run_trial(const Cohort& cohort, const PolicyConfig& policy,
                   int weeks, std::span<const int> m_schedule, int eta,
                   std::uint64_t base_seed, int trial);

struct PolicyAggregate {
  std::string policy;
  std::vector<double> per_trial_reward;      // total discounted reward
  double mean_reward = 0.0;
  double stderr_reward = 0.0;
  double normalized = 0.0;                   // 0 = CSOC, 100 = Whittle
  std::vector<double> per_trial_normalized;  // paired per-trial normalization
  double normalized_mean = 0.0;
  double normalized_stderr = 0.0;
  double final_cumulative_drop_mean = 0.0;
  std::vector<double> drops_prevented_mean;  // per week, vs paired CSOC
  double week1_ne_call_share = 0.0;          // mean over trials
  double ne_conversion_share = 0.0;          // mean over trials
};

struct ExperimentResult {
  std::vector<PolicyAggregate> policies;
  int trials = 0;
  int weeks = 0;
  double beta = 0.0;
  int eta = 1;
  std::vector<int> m_schedule;
};

struct ExperimentOptions {
  // Invoked after each finished trial log (e.g. to persist CSVs).
  std::function<void(const TrialLog&)> on_log;
};

// Paired multi-trial experiment: trial j shares one generated cohort and
// one evolution random stream structure across all policies. Normalized
// reward uses the mean-reward formula anchored at CSOC = 0, Whittle = 100
// when both anchors are present.
ExperimentResult run_experiment(const CohortSpec& spec,
                                std::span<const PolicyKind> policies,
                                int trials, int weeks,
                                std::span<const int> m_schedule, double beta,
                                int eta, std::uint64_t base_seed,
                                const ExperimentOptions& options = {});

// Same experiment but with every trial reusing one fixed cohort (used for
// model-based simulation where the cohort comes from a trained model).
ExperimentResult run_experiment_on_cohort(
    const Cohort& cohort, std::span<const PolicyKind> policies, int trials,
    int weeks, std::span<const int> m_schedule, double beta, int eta,
    std::uint64_t base_seed, const ExperimentOptions& options = {});

}  // namespace rmab
