#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmab/clustering.hpp"
#include "rmab/policies.hpp"
#include "rmab/simulator.hpp"
#include "rmab/trial_log.hpp"
#include "rmab/whittle.hpp"

namespace rmab {

// One diagnostic per rejected input row; every row is either loaded or
// produces exactly one of these.
struct Diagnostic {
  std::string file;
  int line = 0;  // 1-based, header is line 1
  std::string message;
};

std::string format_diagnostic(const Diagnostic& d);

// --- listening logs and the 30-second engagement rule ---------------------

struct ListeningRecord {
  std::string beneficiary_id;
  std::int64_t day = 0;            // derived from the ISO-8601 timestamp
  double duration_seconds = 0.0;
};

// CSV columns: beneficiary_id, timestamp, duration_listened.
// Malformed rows (bad timestamp, negative duration) produce diagnostics
// with line numbers and are skipped.
std::vector<ListeningRecord> read_listening_csv(
    const std::string& path, std::vector<Diagnostic>* diagnostics);

// Weekly engagement states per the 30-second rule: a week counts as
// engaging iff at least one record that week was listened to for strictly
// more than 30 seconds; weeks without records are NE. Week i covers
// [week_start_day + 7i, week_start_day + 7(i+1)).
std::vector<State> derive_weekly_states(
    std::span<const ListeningRecord> records, std::int64_t week_start_day,
    int n_weeks);

// --- training data ---------------------------------------------------------

// Features CSV: beneficiary_id, <feature columns...>, enrollment_date.
// Non-numeric feature columns are one-hot encoded (categories in
// lexicographic order); numeric columns pass through. Trajectory CSV:
// beneficiary_id, week_index, state, action, next_state with states in
// {NE, E, 0, 1} and actions in {p, a}. Rows that fail to parse or to join
// are rejected with one diagnostic each; duplicate feature ids are an
// error.
TrainingData load_training_data(const std::string& features_path,
                                const std::string& trajectory_path,
                                std::vector<Diagnostic>* diagnostics);

// --- model and table serialization ------------------------------------------

void write_model_json(const ClusterModelSet& set,
                      const std::vector<std::string>& feature_names,
                      const std::string& path);

struct LoadedModel {
  ClusterModelSet set;
  std::vector<std::string> feature_names;
};

LoadedModel read_model_json(const std::string& path);

// CSV columns: cluster_id, state, whittle_index, beta.
void write_index_table_csv(const IndexTable& table, const std::string& path);
IndexTable read_index_table_csv(const std::string& path);

// --- planning cohort snapshots ----------------------------------------------

struct CohortRow {
  std::string beneficiary_id;
  int cluster_id = 0;
  State state = State::NotEngaging;
  int weeks_since_last_call = kNeverCalled;  // -1 = never called
  std::int64_t enrollment_day = 0;
};

// CSV columns: beneficiary_id, cluster_id, state, weeks_since_last_call,
// enrollment_date. Extra columns are ignored.
std::vector<CohortRow> read_cohort_csv(const std::string& path);
void write_cohort_csv(const std::vector<CohortRow>& rows,
                      const std::string& path);

// Weekly call list: week_index, arm_id, policy, whittle_index (blank for
// non-Whittle policies), cluster_id, state.
struct CallListEntry {
  int week_index = 0;
  std::string arm_id;
  std::string policy;
  std::optional<double> whittle_index;
  int cluster_id = 0;
  State state = State::NotEngaging;
};

void write_call_list_csv(const std::vector<CallListEntry>& entries,
                         const std::string& path);
std::vector<CallListEntry> read_call_list_csv(const std::string& path);

// --- trial logs and experiment outputs ---------------------------------------

// CSV columns: trial, week, arm, state, action, reward. One file holds all
// trials of one policy; the policy tag travels in the filename, so the
// reader takes it explicitly. Cluster ids are not part of the format and
// must be attached by the caller before running a selection audit.
void write_trial_log_csv(const TrialLog& log, const std::string& path,
                         bool append = false);
std::vector<TrialLog> read_trial_logs_csv(const std::string& path,
                                          const std::string& policy);

void write_experiment_json(const ExperimentResult& result,
                           const std::string& path);

// Plot-ready CSV: x_value, policy, normalized_reward, stderr.
struct SweepPoint {
  double x_value = 0.0;
  std::string policy;
  double normalized_reward = 0.0;
  double stderr_value = 0.0;
};
void write_sweep_csv(const std::vector<SweepPoint>& points,
                     const std::string& path);

// Metric series CSV: week, policy, drops_prevented.
struct PreventedPoint {
  int week = 0;
  std::string policy;
  double drops_prevented = 0.0;
};
void write_prevented_csv(const std::vector<PreventedPoint>& points,
                         const std::string& path);

// --- run configuration --------------------------------------------------------

// Shared experiment knobs, loadable from a JSON file. Unknown keys are
// rejected; flags given on the command line override file values.
struct RunConfig {
  std::string method = "ppf";
  int k = 40;
  double beta = 0.5;
  std::vector<int> m_schedule = {225};
  int eta = 4;
  int weeks = 40;
  int trials = 30;
  std::uint64_t seed = 0;
  std::string features_path;
  std::string trajectories_path;
  std::string rules_path;
};

RunConfig read_run_config(const std::string& path);

// Bucket rules file: {"quantiles": q} or {"edges": [[...], ...]}. The
// default (empty path) is 3 quantiles per feature, resolved against the
// training data.
struct BucketRulesSpec {
  int quantiles = 3;
  std::optional<BucketRules> edges;

  BucketRules resolve(std::span<const Beneficiary> data) const {
    return edges ? *edges : BucketRules::from_quantiles(data, quantiles);
  }
};

BucketRulesSpec read_bucket_rules(const std::string& path);

// Parses "225" or "225,200,250" into a per-week schedule.
std::vector<int> parse_m_schedule(const std::string& text);

}  // namespace rmab
