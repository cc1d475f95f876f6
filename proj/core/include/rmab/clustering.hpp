#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rmab/model.hpp"
#include "rmab/random_forest.hpp"

namespace rmab {

// One (state, action, next-state) sample from a weekly trajectory.
struct Transition {
  State from = State::NotEngaging;
  Action action = Action::Passive;
  State to = State::NotEngaging;
};

// One program participant: static registration features (already encoded
// numerically), a weekly trajectory (possibly empty for new arrivals), and
// the enrollment date as days since 1970-01-01.
struct Beneficiary {
  std::string id;
  std::vector<double> features;
  std::vector<Transition> trajectory;
  std::int64_t enrollment_day = 0;
};

struct TrainingData {
  std::vector<Beneficiary> beneficiaries;
  std::vector<std::string> feature_names;
};

// Pooled (state, action, next-state) sample counts.
struct TransitionCounts {
  std::array<std::array<std::array<std::uint64_t, 2>, 2>, 2> n{};  // [action][from][to]

  void add(const Transition& t) { n[idx(t.action)][idx(t.from)][idx(t.to)]++; }
  std::uint64_t row_total(Action a, State from) const {
    return n[idx(a)][idx(from)][0] + n[idx(a)][idx(from)][1];
  }
  std::uint64_t total() const;
  void merge(const TransitionCounts& other);
};

// Maximum-likelihood row estimates count(s,a,.)/total. Rows with zero
// samples come back flagged missing with NaN entries, never fabricated.
std::pair<TransitionCounts, TransitionModel> estimate_transitions(
    std::span<const Transition> samples);
std::pair<TransitionCounts, TransitionModel> estimate_transitions(
    std::span<const Beneficiary> beneficiaries);

enum class ClusterMethod { FO, FAP, FPP, PPF };

const char* to_string(ClusterMethod m);
ClusterMethod cluster_method_from_string(const std::string& s);

// Per-feature z-score standardization fitted on training data. Constant
// features keep sd = 1 so they map to zero.
struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> sd;

  void fit(std::span<const Beneficiary> data);
  std::vector<double> transform(std::span<const double> features) const;
};

// Rule-based level-1 bucketing for FAP/FPP: per-feature quantile bins,
// Cartesian combinations observed in the data become buckets.
struct BucketRules {
  // Interior cut points per feature, ascending. bin = number of edges <= x.
  std::vector<std::vector<double>> edges;

  static BucketRules from_quantiles(std::span<const Beneficiary> data,
                                    int quantiles_per_feature);
  std::vector<int> bin_tuple(std::span<const double> features) const;
};

// k cluster centers with pooled transition models and the method-specific
// feature -> cluster assignment. Immutable once built; safe to share.
struct ClusterModelSet {
  ClusterMethod method = ClusterMethod::PPF;
  int k = 0;
  std::vector<TransitionModel> models;
  std::vector<std::size_t> sizes;                 // beneficiaries per cluster
  std::vector<std::vector<double>> centers;       // method-specific space

  // FO assignment state.
  FeatureScaler scaler;

  // FAP/FPP assignment state: rules -> bucket -> cluster. Buckets are the
  // observed bin tuples, ordered lexicographically.
  BucketRules rules;
  std::vector<std::vector<int>> bucket_keys;
  std::vector<int> bucket_to_cluster;

  // PPF assignment state.
  RandomForest forest;

  // Maps a feature vector to a cluster id in [0, k).
  int assign(std::span<const double> features) const;
};

// Features-only clustering: k-means on standardized features, transition
// models pooled per cluster.
ClusterModelSet cluster_fo(const TrainingData& train, int k,
                           std::uint64_t seed);

// Feature + All Probabilities: rule buckets, per-bucket pooled models,
// k-means over the four free transition parameters of the buckets.
// Bucket rows that cannot be estimated are filled in before the level-2
// distance computation (passive rows from the population pool, active
// rows from the nearest bucket in passive space).
ClusterModelSet cluster_fap(const TrainingData& train, const BucketRules& rules,
                            int k, std::uint64_t seed);

// Feature + Passive Probabilities: as FAP, but level-2 k-means runs on the
// passive pair only; active models are pooled per final cluster afterwards.
ClusterModelSet cluster_fpp(const TrainingData& train, const BucketRules& rules,
                            int k, std::uint64_t seed);

// Passive-probability clustering with a learned feature map: k-means on
// per-beneficiary passive estimates, then a random forest trained to map
// features to the cluster label. Beneficiaries lacking a passive sample
// for some state row are excluded from center fitting and assigned by the
// forest afterwards.
ClusterModelSet cluster_ppf(const TrainingData& train, int k,
                            std::uint64_t seed);

// Copies every still-missing active row from the nearest cluster (Euclidean
// distance in passive-probability space) that has the row estimated from
// data; ties go to the lower cluster id. Imputed rows are flagged.
// Throws DataError when some row has no donor anywhere.
ClusterModelSet impute_missing_active(const ClusterModelSet& set);

struct ClusteringEval {
  double avg_rmse = 0.0;     // vs ground-truth passive pairs
  double size_stddev = 0.0;  // population stddev of cluster sizes
};

// Table-1-style evaluation: per-beneficiary RMSE between the ground-truth
// passive pair and the assigned cluster model's passive pair, averaged
// over beneficiaries, plus the spread of cluster sizes.
ClusteringEval evaluate_clustering(
    const ClusterModelSet& set, std::span<const Beneficiary> beneficiaries,
    std::span<const std::array<double, 2>> ground_truth_passive);

}  // namespace rmab
