#include "rmab/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rmab/errors.hpp"
#include "rmab/kmeans.hpp"
#include "rmab/rng.hpp"

namespace rmab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

TransitionModel model_from_counts(const TransitionCounts& counts) {
  TransitionModel m;
  for (int a = 0; a < 2; ++a) {
    for (int s = 0; s < 2; ++s) {
      const std::uint64_t total =
          counts.n[a][s][0] + counts.n[a][s][1];
      if (total == 0) {
        m.row_missing[a][s] = true;
        m.prob[a][s] = {kNaN, kNaN};
      } else {
        m.prob[a][s] = {
            static_cast<double>(counts.n[a][s][0]) / total,
            static_cast<double>(counts.n[a][s][1]) / total};
      }
    }
  }
  return m;
}

// Fills missing passive rows of cluster-level models from the population
// pool. Passive data is abundant (most arm-weeks are passive), so this
// only triggers for tiny degenerate clusters; active rows are left to
// impute_missing_active which implements the nearest-cluster heuristic.
void backfill_passive_rows(std::vector<TransitionModel>& models,
                           const TransitionModel& population) {
  const int a = idx(Action::Passive);
  for (auto& m : models) {
    for (int s = 0; s < 2; ++s) {
      if (m.row_missing[a][s] && !population.row_missing[a][s]) {
        m.prob[a][s] = population.prob[a][s];
        m.row_missing[a][s] = false;
        m.row_imputed[a][s] = true;
      }
    }
  }
}

std::vector<TransitionModel> pool_models(
    std::span<const Beneficiary> data, const std::vector<int>& membership,
    int k, std::vector<std::size_t>* sizes_out) {
  std::vector<TransitionCounts> counts(k);
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int c = membership[i];
    sizes[c]++;
    for (const Transition& t : data[i].trajectory) counts[c].add(t);
  }
  std::vector<TransitionModel> models;
  models.reserve(k);
  for (int c = 0; c < k; ++c) models.push_back(model_from_counts(counts[c]));
  if (sizes_out) *sizes_out = std::move(sizes);
  return models;
}

double sq_dist2(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

// Observed level-1 buckets: lexicographically ordered distinct bin tuples
// plus per-beneficiary bucket membership.
struct Buckets {
  std::vector<std::vector<int>> keys;
  std::vector<int> membership;  // per beneficiary
};

Buckets build_buckets(std::span<const Beneficiary> data,
                      const BucketRules& rules) {
  Buckets b;
  std::vector<std::vector<int>> tuples(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    tuples[i] = rules.bin_tuple(data[i].features);
  }
  b.keys = tuples;
  std::sort(b.keys.begin(), b.keys.end());
  b.keys.erase(std::unique(b.keys.begin(), b.keys.end()), b.keys.end());
  b.membership.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    b.membership[i] = static_cast<int>(
        std::lower_bound(b.keys.begin(), b.keys.end(), tuples[i]) -
        b.keys.begin());
  }
  return b;
}

// Shared FAP/FPP machinery; level-2 k-means runs on the bucket 4-vector
// (use_active = true) or the passive pair only.
ClusterModelSet cluster_bucketed(const TrainingData& train,
                                 const BucketRules& rules, int k,
                                 std::uint64_t seed, bool use_active,
                                 ClusterMethod method) {
  std::span<const Beneficiary> data(train.beneficiaries);
  const auto [pop_counts, population] = estimate_transitions(data);

  Buckets buckets = build_buckets(data, rules);
  const int n_buckets = static_cast<int>(buckets.keys.size());

  std::vector<TransitionCounts> bucket_counts(n_buckets);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (const Transition& t : data[i].trajectory) {
      bucket_counts[buckets.membership[i]].add(t);
    }
  }

  int estimable = 0;
  for (const auto& c : bucket_counts) {
    if (c.total() > 0) estimable++;
  }
  if (estimable < k) {
    std::ostringstream os;
    os << to_string(method) << ": only " << estimable
       << " buckets with estimable parameters, need k = " << k;
    throw DataError(os.str());
  }

  std::vector<TransitionModel> bucket_models;
  bucket_models.reserve(n_buckets);
  for (const auto& c : bucket_counts) bucket_models.push_back(model_from_counts(c));
  backfill_passive_rows(bucket_models, population);

  // Impute bucket active rows before clustering so no missing coordinate
  // enters the level-2 distance computation.
  if (use_active) {
    for (int b = 0; b < n_buckets; ++b) {
      for (int s = 0; s < 2; ++s) {
        if (!bucket_models[b].row_missing[1][s]) continue;
        int donor = -1;
        double best = std::numeric_limits<double>::max();
        for (int d = 0; d < n_buckets; ++d) {
          if (d == b || bucket_models[d].row_missing[1][s]) continue;
          if (bucket_models[d].row_imputed[1][s]) continue;
          const double dist = sq_dist2(bucket_models[b].passive_vector(),
                                       bucket_models[d].passive_vector());
          if (dist < best) {
            best = dist;
            donor = d;
          }
        }
        if (donor < 0) {
          std::ostringstream os;
          os << to_string(method) << ": no bucket has active data for row "
             << to_string(state_from_index(s));
          throw DataError(os.str());
        }
        bucket_models[b].prob[1][s] = bucket_models[donor].prob[1][s];
        bucket_models[b].row_missing[1][s] = false;
        bucket_models[b].row_imputed[1][s] = true;
      }
    }
  }

  std::vector<std::vector<double>> points(n_buckets);
  for (int b = 0; b < n_buckets; ++b) {
    if (use_active) {
      const auto v = bucket_models[b].four_vector();
      points[b].assign(v.begin(), v.end());
    } else {
      const auto v = bucket_models[b].passive_vector();
      points[b].assign(v.begin(), v.end());
    }
  }

  // Degenerate data can leave fewer distinct bucket vectors than k; any
  // k-partition is then equally good, so cluster what is distinct and pad
  // with empty clusters.
  auto distinct = points;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const int k_eff = std::min<int>(k, static_cast<int>(distinct.size()));

  const KMeansResult km =
      kmeans(points, k_eff, derive_seed(seed, {stream_tag("level2")}));

  ClusterModelSet set;
  set.method = method;
  set.k = k;
  set.rules = rules;
  set.bucket_keys = buckets.keys;
  set.bucket_to_cluster = km.assignment;

  std::vector<int> membership(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    membership[i] = km.assignment[buckets.membership[i]];
  }
  set.models = pool_models(data, membership, k, &set.sizes);
  backfill_passive_rows(set.models, population);
  for (int c = k_eff; c < k; ++c) {
    set.models[c] = population;
    for (int a = 0; a < 2; ++a) {
      for (int s = 0; s < 2; ++s) {
        if (!set.models[c].row_missing[a][s]) set.models[c].row_imputed[a][s] = true;
      }
    }
  }

  set.centers = km.centers;
  set.centers.resize(k);
  return set;
}

int nearest_center(const std::vector<std::vector<double>>& centers,
                   std::span<const double> point) {
  int best = 0;
  double best_d = std::numeric_limits<double>::max();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    if (centers[c].empty()) continue;
    double d = 0.0;
    for (std::size_t j = 0; j < centers[c].size(); ++j) {
      const double x = centers[c][j] - point[j];
      d += x * x;
    }
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

std::uint64_t TransitionCounts::total() const {
  std::uint64_t t = 0;
  for (int a = 0; a < 2; ++a) {
    for (int s = 0; s < 2; ++s) t += n[a][s][0] + n[a][s][1];
  }
  return t;
}

void TransitionCounts::merge(const TransitionCounts& other) {
  for (int a = 0; a < 2; ++a) {
    for (int s = 0; s < 2; ++s) {
      n[a][s][0] += other.n[a][s][0];
      n[a][s][1] += other.n[a][s][1];
    }
  }
}

std::pair<TransitionCounts, TransitionModel> estimate_transitions(
    std::span<const Transition> samples) {
  TransitionCounts counts;
  for (const Transition& t : samples) counts.add(t);
  return {counts, model_from_counts(counts)};
}

std::pair<TransitionCounts, TransitionModel> estimate_transitions(
    std::span<const Beneficiary> beneficiaries) {
  TransitionCounts counts;
  for (const Beneficiary& b : beneficiaries) {
    for (const Transition& t : b.trajectory) counts.add(t);
  }
  return {counts, model_from_counts(counts)};
}

const char* to_string(ClusterMethod m) {
  switch (m) {
    case ClusterMethod::FO: return "fo";
    case ClusterMethod::FAP: return "fap";
    case ClusterMethod::FPP: return "fpp";
    case ClusterMethod::PPF: return "ppf";
  }
  return "?";
}

ClusterMethod cluster_method_from_string(const std::string& s) {
  if (s == "fo" || s == "FO") return ClusterMethod::FO;
  if (s == "fap" || s == "FAP") return ClusterMethod::FAP;
  if (s == "fpp" || s == "FPP") return ClusterMethod::FPP;
  if (s == "ppf" || s == "PPF") return ClusterMethod::PPF;
  throw DataError("unknown clustering method: " + s);
}

void FeatureScaler::fit(std::span<const Beneficiary> data) {
  if (data.empty()) throw DataError("feature scaler: empty training data");
  const std::size_t dim = data[0].features.size();
  mean.assign(dim, 0.0);
  sd.assign(dim, 0.0);
  for (const Beneficiary& b : data) {
    for (std::size_t j = 0; j < dim; ++j) mean[j] += b.features[j];
  }
  for (std::size_t j = 0; j < dim; ++j) mean[j] /= static_cast<double>(data.size());
  for (const Beneficiary& b : data) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = b.features[j] - mean[j];
      sd[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < dim; ++j) {
    sd[j] = std::sqrt(sd[j] / static_cast<double>(data.size()));
    if (sd[j] == 0.0) sd[j] = 1.0;
  }
}

std::vector<double> FeatureScaler::transform(
    std::span<const double> features) const {
  std::vector<double> out(features.size());
  for (std::size_t j = 0; j < features.size(); ++j) {
    out[j] = (features[j] - mean[j]) / sd[j];
  }
  return out;
}

BucketRules BucketRules::from_quantiles(std::span<const Beneficiary> data,
                                        int quantiles_per_feature) {
  if (data.empty()) throw DataError("bucket rules: empty training data");
  if (quantiles_per_feature < 1) {
    throw DataError("bucket rules: need at least one quantile per feature");
  }
  const std::size_t dim = data[0].features.size();
  BucketRules rules;
  rules.edges.resize(dim);
  std::vector<double> column(data.size());
  for (std::size_t j = 0; j < dim; ++j) {
    for (std::size_t i = 0; i < data.size(); ++i) column[i] = data[i].features[j];
    std::sort(column.begin(), column.end());
    std::vector<double>& e = rules.edges[j];
    for (int q = 1; q < quantiles_per_feature; ++q) {
      const double pos = static_cast<double>(q) * (column.size() - 1) /
                         quantiles_per_feature;
      const std::size_t lo = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(lo);
      const double cut =
          lo + 1 < column.size()
              ? column[lo] * (1.0 - frac) + column[lo + 1] * frac
              : column[lo];
      if (e.empty() || cut > e.back()) e.push_back(cut);
    }
  }
  return rules;
}

std::vector<int> BucketRules::bin_tuple(
    std::span<const double> features) const {
  std::vector<int> tuple(features.size(), 0);
  for (std::size_t j = 0; j < features.size() && j < edges.size(); ++j) {
    int bin = 0;
    for (const double e : edges[j]) {
      if (features[j] > e) bin++;
    }
    tuple[j] = bin;
  }
  return tuple;
}

int ClusterModelSet::assign(std::span<const double> features) const {
  switch (method) {
    case ClusterMethod::FO: {
      const std::vector<double> z = scaler.transform(features);
      return nearest_center(centers, z);
    }
    case ClusterMethod::FAP:
    case ClusterMethod::FPP: {
      const std::vector<int> tuple = rules.bin_tuple(features);
      const auto it =
          std::lower_bound(bucket_keys.begin(), bucket_keys.end(), tuple);
      if (it != bucket_keys.end() && *it == tuple) {
        return bucket_to_cluster[it - bucket_keys.begin()];
      }
      // Unseen bin combination: nearest observed bucket by L1 distance in
      // bin space, lower bucket index on ties.
      int best = 0;
      long best_d = std::numeric_limits<long>::max();
      for (std::size_t b = 0; b < bucket_keys.size(); ++b) {
        long d = 0;
        for (std::size_t j = 0; j < tuple.size(); ++j) {
          d += std::abs(static_cast<long>(tuple[j]) - bucket_keys[b][j]);
        }
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(b);
        }
      }
      return bucket_to_cluster[best];
    }
    case ClusterMethod::PPF:
      return forest.predict(features);
  }
  return 0;
}

ClusterModelSet cluster_fo(const TrainingData& train, int k,
                           std::uint64_t seed) {
  std::span<const Beneficiary> data(train.beneficiaries);
  const auto [pop_counts, population] = estimate_transitions(data);

  ClusterModelSet set;
  set.method = ClusterMethod::FO;
  set.k = k;
  set.scaler.fit(data);

  std::vector<std::vector<double>> points(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    points[i] = set.scaler.transform(data[i].features);
  }
  const KMeansResult km =
      kmeans(points, k, derive_seed(seed, {stream_tag("features")}));

  set.centers = km.centers;
  set.models = pool_models(data, km.assignment, k, &set.sizes);
  backfill_passive_rows(set.models, population);
  return set;
}

ClusterModelSet cluster_fap(const TrainingData& train, const BucketRules& rules,
                            int k, std::uint64_t seed) {
  return cluster_bucketed(train, rules, k, seed, /*use_active=*/true,
                          ClusterMethod::FAP);
}

ClusterModelSet cluster_fpp(const TrainingData& train, const BucketRules& rules,
                            int k, std::uint64_t seed) {
  return cluster_bucketed(train, rules, k, seed, /*use_active=*/false,
                          ClusterMethod::FPP);
}

ClusterModelSet cluster_ppf(const TrainingData& train, int k,
                            std::uint64_t seed) {
  std::span<const Beneficiary> data(train.beneficiaries);
  const auto [pop_counts, population] = estimate_transitions(data);

  // Center fitting uses only beneficiaries whose own trajectory pins both
  // passive rows; the rest are classified by the forest afterwards.
  std::vector<int> included;
  std::vector<std::vector<double>> points;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto [counts, model] = estimate_transitions(
        std::span<const Transition>(data[i].trajectory));
    if (counts.row_total(Action::Passive, State::NotEngaging) > 0 &&
        counts.row_total(Action::Passive, State::Engaging) > 0) {
      included.push_back(static_cast<int>(i));
      const auto v = model.passive_vector();
      points.push_back({v[0], v[1]});
    }
  }
  if (included.empty()) {
    throw DataError("ppf: no beneficiary has a passive sample for both states");
  }

  const KMeansResult km =
      kmeans(points, k, derive_seed(seed, {stream_tag("passive")}));

  ClusterModelSet set;
  set.method = ClusterMethod::PPF;
  set.k = k;
  set.centers = km.centers;

  std::vector<std::vector<double>> x;
  std::vector<int> y;
  x.reserve(included.size());
  y.reserve(included.size());
  for (std::size_t j = 0; j < included.size(); ++j) {
    x.push_back(data[included[j]].features);
    y.push_back(km.assignment[j]);
  }
  RandomForest::Config config;
  config.seed = derive_seed(seed, {stream_tag("forest")});
  set.forest.fit(x, y, k, config);

  std::vector<int> membership(data.size(), -1);
  for (std::size_t j = 0; j < included.size(); ++j) {
    membership[included[j]] = km.assignment[j];
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (membership[i] < 0) membership[i] = set.forest.predict(data[i].features);
  }
  set.models = pool_models(data, membership, k, &set.sizes);
  backfill_passive_rows(set.models, population);
  return set;
}

ClusterModelSet impute_missing_active(const ClusterModelSet& set) {
  ClusterModelSet out = set;
  const int a = idx(Action::Active);
  for (int c = 0; c < out.k; ++c) {
    for (int s = 0; s < 2; ++s) {
      if (out.models[c].row_missing[idx(Action::Passive)][s]) {
        std::ostringstream os;
        os << "cluster " << c << " passive row "
           << to_string(state_from_index(s))
           << " is missing; cannot compute donor distances";
        throw DataError(os.str());
      }
    }
  }
  for (int c = 0; c < out.k; ++c) {
    for (int s = 0; s < 2; ++s) {
      if (!out.models[c].row_missing[a][s]) continue;
      int donor = -1;
      double best = std::numeric_limits<double>::max();
      for (int d = 0; d < out.k; ++d) {
        if (d == c) continue;
        if (set.models[d].row_missing[a][s] || set.models[d].row_imputed[a][s]) {
          continue;
        }
        const double dist = sq_dist2(out.models[c].passive_vector(),
                                     out.models[d].passive_vector());
        if (dist < best) {
          best = dist;
          donor = d;
        }
      }
      if (donor < 0) {
        std::ostringstream os;
        os << "no cluster has active data for row "
           << to_string(state_from_index(s));
        throw DataError(os.str());
      }
      out.models[c].prob[a][s] = set.models[donor].prob[a][s];
      out.models[c].row_missing[a][s] = false;
      out.models[c].row_imputed[a][s] = true;
    }
  }
  return out;
}

ClusteringEval evaluate_clustering(
    const ClusterModelSet& set, std::span<const Beneficiary> beneficiaries,
    std::span<const std::array<double, 2>> ground_truth_passive) {
  if (beneficiaries.size() != ground_truth_passive.size()) {
    throw DataError("evaluate_clustering: size mismatch");
  }
  ClusteringEval eval;
  double rmse_sum = 0.0;
  for (std::size_t i = 0; i < beneficiaries.size(); ++i) {
    const int c = set.assign(beneficiaries[i].features);
    const auto center = set.models[c].passive_vector();
    const auto& gt = ground_truth_passive[i];
    const double e0 = gt[0] - center[0];
    const double e1 = gt[1] - center[1];
    rmse_sum += std::sqrt((e0 * e0 + e1 * e1) / 2.0);
  }
  eval.avg_rmse = beneficiaries.empty()
                      ? 0.0
                      : rmse_sum / static_cast<double>(beneficiaries.size());

  double mu = 0.0;
  for (const std::size_t s : set.sizes) mu += static_cast<double>(s);
  mu /= static_cast<double>(set.k);
  double var = 0.0;
  for (const std::size_t s : set.sizes) {
    const double d = static_cast<double>(s) - mu;
    var += d * d;
  }
  eval.size_stddev = std::sqrt(var / static_cast<double>(set.k));
  return eval;
}

}  // namespace rmab
