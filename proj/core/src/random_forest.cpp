#include "rmab/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rmab/errors.hpp"
#include "rmab/rng.hpp"

namespace rmab {

namespace {

struct TreeBuilder {
  const std::vector<std::vector<double>>& x;
  const std::vector<int>& y;
  int n_labels;
  int mtry;
  int min_samples_split;
  Rng& rng;
  std::vector<RandomForest::Node> nodes;

  int majority(const std::vector<int>& counts) const {
    int best = 0;
    for (int l = 1; l < n_labels; ++l) {
      if (counts[l] > counts[best]) best = l;
    }
    return best;
  }

  static double gini(const std::vector<int>& counts, int total) {
    if (total == 0) return 0.0;
    double g = 1.0;
    for (const int c : counts) {
      const double p = static_cast<double>(c) / total;
      g -= p * p;
    }
    return g;
  }

  // Builds the subtree over samples[lo, hi) in place; returns node index.
  int build(std::vector<int>& samples, int lo, int hi) {
    const int n = hi - lo;
    std::vector<int> counts(n_labels, 0);
    for (int i = lo; i < hi; ++i) counts[y[samples[i]]]++;

    const bool pure =
        *std::max_element(counts.begin(), counts.end()) == n;
    if (pure || n < min_samples_split) {
      nodes.push_back({-1, 0.0, -1, -1, majority(counts)});
      return static_cast<int>(nodes.size()) - 1;
    }

    // Draw mtry distinct candidate features.
    const int dim = static_cast<int>(x[0].size());
    std::vector<int> features(dim);
    std::iota(features.begin(), features.end(), 0);
    for (int i = 0; i < mtry && i < dim; ++i) {
      const int j = i + static_cast<int>(rng.below(dim - i));
      std::swap(features[i], features[j]);
    }

    const double parent_gini = gini(counts, n);
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<int> order(samples.begin() + lo, samples.begin() + hi);
    for (int f = 0; f < mtry && f < dim; ++f) {
      const int feature = features[f];
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (x[a][feature] != x[b][feature]) return x[a][feature] < x[b][feature];
        return a < b;
      });
      std::vector<int> left(n_labels, 0);
      std::vector<int> right = counts;
      for (int i = 0; i + 1 < n; ++i) {
        const int s = order[i];
        left[y[s]]++;
        right[y[s]]--;
        const double xv = x[s][feature];
        const double xn = x[order[i + 1]][feature];
        if (xv == xn) continue;
        const int nl = i + 1;
        const int nr = n - nl;
        const double split_gini =
            (nl * gini(left, nl) + nr * gini(right, nr)) / n;
        const double gain = parent_gini - split_gini;
        if (gain > best_gain + 1e-15) {
          best_gain = gain;
          best_feature = feature;
          best_threshold = 0.5 * (xv + xn);
        }
      }
    }

    if (best_feature < 0) {
      nodes.push_back({-1, 0.0, -1, -1, majority(counts)});
      return static_cast<int>(nodes.size()) - 1;
    }

    const int mid = static_cast<int>(
        std::partition(samples.begin() + lo, samples.begin() + hi,
                       [&](int s) { return x[s][best_feature] <= best_threshold; }) -
        samples.begin());

    const int self = static_cast<int>(nodes.size());
    nodes.push_back({best_feature, best_threshold, -1, -1, -1});
    nodes[self].left = build(samples, lo, mid);
    nodes[self].right = build(samples, mid, hi);
    return self;
  }
};

int tree_predict(const std::vector<RandomForest::Node>& tree,
                 std::span<const double> features) {
  int i = 0;
  while (tree[i].feature >= 0) {
    i = features[tree[i].feature] <= tree[i].threshold ? tree[i].left
                                                       : tree[i].right;
  }
  return tree[i].label;
}

}  // namespace

void RandomForest::fit(const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y, int n_labels,
                       const Config& config) {
  if (x.empty() || x.size() != y.size()) {
    throw DataError("random forest: empty or mismatched training data");
  }
  const int dim = static_cast<int>(x[0].size());
  const int mtry =
      config.mtry > 0 ? config.mtry
                      : std::max(1, static_cast<int>(std::sqrt(dim)));

  trees_.clear();
  trees_.reserve(config.n_trees);
  n_labels_ = n_labels;

  const std::size_t n = x.size();
  for (int t = 0; t < config.n_trees; ++t) {
    Rng rng(derive_seed(config.seed, {stream_tag("tree"),
                                      static_cast<std::uint64_t>(t)}));
    std::vector<int> samples(n);
    for (std::size_t i = 0; i < n; ++i) {
      samples[i] = static_cast<int>(rng.below(n));
    }
    TreeBuilder builder{x, y, n_labels, mtry, config.min_samples_split, rng, {}};
    builder.build(samples, 0, static_cast<int>(n));
    trees_.push_back(std::move(builder.nodes));
  }
}

int RandomForest::predict(std::span<const double> features) const {
  std::vector<int> votes(n_labels_, 0);
  for (const auto& tree : trees_) votes[tree_predict(tree, features)]++;
  int best = 0;
  for (int l = 1; l < n_labels_; ++l) {
    if (votes[l] > votes[best]) best = l;
  }
  return best;
}

void RandomForest::restore(std::vector<std::vector<Node>> trees,
                           int n_labels) {
  trees_ = std::move(trees);
  n_labels_ = n_labels;
}

}  // namespace rmab
