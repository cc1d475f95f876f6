#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rmab {

// Bagged decision-tree classifier used as the feature -> cluster map.
// Deliberately plain: Gini splits, bootstrap per tree, majority vote,
// sqrt(d) features tried per split, everything seeded.
class RandomForest {
 public:
  struct Node {
    int feature = -1;       // -1 marks a leaf
    double threshold = 0.0; // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    int label = -1;         // set on leaves
  };

  struct Config {
    int n_trees = 100;
    int mtry = 0;  // features tried per split; 0 means floor(sqrt(d)), min 1
    int min_samples_split = 2;
    std::uint64_t seed = 0;
  };

  void fit(const std::vector<std::vector<double>>& x,
           const std::vector<int>& y, int n_labels, const Config& config);

  // Majority vote across trees; ties resolve to the smaller label.
  int predict(std::span<const double> features) const;

  bool trained() const { return !trees_.empty(); }
  int n_labels() const { return n_labels_; }
  const std::vector<std::vector<Node>>& trees() const { return trees_; }

  // Reconstruction from serialized form.
  void restore(std::vector<std::vector<Node>> trees, int n_labels);

 private:
  std::vector<std::vector<Node>> trees_;
  int n_labels_ = 0;
};

}  // namespace rmab
