#include "rmab/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rmab/errors.hpp"
#include "rmab/rng.hpp"

namespace rmab {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i] - b[i];
    d += x * x;
  }
  return d;
}

std::size_t count_distinct(std::vector<std::vector<double>> points) {
  std::sort(points.begin(), points.end());
  return static_cast<std::size_t>(
      std::unique(points.begin(), points.end()) - points.begin());
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    std::uint64_t seed, int max_iter) {
  const std::size_t n = points.size();
  if (k <= 0) throw DataError("kmeans: k must be positive");
  const std::size_t distinct = count_distinct(points);
  if (static_cast<std::size_t>(k) > distinct) {
    std::ostringstream os;
    os << "kmeans: k = " << k << " exceeds the " << distinct
       << " distinct points available";
    throw DataError(os.str());
  }

  Rng rng(seed);
  const std::size_t dim = points[0].size();

  // k-means++ seeding: first center uniform, the rest D^2-weighted.
  std::vector<std::vector<double>> centers;
  centers.reserve(k);
  centers.push_back(points[rng.below(n)]);
  std::vector<double> d2(n);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::max();
      for (const auto& ctr : centers) best = std::min(best, sq_dist(points[i], ctr));
      d2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
        pick = i;
      }
    } else {
      // All points coincide with existing centers; distinctness check above
      // guarantees an unused point exists, take the first one.
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] > 0.0 || std::find(centers.begin(), centers.end(),
                                     points[i]) == centers.end()) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(points[pick]);
  }

  std::vector<int> assignment(n, -1);
  int iterations = 0;
  for (; iterations < max_iter; ++iterations) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best_c = 0;
      double best_d = sq_dist(points[i], centers[0]);
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(points[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best_c = c;
        }
      }
      if (assignment[i] != best_c) {
        assignment[i] = best_c;
        changed = true;
      }
    }
    if (!changed) break;

    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      counts[assignment[i]]++;
      for (std::size_t j = 0; j < dim; ++j) sums[assignment[i]][j] += points[i][j];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Refill with the point farthest from its own center (lowest index
        // on ties) and rebuild that donor cluster's mean afterwards.
        double worst = -1.0;
        std::size_t worst_i = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = sq_dist(points[i], centers[assignment[i]]);
          if (d > worst) {
            worst = d;
            worst_i = i;
          }
        }
        const int old_c = assignment[worst_i];
        counts[old_c]--;
        for (std::size_t j = 0; j < dim; ++j) sums[old_c][j] -= points[worst_i][j];
        assignment[worst_i] = c;
        counts[c] = 1;
        sums[c] = points[worst_i];
      }
    }
    for (int c = 0; c < k; ++c) {
      for (std::size_t j = 0; j < dim; ++j) {
        centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
      }
    }
  }

  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    inertia += sq_dist(points[i], centers[assignment[i]]);
  }

  KMeansResult result;
  result.centers = std::move(centers);
  result.assignment = std::move(assignment);
  result.inertia = inertia;
  result.iterations = iterations;
  return result;
}

}  // namespace rmab
