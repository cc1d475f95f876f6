#pragma once

#include <cstdint>
#include <vector>

namespace rmab {

struct KMeansResult {
  std::vector<std::vector<double>> centers;
  std::vector<int> assignment;  // per point, cluster id in [0, k)
  double inertia = 0.0;         // sum of squared distances to assigned center
  int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding. Converges when assignments
// stabilize or after max_iter sweeps; fully deterministic given the seed.
// Requires k <= number of distinct points (throws DataError otherwise).
// Clusters that empty out during an update are refilled with the point
// currently farthest from its own center.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    std::uint64_t seed, int max_iter = 300);

}  // namespace rmab
