#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "tripweave/matrix.hpp"

namespace tripweave {

struct ClusterModel {
  int k = 0;
  Matrix centroids;              // k x d, in the space the points were given in
  std::vector<int> assignments;  // nearest centroid, ties to the lowest id
  double inertia = 0;            // sum of squared distances to assigned centroids
  uint64_t seed = 0;
  int n_restarts = 0;
};

struct KMeansOptions {
  int n_restarts = 10;
  int max_iter = 300;
  double tol = 1e-4;  // converged when the summed squared centroid shift falls below

  // Test hook: per-restart inertia after each assignment step.
  std::vector<std::vector<double>>* inertia_traces = nullptr;
};

// Lloyd iterations with k-means++ seeding; best of n_restarts by (inertia,
// restart index). Deterministic for a fixed seed. Throws DataError when rows < k
// or the data has fewer distinct points than clusters.
ClusterModel kmeans(const Matrix& points, int k, uint64_t seed, const KMeansOptions& options = {});

// Mean of (b - a) / max(a, b); singleton-cluster points score 0, as do points
// with a = b = 0. Evaluated on a seeded subsample when rows > subsample_size.
double silhouette(const Matrix& points, std::span<const int> assignments,
                  size_t subsample_size = 10000, uint64_t subsample_seed = 0);

struct KSelectionReport {
  std::map<int, double> scores;
  int best_k = 0;
  size_t subsample_size = 0;
  uint64_t subsample_seed = 0;
};

struct SelectKOptions {
  KMeansOptions kmeans;
  size_t silhouette_subsample = 10000;
};

// Fits every k in [k_min, k_max], scores each with the same subsample, and
// returns the model with the highest silhouette (ties go to the smaller k).
std::pair<ClusterModel, KSelectionReport> select_k(const Matrix& points, int k_min, int k_max,
                                                   uint64_t seed, const SelectKOptions& options = {});

}  // namespace tripweave
