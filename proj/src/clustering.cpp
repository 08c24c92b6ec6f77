#include "tripweave/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tripweave/errors.hpp"
#include "tripweave/rng.hpp"

namespace tripweave {

namespace {

double sq_dist(const double* a, const double* b, size_t d) {
  double s = 0;
  for (size_t i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

// D^2-weighted k-means++ seeding.
Matrix kmeanspp_init(const Matrix& points, int k, Rng& rng) {
  const size_t n = points.rows, d = points.cols;
  Matrix centroids(static_cast<size_t>(k), d);

  size_t first = rng.bounded(n);
  std::copy_n(points.row(first), d, centroids.row(0));

  std::vector<double> dist2(n);
  for (size_t i = 0; i < n; ++i) dist2[i] = sq_dist(points.row(i), centroids.row(0), d);

  for (int j = 1; j < k; ++j) {
    double total = 0;
    for (double v : dist2) total += v;
    size_t chosen;
    if (total <= 0) {
      chosen = rng.bounded(n);
    } else {
      const double target = rng.next_double() * total;
      double acc = 0;
      chosen = n - 1;
      for (size_t i = 0; i < n; ++i) {
        acc += dist2[i];
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
    }
    std::copy_n(points.row(chosen), d, centroids.row(static_cast<size_t>(j)));
    for (size_t i = 0; i < n; ++i)
      dist2[i] = std::min(dist2[i], sq_dist(points.row(i), centroids.row(static_cast<size_t>(j)), d));
  }
  return centroids;
}

double assign_points(const Matrix& points, const Matrix& centroids, std::vector<int>& assignments) {
  const size_t n = points.rows, d = points.cols, k = centroids.rows;
  double inertia = 0;
  for (size_t i = 0; i < n; ++i) {
    int best = 0;
    double best_d = sq_dist(points.row(i), centroids.row(0), d);
    for (size_t j = 1; j < k; ++j) {
      const double dj = sq_dist(points.row(i), centroids.row(j), d);
      if (dj < best_d) {
        best_d = dj;
        best = static_cast<int>(j);
      }
    }
    assignments[i] = best;
    inertia += best_d;
  }
  return inertia;
}

struct Fit {
  Matrix centroids;
  std::vector<int> assignments;
  double inertia = std::numeric_limits<double>::infinity();
};

Fit lloyd(const Matrix& points, int k, Rng& rng, const KMeansOptions& options,
          std::vector<double>* trace) {
  const size_t n = points.rows, d = points.cols;
  Fit fit;
  fit.centroids = kmeanspp_init(points, k, rng);
  fit.assignments.assign(n, 0);

  std::vector<double> counts(static_cast<size_t>(k));
  Matrix next(static_cast<size_t>(k), d);

  for (int iter = 0; iter < options.max_iter; ++iter) {
    fit.inertia = assign_points(points, fit.centroids, fit.assignments);
    if (trace) trace->push_back(fit.inertia);

    std::fill(counts.begin(), counts.end(), 0.0);
    std::fill(next.data.begin(), next.data.end(), 0.0);
    for (size_t i = 0; i < n; ++i) {
      const auto c = static_cast<size_t>(fit.assignments[i]);
      counts[c] += 1.0;
      const double* p = points.row(i);
      double* target = next.row(c);
      for (size_t j = 0; j < d; ++j) target[j] += p[j];
    }

    for (int j = 0; j < k; ++j) {
      const auto cj = static_cast<size_t>(j);
      if (counts[cj] > 0) {
        for (size_t col = 0; col < d; ++col) next.at(cj, col) /= counts[cj];
        continue;
      }
      // Empty cluster: re-seed at the point farthest from its own centroid.
      size_t farthest = 0;
      double far_d = -1;
      for (size_t i = 0; i < n; ++i) {
        const double di =
            sq_dist(points.row(i), fit.centroids.row(static_cast<size_t>(fit.assignments[i])), d);
        if (di > far_d) {
          far_d = di;
          farthest = i;
        }
      }
      if (far_d <= 0) throw DataError("kmeans: fewer distinct points than clusters");
      std::copy_n(points.row(farthest), d, next.row(cj));
    }

    double shift = 0;
    for (size_t idx = 0; idx < next.data.size(); ++idx) {
      const double diff = next.data[idx] - fit.centroids.data[idx];
      shift += diff * diff;
    }
    fit.centroids = next;
    if (shift <= options.tol) break;
  }

  fit.inertia = assign_points(points, fit.centroids, fit.assignments);
  if (trace) trace->push_back(fit.inertia);
  return fit;
}

}  // namespace

ClusterModel kmeans(const Matrix& points, int k, uint64_t seed, const KMeansOptions& options) {
  if (k < 1) throw ConfigError("kmeans: k must be >= 1");
  if (points.rows < static_cast<size_t>(k)) throw DataError("kmeans: insufficient points");
  if (points.cols == 0) throw DataError("kmeans: zero-dimensional points");

  Fit best;
  for (int r = 0; r < std::max(1, options.n_restarts); ++r) {
    Rng rng = Rng::substream(seed, static_cast<uint64_t>(r));
    std::vector<double> trace;
    Fit fit = lloyd(points, k, rng, options, options.inertia_traces ? &trace : nullptr);
    if (options.inertia_traces) options.inertia_traces->push_back(std::move(trace));
    if (fit.inertia < best.inertia) best = std::move(fit);  // ties keep the earlier restart
  }

  // The farthest-point repair guarantees no empty cluster survives on data
  // with >= k distinct points; verify all clusters are populated.
  std::vector<uint64_t> sizes(static_cast<size_t>(k), 0);
  for (int a : best.assignments) ++sizes[static_cast<size_t>(a)];
  for (uint64_t s : sizes) {
    if (s == 0) throw DataError("kmeans: empty cluster in final model");
  }

  ClusterModel model;
  model.k = k;
  model.centroids = std::move(best.centroids);
  model.assignments = std::move(best.assignments);
  model.inertia = best.inertia;
  model.seed = seed;
  model.n_restarts = options.n_restarts;
  return model;
}

double silhouette(const Matrix& points, std::span<const int> assignments, size_t subsample_size,
                  uint64_t subsample_seed) {
  if (points.rows != assignments.size()) throw DataError("silhouette: assignment size mismatch");
  const size_t n = points.rows;
  if (n < 2) throw DataError("silhouette: need at least 2 points");

  int max_cluster = 0;
  for (int a : assignments) max_cluster = std::max(max_cluster, a);
  const size_t k = static_cast<size_t>(max_cluster) + 1;
  std::vector<uint64_t> cluster_sizes(k, 0);
  for (int a : assignments) ++cluster_sizes[static_cast<size_t>(a)];
  size_t nonempty = 0;
  for (uint64_t s : cluster_sizes) nonempty += s > 0;
  if (nonempty < 2) throw DataError("silhouette undefined for a single cluster");

  std::vector<uint32_t> sample(n);
  for (size_t i = 0; i < n; ++i) sample[i] = static_cast<uint32_t>(i);
  if (subsample_size > 0 && n > subsample_size) {
    Rng rng = Rng::substream(subsample_seed, 0x5a3c6b19u);
    for (size_t i = 0; i < subsample_size; ++i) {
      const size_t j = i + rng.bounded(n - i);
      std::swap(sample[i], sample[j]);
    }
    sample.resize(subsample_size);
  }

  const size_t m = sample.size(), d = points.cols;
  std::vector<uint64_t> sample_cluster_n(k, 0);
  for (uint32_t idx : sample) ++sample_cluster_n[static_cast<size_t>(assignments[idx])];

  double total = 0;
  std::vector<double> sum_per_cluster(k);
  for (size_t si = 0; si < m; ++si) {
    const uint32_t i = sample[si];
    const auto ci = static_cast<size_t>(assignments[i]);
    std::fill(sum_per_cluster.begin(), sum_per_cluster.end(), 0.0);
    for (size_t sj = 0; sj < m; ++sj) {
      if (sj == si) continue;
      const uint32_t j = sample[sj];
      sum_per_cluster[static_cast<size_t>(assignments[j])] +=
          std::sqrt(sq_dist(points.row(i), points.row(j), d));
    }

    if (sample_cluster_n[ci] <= 1) continue;  // singleton in sample scores 0
    const double a = sum_per_cluster[ci] / static_cast<double>(sample_cluster_n[ci] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < k; ++c) {
      if (c == ci || sample_cluster_n[c] == 0) continue;
      b = std::min(b, sum_per_cluster[c] / static_cast<double>(sample_cluster_n[c]));
    }
    if (!std::isfinite(b)) continue;  // sample lost every other cluster
    const double denom = std::max(a, b);
    if (denom > 0) total += (b - a) / denom;
  }
  return total / static_cast<double>(m);
}

std::pair<ClusterModel, KSelectionReport> select_k(const Matrix& points, int k_min, int k_max,
                                                   uint64_t seed, const SelectKOptions& options) {
  if (k_min < 2) throw ConfigError("select_k: k_min must be >= 2");
  if (k_max < k_min) throw ConfigError("select_k: k_max < k_min");
  if (points.rows < static_cast<size_t>(k_max)) throw DataError("select_k: insufficient points");

  KSelectionReport report;
  report.subsample_size = options.silhouette_subsample;
  report.subsample_seed = SplitMix64(seed ^ 0x73686f75756c64ULL).next();

  ClusterModel best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = k_min; k <= k_max; ++k) {
    ClusterModel model = kmeans(points, k, seed, options.kmeans);
    const double score =
        silhouette(points, model.assignments, options.silhouette_subsample, report.subsample_seed);
    report.scores[k] = score;
    if (score > best_score) {  // strict: ties keep the smaller k
      best_score = score;
      best = std::move(model);
    }
  }
  report.best_k = best.k;
  return {std::move(best), report};
}

}  // namespace tripweave
