#include <doctest.h>

#include <cmath>
#include <cstring>
#include <set>

#include "tripweave/clustering.hpp"
#include "tripweave/errors.hpp"
#include "tripweave/rng.hpp"

using namespace tripweave;

namespace {

Matrix planted_gaussians(const std::vector<std::pair<double, double>>& centers, size_t per_cluster,
                         double sigma, uint64_t seed, std::vector<int>* labels = nullptr) {
  Rng rng(seed);
  Matrix m(centers.size() * per_cluster, 2);
  size_t row = 0;
  for (size_t c = 0; c < centers.size(); ++c) {
    for (size_t i = 0; i < per_cluster; ++i, ++row) {
      // Box-Muller
      const double u1 = std::max(1e-12, rng.next_double());
      const double u2 = rng.next_double();
      const double r = std::sqrt(-2.0 * std::log(u1));
      m.at(row, 0) = centers[c].first + sigma * r * std::cos(2 * M_PI * u2);
      m.at(row, 1) = centers[c].second + sigma * r * std::sin(2 * M_PI * u2);
      if (labels) labels->push_back(static_cast<int>(c));
    }
  }
  return m;
}

double sq_dist_d(const double* a, const double* b, size_t d) {
  double s = 0;
  for (size_t i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

}  // namespace

TEST_CASE("separated duplicate points recover exactly with zero inertia") {
  Matrix m(10, 2);
  for (int i = 0; i < 5; ++i) {
    m.at(i, 0) = 0;
    m.at(i, 1) = 0;
    m.at(5 + i, 0) = 10;
    m.at(5 + i, 1) = 10;
  }
  const ClusterModel model = kmeans(m, 2, 3);
  CHECK(model.inertia == doctest::Approx(0.0));
  std::set<std::pair<double, double>> centroids;
  for (int c = 0; c < 2; ++c) centroids.insert({model.centroids.at(c, 0), model.centroids.at(c, 1)});
  CHECK(centroids == std::set<std::pair<double, double>>{{0, 0}, {10, 10}});
}

TEST_CASE("k=1 centroid is the mean") {
  Rng rng(4);
  Matrix m(50, 2);
  double mx = 0, my = 0;
  for (size_t i = 0; i < 50; ++i) {
    m.at(i, 0) = rng.uniform(-5, 5);
    m.at(i, 1) = rng.uniform(-5, 5);
    mx += m.at(i, 0);
    my += m.at(i, 1);
  }
  const ClusterModel model = kmeans(m, 1, 9);
  CHECK(model.centroids.at(0, 0) == doctest::Approx(mx / 50).epsilon(1e-12));
  CHECK(model.centroids.at(0, 1) == doctest::Approx(my / 50).epsilon(1e-12));
}

TEST_CASE("planted gaussians are recovered") {
  const std::vector<std::pair<double, double>> centers = {{0, 0}, {10, 0}, {0, 10}};
  const Matrix m = planted_gaussians(centers, 300, 0.1, 42);
  const ClusterModel model = kmeans(m, 3, 7);
  for (const auto& [cx, cy] : centers) {
    double best = 1e18;
    for (int c = 0; c < 3; ++c) {
      const double d = std::hypot(model.centroids.at(c, 0) - cx, model.centroids.at(c, 1) - cy);
      best = std::min(best, d);
    }
    CHECK(best < 0.2);
  }
}

TEST_CASE("insufficient or degenerate points raise") {
  Matrix m(2, 2);
  CHECK_THROWS_AS(kmeans(m, 3, 1), DataError);     // fewer points than clusters
  Matrix same(5, 1);
  for (int i = 0; i < 5; ++i) same.at(i, 0) = 2.0;
  CHECK_THROWS_AS(kmeans(same, 2, 1), DataError);  // fewer distinct points than clusters
}

TEST_CASE("assignment optimality and inertia monotonicity") {
  Rng rng(12);
  for (int round = 0; round < 15; ++round) {
    const size_t n = 50 + rng.bounded(300);
    Matrix m(n, 3);
    for (size_t i = 0; i < n; ++i)
      for (size_t c = 0; c < 3; ++c) m.at(i, c) = rng.uniform(-20, 20);

    std::vector<std::vector<double>> traces;
    KMeansOptions options;
    options.n_restarts = 3;
    options.inertia_traces = &traces;
    const int k = 2 + static_cast<int>(rng.bounded(6));
    const ClusterModel model = kmeans(m, k, rng.next(), options);

    for (size_t i = 0; i < n; ++i) {
      const double assigned =
          sq_dist_d(m.row(i), model.centroids.row(static_cast<size_t>(model.assignments[i])), 3);
      for (int c = 0; c < k; ++c) {
        CHECK(assigned <= sq_dist_d(m.row(i), model.centroids.row(static_cast<size_t>(c)), 3) + 1e-9);
      }
    }
    for (const auto& trace : traces) {
      for (size_t t = 1; t < trace.size(); ++t) CHECK(trace[t] <= trace[t - 1] + 1e-9);
    }
  }
}

TEST_CASE("kmeans is byte-deterministic per seed") {
  const Matrix m = planted_gaussians({{0, 0}, {6, 6}, {-6, 6}, {6, -6}}, 200, 1.0, 5);
  const ClusterModel a = kmeans(m, 4, 31337);
  const ClusterModel b = kmeans(m, 4, 31337);
  REQUIRE(a.centroids.data.size() == b.centroids.data.size());
  CHECK(std::memcmp(a.centroids.data.data(), b.centroids.data.data(),
                    a.centroids.data.size() * sizeof(double)) == 0);
  CHECK(a.assignments == b.assignments);
  CHECK(a.inertia == b.inertia);

  const ClusterModel c = kmeans(m, 4, 99);
  CHECK(c.k == 4);  // different seed still yields a valid model
}

TEST_CASE("silhouette on near-ideal separation") {
  const Matrix m = planted_gaussians({{0, 0}, {50, 50}}, 100, 0.3, 8);
  std::vector<int> assignments(200, 0);
  for (size_t i = 100; i < 200; ++i) assignments[i] = 1;
  CHECK(silhouette(m, assignments) > 0.95);
}

TEST_CASE("silhouette degenerate conventions") {
  Matrix m(6, 2);  // all points identical
  std::vector<int> split = {0, 1, 0, 1, 0, 1};
  CHECK(silhouette(m, split) == doctest::Approx(0.0));

  std::vector<int> one_cluster(6, 0);
  CHECK_THROWS_AS(silhouette(m, one_cluster), DataError);
}

TEST_CASE("silhouette four-point fixture matches the hand computation") {
  Matrix m(4, 2);
  m.at(0, 0) = 0;  m.at(0, 1) = 0;
  m.at(1, 0) = 0;  m.at(1, 1) = 1;
  m.at(2, 0) = 10; m.at(2, 1) = 0;
  m.at(3, 0) = 10; m.at(3, 1) = 1;
  const std::vector<int> assignments = {0, 0, 1, 1};
  // a = 1, b = (10 + sqrt(101)) / 2 for every point
  const double b = (10.0 + std::sqrt(101.0)) / 2.0;
  const double expected = (b - 1.0) / b;  // 0.9002487...
  CHECK(silhouette(m, assignments) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.9002488).epsilon(1e-6));
}

TEST_CASE("silhouette subsample is deterministic and sane") {
  const Matrix m = planted_gaussians({{0, 0}, {30, 0}, {0, 30}}, 700, 0.5, 10);
  std::vector<int> labels;
  planted_gaussians({{0, 0}, {30, 0}, {0, 30}}, 700, 0.5, 10, &labels);
  const double s1 = silhouette(m, labels, 400, 99);
  const double s2 = silhouette(m, labels, 400, 99);
  CHECK(s1 == s2);
  CHECK(s1 > 0.9);
  CHECK(s1 <= 1.0);
}

TEST_CASE("select_k finds the planted k") {
  const Matrix m = planted_gaussians({{0, 0}, {10, 0}, {0, 10}}, 250, 0.1, 77);
  auto [model, report] = select_k(m, 2, 8, 123);
  CHECK(report.best_k == 3);
  CHECK(model.k == 3);
  CHECK(report.scores.at(3) > 0.9);
  for (const auto& [k, s] : report.scores) {
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("select_k single-candidate range") {
  const Matrix m = planted_gaussians({{0, 0}, {8, 8}}, 100, 0.5, 3);
  auto [model, report] = select_k(m, 5, 5, 11);
  CHECK(model.k == 5);
  CHECK(report.best_k == 5);
  CHECK(report.scores.size() == 1);
}

TEST_CASE("select_k validates its range") {
  const Matrix m = planted_gaussians({{0, 0}}, 20, 0.5, 3);
  CHECK_THROWS_AS(select_k(m, 1, 5, 0), ConfigError);
  CHECK_THROWS_AS(select_k(m, 6, 5, 0), ConfigError);
  CHECK_THROWS_AS(select_k(m, 2, 100, 0), DataError);
}
