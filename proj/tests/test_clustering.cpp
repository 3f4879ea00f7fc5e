#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "mcpr/clustering.hpp"
#include "mcpr/rng.hpp"
#include "oracles.hpp"

using namespace mcpr;
using spectral::Clustering;
using spectral::ClusteringParams;

namespace {
// two tight groups of rows separated by `gap` along the first axis
Eigen::MatrixXd two_groups(int per_group, double gap, double spread, std::uint64_t seed) {
  SplitRng rng(seed);
  Eigen::MatrixXd rows(2 * per_group, 3);
  for (int u = 0; u < 2 * per_group; ++u) {
    const double center = u < per_group ? 0.0 : gap;
    rows(u, 0) = center + rng.uniform(-spread, spread);
    rows(u, 1) = rng.uniform(-spread, spread);
    rows(u, 2) = rng.uniform(-spread, spread);
  }
  return rows;
}

std::vector<int> two_group_truth(int per_group) {
  std::vector<int> labels(2 * per_group);
  for (int u = per_group; u < 2 * per_group; ++u) labels[u] = 1;
  return labels;
}
}  // namespace

TEST_CASE("default_tau: frozen arithmetic, degenerate cases, linear in c") {
  // 7 / sqrt(ln 7), recomputed with long-double arithmetic
  const long double expected = 7.0L / std::sqrt(std::log(7.0L));
  CHECK(spectral::default_tau(7, 0.0) == doctest::Approx(double(expected)).epsilon(1e-12));
  CHECK(spectral::default_tau(7, 0.0) == doctest::Approx(5.018069666).epsilon(1e-9));
  CHECK(spectral::default_tau(100, 1.0) == 0.0);
  CHECK(spectral::default_tau(50, 0.2, 2.0) ==
        doctest::Approx(2.0 * spectral::default_tau(50, 0.2)).epsilon(1e-12));
  CHECK_THROWS_AS(spectral::default_tau(2, 0.0), std::invalid_argument);
}

TEST_CASE("threshold_cluster: identical rows, planted separation, leftovers") {
  ClusteringParams params;
  params.r = 1;
  params.tau = 0.5;
  Eigen::MatrixXd same(2, 2);
  same << 1.0, 2.0, 1.0, 2.0;
  const auto c = spectral::threshold_cluster(same, params, SplitRng(1));
  CHECK(c.labels[0] == 0);
  CHECK(c.labels[1] == 0);

  // groups at distance 10, zero spread, tau = 1: exact recovery
  params.r = 2;
  params.tau = 1.0;
  const auto rows = two_groups(20, 10.0, 0.0, 2);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto cl = spectral::threshold_cluster(rows, params, SplitRng(seed));
    Clustering est = cl;
    CHECK(spectral::misclustering_permutation(two_group_truth(20), 2, est) == 0);
  }
}

TEST_CASE("threshold_cluster: tau between spread and gap recovers plants exactly") {
  const auto rows = two_groups(15, 8.0, 0.5, 3);
  ClusteringParams params;
  params.r = 2;
  params.tau = 3.0;  // above intra spread (~1), below half the gap (4)
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto cl = spectral::threshold_cluster(rows, params, SplitRng(seed));
    CHECK(spectral::misclustering_permutation(two_group_truth(15), 2, cl) == 0);
  }
}

TEST_CASE("threshold_cluster: leftover rows go to the nearest pivot") {
  // one far outlier; with r = 1 it must still be labeled
  Eigen::MatrixXd rows(3, 1);
  rows << 0.0, 0.1, 99.0;
  ClusteringParams params;
  params.r = 1;
  params.tau = 1.0;
  const auto cl = spectral::threshold_cluster(rows, params, SplitRng(4));
  CHECK(cl.labels[2] == 0);
  CHECK(!cl.provenance.empty_clusters);
}

TEST_CASE("threshold_cluster: more rounds than users flags empty clusters") {
  Eigen::MatrixXd rows(2, 1);
  rows << 0.0, 0.01;
  ClusteringParams params;
  params.r = 4;
  params.tau = 1.0;
  const auto cl = spectral::threshold_cluster(rows, params, SplitRng(5));
  CHECK(cl.provenance.empty_clusters);
  for (int label : cl.labels) CHECK(label == 0);
}

TEST_CASE("kmeans_cluster: r = n gives singleton clusters and zero objective") {
  const auto rows = two_groups(3, 5.0, 0.3, 6);
  ClusteringParams params;
  const auto cl = spectral::kmeans_cluster(rows, 6, params, SplitRng(7));
  std::set<int> used(cl.labels.begin(), cl.labels.end());
  CHECK(used.size() == 6);
  CHECK(cl.provenance.objective_trace.back() == doctest::Approx(0.0));
}

TEST_CASE("kmeans_cluster: two separated groups recover exactly over 100 seeds") {
  const auto rows = two_groups(12, 20.0, 0.5, 8);
  const auto truth = two_group_truth(12);
  ClusteringParams params;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto cl = spectral::kmeans_cluster(rows, 2, params, SplitRng(seed));
    CHECK(spectral::misclustering_permutation(truth, 2, cl) == 0);
  }
}

TEST_CASE("kmeans_cluster: objective trace is nonincreasing") {
  SplitRng rng(9);
  Eigen::MatrixXd rows(60, 4);
  for (int i = 0; i < rows.rows(); ++i)
    for (int j = 0; j < rows.cols(); ++j) rows(i, j) = rng.uniform(-1, 1);
  ClusteringParams params;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto cl = spectral::kmeans_cluster(rows, 5, params, SplitRng(seed));
    const auto& trace = cl.provenance.objective_trace;
    REQUIRE(!trace.empty());
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-10);
    CHECK(cl.provenance.iterations <= params.kmeans_max_iters);
  }
}

TEST_CASE("kmeans_cluster: preconditions") {
  Eigen::MatrixXd rows(3, 2);
  rows.setZero();
  ClusteringParams params;
  CHECK_THROWS_AS(spectral::kmeans_cluster(rows, 4, params, SplitRng(1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(spectral::kmeans_cluster(rows, 0, params, SplitRng(1)),
                  std::invalid_argument);
}

TEST_CASE("misclustering_permutation: identity, relabeling, worked example") {
  Clustering est;
  est.r = 2;
  est.labels = {0, 0, 0, 1, 1, 1};
  CHECK(spectral::misclustering_permutation({0, 0, 0, 1, 1, 1}, 2, est) == 0);
  // same partition, swapped ids
  est.labels = {1, 1, 1, 0, 0, 0};
  CHECK(spectral::misclustering_permutation({0, 0, 0, 1, 1, 1}, 2, est) == 0);
  // the spec's worked example: symmetric differences 1 + 1
  est.labels = {1, 1, 0, 0, 0, 0};
  CHECK(spectral::misclustering_permutation({0, 0, 0, 1, 1, 1}, 2, est) == 2);

  est.labels = {0, 0};
  CHECK_THROWS_AS(spectral::misclustering_permutation({0, 0, 0}, 1, est),
                  std::invalid_argument);
}

TEST_CASE("misclustering_permutation: matches exhaustive enumeration on random data") {
  SplitRng rng(10);
  for (int inst = 0; inst < 500; ++inst) {
    const int r = 2 + int(rng.uniform_index(3));  // 2..4
    const int n = r + int(rng.uniform_index(11 - r));
    std::vector<int> truth(n), labels(n);
    for (int u = 0; u < n; ++u) {
      truth[u] = int(rng.uniform_index(r));
      labels[u] = int(rng.uniform_index(r));
    }
    Clustering est;
    est.r = r;
    est.labels = labels;
    CHECK(spectral::misclustering_permutation(truth, r, est) ==
          oracle::permutation_misclustering(truth, labels, r));
  }
}

TEST_CASE("misclustering_permutation: Hungarian branch agrees with brute force") {
  // r = 9 exceeds the brute-force branch; cross-check via padding the same
  // partition into the r <= 8 brute-force oracle is impossible, so compare
  // against the exhaustive oracle at r = 9 directly (9! enumerations).
  SplitRng rng(11);
  for (int inst = 0; inst < 3; ++inst) {
    const int r = 9, n = 30;
    std::vector<int> truth(n), labels(n);
    for (int u = 0; u < n; ++u) {
      truth[u] = int(rng.uniform_index(r));
      labels[u] = int(rng.uniform_index(r));
    }
    Clustering est;
    est.r = r;
    est.labels = labels;
    CHECK(spectral::misclustering_permutation(truth, r, est) ==
          oracle::permutation_misclustering(truth, labels, r));
  }
}

TEST_CASE("misclustering_majority: identity, all-in-one, relabel invariance") {
  Clustering est;
  est.r = 2;
  est.labels = {0, 0, 1, 1};
  CHECK(spectral::misclustering_majority({0, 0, 1, 1}, est) == 0.0);

  est.r = 1;
  est.labels = {0, 0, 0, 0};
  CHECK(spectral::misclustering_majority({0, 0, 1, 1}, est) == doctest::Approx(0.5));

  // relabeling the estimated ids never changes either metric
  SplitRng rng(12);
  for (int inst = 0; inst < 50; ++inst) {
    const int n = 10;
    std::vector<int> truth(n), labels(n);
    for (int u = 0; u < n; ++u) {
      truth[u] = int(rng.uniform_index(3));
      labels[u] = int(rng.uniform_index(3));
    }
    Clustering a;
    a.r = 3;
    a.labels = labels;
    Clustering b;
    b.r = 3;
    b.labels.resize(n);
    const int perm[3] = {2, 0, 1};
    for (int u = 0; u < n; ++u) b.labels[u] = perm[labels[u]];
    CHECK(spectral::misclustering_majority(truth, a) ==
          spectral::misclustering_majority(truth, b));
    CHECK(spectral::misclustering_permutation(truth, 3, a) ==
          spectral::misclustering_permutation(truth, 3, b));
  }
}

TEST_CASE("metrics agree on near-correct partitions") {
  SplitRng rng(13);
  int checked = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    const int r = 2 + int(rng.uniform_index(2));
    const int K = 4 + int(rng.uniform_index(4));
    const int n = r * K;
    std::vector<int> truth(n), labels(n);
    for (int u = 0; u < n; ++u) truth[u] = labels[u] = u / K;
    // corrupt fewer than 10% of labels
    const int flips = int(rng.uniform_index(std::max(1, n / 10)));
    for (int f = 0; f < flips; ++f)
      labels[rng.uniform_index(n)] = int(rng.uniform_index(r));
    Clustering est;
    est.r = r;
    est.labels = labels;
    const double frac_perm =
        spectral::misclustering_permutation(truth, r, est) / (2.0 * n);
    const double frac_majority = spectral::misclustering_majority(truth, est);
    if (frac_perm < 0.10) {
      CHECK(frac_majority == doctest::Approx(frac_perm).epsilon(1e-12));
      ++checked;
    }
  }
  CHECK(checked > 500);
}

TEST_CASE("clustering_to_csv: exact bytes") {
  Clustering c;
  c.r = 2;
  c.labels = {1, 0, 1};
  CHECK(spectral::clustering_to_csv(c) == "user_id,label\n0,1\n1,0\n2,1\n");
}
