#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "mcpr/model.hpp"
#include "mcpr/rng.hpp"

namespace mcpr::spectral {

struct ClusteringParams {
  int r = 1;
  double tau = 0.0;           // <= 0: derive via default_tau(m, epsilon, tau_constant)
  double tau_constant = 1.0;  // the C in tau = C (1-eps) m / sqrt(log m)
  int kmeans_max_iters = 100;
  double kmeans_tol = 1e-9;

  bool operator==(const ClusteringParams&) const = default;
};

// How a clustering was produced: pivot rows (threshold) or initial center
// rows (k-means), plus degeneracy flags.
struct ClusteringProvenance {
  std::string algorithm;
  std::vector<int> anchors;
  bool empty_clusters = false;
  int iterations = 0;
  std::vector<double> objective_trace;  // k-means: objective after each assignment
};

struct Clustering {
  std::vector<int> labels;  // length n, values in [0, r)
  int r = 0;
  ClusteringProvenance provenance;

  int n() const { return static_cast<int>(labels.size()); }
};

// Threshold from the clustering guarantee: c * (1-eps) * m / sqrt(log m).
// Throws std::invalid_argument for m < 3.
double default_tau(int m, double epsilon, double c = 1.0);

// Sequential threshold clustering on the denoised rows: r rounds, each
// picking a uniformly random still-unclustered pivot and absorbing every
// unclustered row within distance tau. Rows left over after r rounds go to
// the nearest pivot.
Clustering threshold_cluster(const Eigen::MatrixXd& rows, const ClusteringParams& params,
                             SplitRng rng);

// Lloyd k-means with farthest-first initialization: random first center,
// then repeatedly the row whose minimum distance to the chosen centers is
// largest (ties to the lowest row index). Empty clusters re-seed at the row
// farthest from its assigned center.
Clustering kmeans_cluster(const Eigen::MatrixXd& rows, int r, const ClusteringParams& params,
                          SplitRng rng);

// Exact minimum over cluster-index permutations of the total symmetric
// difference between true and estimated clusters. Brute force for r <= 8,
// optimal assignment on the overlap matrix beyond that.
// Throws std::invalid_argument on size or cluster-count mismatch.
int misclustering_permutation(const std::vector<int>& truth_labels, int truth_r,
                              const Clustering& est);
int misclustering_permutation(const model::ClusterModel& truth, const Clustering& est);

// Majority-rule error: each estimated cluster answers for the true cluster
// holding its plurality (ties toward the lower true index); members from any
// other true cluster count as errors. Returns errors / n.
double misclustering_majority(const std::vector<int>& truth_labels, const Clustering& est);

// CSV serialization: header "user_id,label", one row per user.
std::string clustering_to_csv(const Clustering& clustering);

}  // namespace mcpr::spectral
