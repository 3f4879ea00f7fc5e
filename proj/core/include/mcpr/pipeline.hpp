#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "mcpr/btmle.hpp"
#include "mcpr/clustering.hpp"
#include "mcpr/model.hpp"
#include "mcpr/rng.hpp"

namespace mcpr::pipeline {

enum class ClusterAlgorithm { kThreshold, kKMeans };

struct PipelineParams {
  spectral::ClusteringParams clustering;
  btmle::MleConfig mle;
  ClusterAlgorithm algorithm = ClusterAlgorithm::kKMeans;
  int threads = 1;

  bool operator==(const PipelineParams&) const = default;
};

struct PipelineResult {
  spectral::Clustering clustering;
  std::vector<btmle::ScoreEstimate> estimates;  // one per estimated cluster
  btmle::TheoreticalRates rates;

  // Filled only when ground truth was supplied.
  Eigen::VectorXd per_user_relative_error;
  double misclustered_fraction = 0.0;
  bool has_truth_metrics = false;

  bool degenerate = false;
  std::string degenerate_reason;

  bool all_converged() const {
    for (const auto& e : estimates)
      if (!e.converged) return false;
    return true;
  }
};

// The full three-step run: sample split, net-win projection + rank-r
// denoising, clustering (threshold or k-means), then per-cluster maximum
// likelihood on the second half-sample. `truth` may be null; when present,
// misclustering and per-user relative errors are filled in.
// Component failures are rethrown with the pipeline stage prepended.
PipelineResult run_algorithm1(const model::ComparisonDataset& dataset,
                              const model::SimulationConfig& config,
                              const PipelineParams& params,
                              const model::ClusterModel* truth, const SplitRng& rng);

// One r-tilde entry of the cluster-count sweep.
struct RTildeEstimate {
  int r_tilde = 0;
  Eigen::MatrixXd stacked;       // n x m, row u = estimate for u's cluster
  double mean_relative_error = 0.0;  // NaN unless truth given
};

// Clusters and estimates once per r_tilde in [r_lo, r_hi], reusing a single
// sample split and a single top-rank SVD so the sweep isolates the effect of
// r_tilde. Building block for the cluster-count heuristic and the score
// error experiment.
std::vector<RTildeEstimate> sweep_r_tilde(const model::ComparisonDataset& dataset,
                                          const model::SimulationConfig& config,
                                          int r_lo, int r_hi,
                                          const PipelineParams& params,
                                          const model::ClusterModel* truth,
                                          const SplitRng& rng);

struct ClusterCountResult {
  int r_hat = 0;
  std::vector<int> r_tilde_grid;       // the change curve's support: [min, max]
  std::vector<double> change_curve;    // ||T(r)-T(r-1)||_F / ||T(r-1)||_F
  std::vector<double> change_truth_norm;  // same change over ||Theta||_F (truth only)
  std::vector<double> error_curve;     // mean per-user relative error (truth only)
  bool has_error_curve = false;
  bool reliable = true;  // false when the normalizer vanishes (b = 0 style data)
};

// Cluster-count heuristic: sweep r_tilde and stack per-user estimates. The
// stacked estimate changes violently while clusters are still merged and
// settles once r_tilde passes the true count, so r_hat is the sweep point
// *preceding* the smallest normalized change (ties to the smallest r_tilde).
// Requires r_min >= 2; the change at r_min uses the r_min - 1 sweep
// internally, and r_hat ranges over [r_min - 1, r_max - 1].
ClusterCountResult estimate_num_clusters(const model::ComparisonDataset& dataset,
                                         const model::SimulationConfig& config,
                                         int r_min, int r_max,
                                         const PipelineParams& params,
                                         const model::ClusterModel* truth,
                                         const SplitRng& rng);

}  // namespace mcpr::pipeline
