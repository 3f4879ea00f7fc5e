#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mcpr/btmle.hpp"
#include "mcpr/clustering.hpp"
#include "mcpr/netwin.hpp"
#include "mcpr/pipeline.hpp"

namespace mcpr::pipeline {

// --- Angle profile (figure 1 analogue) -------------------------------------

struct AngleGrid {
  int m = 200;
  std::vector<double> b_grid = {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0};
  int trials = 20;
  std::uint64_t seed = 1;

  bool operator==(const AngleGrid&) const = default;
};

struct AngleExperimentResult {
  netwin::AngleProfile profile;
  std::string csv;  // b,mean_cosine,stddev,trials
};

AngleExperimentResult experiment_angle(const AngleGrid& grid, int threads);

// --- Clustering frontier (figure 2 analogue) --------------------------------
//
// For each cluster count r and each per-user comparison budget
// N = (1-eps) C(m,2), measures the majority-rule misclustered fraction of
// three procedures on the same data:
//   raw-spectral     k-means on the rank-r approximation of the +-1 rows
//   projected-kmeans k-means on the net-win rows S
//   algorithm-1      k-means on the rank-r approximation of S
// The frontier per procedure is the smallest budget whose mean error over
// the trials is below the success threshold. Budgets are swept in ascending
// order with early exit at first success.

struct FrontierGrid {
  int m = 300;
  int n = 300;  // must be divisible by every entry of r_values
  double b = 4.0;
  std::vector<int> r_values = {2, 4};
  std::vector<int> budgets = {75, 150, 300, 600, 1200, 2400, 4800, 9600};
  int trials = 20;
  double success_threshold = 0.05;
  bool include_raw_rows = false;  // extra baseline: k-means directly on the +-1 rows
  spectral::ClusteringParams clustering;
  std::uint64_t seed = 1;

  bool operator==(const FrontierGrid&) const = default;
};

struct FrontierCell {
  std::string algorithm;
  int r = 0;
  int budget = 0;
  double epsilon = 0.0;
  double mean_misclustered = 0.0;
};

struct FrontierEntry {
  std::string algorithm;
  int r = 0;
  bool reached = false;
  int budget = -1;  // valid when reached
};

struct FrontierResult {
  std::vector<FrontierCell> cells;
  std::vector<FrontierEntry> frontier;
  std::string cells_csv;     // algorithm,r,budget,epsilon,mean_misclustered,trials
  std::string frontier_csv;  // algorithm,r,frontier_budget
};

FrontierResult experiment_clustering_frontier(const FrontierGrid& grid, int threads);

// --- Score error vs r_tilde (figure 3 analogue) ------------------------------

struct ScoreErrorGrid {
  int m = 120;
  int n = 120;
  double b = 5.0;
  double epsilon = 0.95;
  std::vector<int> r_values = {1, 2, 4, 8};
  int r_tilde_min = 1;
  int r_tilde_max = 8;
  int trials = 20;
  spectral::ClusteringParams clustering;
  btmle::MleConfig mle;
  std::uint64_t seed = 1;

  bool operator==(const ScoreErrorGrid&) const = default;
};

struct ScoreErrorPoint {
  int r = 0;
  int r_tilde = 0;
  double mean_rel_error = 0.0;
  // Normalized change from the previous sweep point; NaN at the first point.
  double mean_change_prev = 0.0;   // over ||estimate(r_tilde - 1)||
  double mean_change_truth = 0.0;  // over ||truth||
};

struct ScoreErrorSummary {
  int r = 0;
  double error_argmin_fraction = 0.0;   // trials whose error curve bottoms at r_tilde = r
  double change_argmin_fraction = 0.0;  // trials whose change curve bottoms at r_tilde = r
};

struct ScoreErrorResult {
  std::vector<ScoreErrorPoint> points;
  std::vector<ScoreErrorSummary> summary;
  std::string curves_csv;   // r,r_tilde,mean_rel_error,mean_change_prev,mean_change_truth,trials
  std::string summary_csv;  // r,error_argmin_fraction,change_argmin_fraction,trials
};

ScoreErrorResult experiment_score_error(const ScoreErrorGrid& grid, int threads);

// JSON run manifest written next to every experiment table.
std::string experiment_manifest(
    const std::string& name, std::uint64_t seed, int threads, double wall_seconds,
    const std::vector<std::pair<std::string, std::string>>& params);

}  // namespace mcpr::pipeline
