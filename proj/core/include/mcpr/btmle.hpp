#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "mcpr/model.hpp"

namespace mcpr::btmle {

// Pairwise win tallies within one (estimated) cluster: wins(i, j) counts how
// often item i beat item j. comparisons(i, j) = wins(i, j) + wins(j, i).
struct WinCounts {
  using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
  CountMatrix wins;

  int m() const { return static_cast<int>(wins.rows()); }
  std::int64_t comparisons(int i, int j) const { return wins(i, j) + wins(j, i); }
  std::int64_t total_comparisons() const { return wins.sum(); }
};

struct MleConfig {
  int max_iters = 10000;
  double tol = 1e-8;     // gradient-norm stop: ||grad|| < tol * (1 + total comparisons)
  double ridge = 0.0;    // quadratic penalty weight; raised to >= 1e-3 on degenerate data
  double box = 0.0;      // > 0: clamp scores to [-box, box] each iteration

  bool operator==(const MleConfig&) const = default;
};

struct ScoreEstimate {
  Eigen::VectorXd theta_hat;  // sum-zero
  int iterations = 0;
  double final_gradient_norm = 0.0;
  bool connected = true;   // comparison graph connected and every item has a win and a loss
  bool converged = true;
  double ridge_used = 0.0;
};

// Tallies the second half-sample over the given cluster members.
WinCounts aggregate_wins(const model::ComparisonDataset& dataset,
                         const std::vector<int>& members);

// sum_{i,j} wins(i,j) * log( e^{g_i} / (e^{g_i} + e^{g_j}) ), stable for
// large score gaps.
double log_likelihood(const WinCounts& counts, const Eigen::VectorXd& gamma);

// Gradient: entry i = sum_j [ wins(i,j) - comparisons(i,j) * p_ij(gamma) ].
Eigen::VectorXd gradient(const WinCounts& counts, const Eigen::VectorXd& gamma);

// Maximizes the (optionally ridge-penalized) log-likelihood over the
// sum-zero subspace by minorization-maximization. Degenerate data
// (disconnected comparison graph, or an item with no wins or no losses)
// flips `connected` off and forces ridge >= 1e-3 so the iteration stays
// bounded. Never returns non-finite scores.
ScoreEstimate solve_mle(const WinCounts& counts, const MleConfig& config = {});

// ||theta_hat - theta|| / ||theta||; NaN when ||theta|| = 0 (the b = 0
// model has no defined relative error).
double relative_error(const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& theta);

// The two rate expressions of the estimation guarantee, natural logs:
//   eta1 = r max{m,n} log m log n / ((1-eps) K m^2)
//   eta2 = sqrt( log m / ((1-eps) K m) )
// Reported alongside empirical errors as diagnostics.
// Throws std::invalid_argument when m or n < 3 or epsilon = 1.
struct TheoreticalRates {
  double eta1 = 0.0;
  double eta2 = 0.0;
};
TheoreticalRates theoretical_rates(const model::SimulationConfig& config);

// CSV serialization: header "item,theta_hat"; one row per item.
std::string estimate_to_csv(const ScoreEstimate& estimate);
// JSON diagnostics block (iterations, gradient norm, flags).
std::string estimate_diagnostics_json(const ScoreEstimate& estimate);

}  // namespace mcpr::btmle
