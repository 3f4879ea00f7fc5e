#pragma once

#include <Eigen/Core>
#include <vector>

#include "mcpr/model.hpp"
#include "mcpr/rng.hpp"

namespace mcpr::netwin {

// n x m matrix of net-win vectors; row u is S_u = (1/sqrt(m)) R_u A^T.
// Every row sums to zero: each comparison adds +1/sqrt(m) to one entry and
// -1/sqrt(m) to another.
struct NetWinMatrix {
  Eigen::MatrixXd rows;
};

// The m x C(m,2) incidence operator of the complete comparison graph:
// column (i,j), i < j in lexicographic order, is e_i - e_j. Never
// materialized in production paths; C(m,2) columns are prohibitive at the
// m where this matters. A dense copy is available for m <= 16 (oracle mode).
class IncidenceOperator {
 public:
  explicit IncidenceOperator(int m);

  int m() const { return m_; }
  std::int64_t pair_count() const { return static_cast<std::int64_t>(m_) * (m_ - 1) / 2; }

  // Lexicographic index of pair (i, j), i < j.
  std::int64_t pair_index(int i, int j) const {
    return static_cast<std::int64_t>(i) * m_ - static_cast<std::int64_t>(i) * (i + 1) / 2 +
           (j - i - 1);
  }

  // y = x A (row convention): y_{ij} = x_i - x_j.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  // z = A y: z_i = sum_{j>i} y_{ij} - sum_{j<i} y_{ji}.
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& y) const;

  // Dense m x C(m,2) copy, oracle mode only. Throws for m > 16.
  Eigen::MatrixXd materialize() const;

 private:
  int m_;
};

// Explicit SVD factors of A = sqrt(m) U V^T, oracle mode (m <= 16).
// Construction verifies the closed-form spectrum: rank m-1, all singular
// values sqrt(m), row norms sqrt((m-1)/m) for U and sqrt(2/m) for V.
struct IncidenceSvd {
  Eigen::MatrixXd U;  // m x (m-1)
  Eigen::MatrixXd V;  // C(m,2) x (m-1)
  Eigen::VectorXd singular_values;
};
IncidenceSvd explicit_svd_oracle(int m);

// Net-win projection: one pass over the records, O(total records).
NetWinMatrix net_win(const model::ComparisonDataset& dataset);

// Cosine of the angle between `row` and the row space of A, via
// ||row V||^2 = (1/m) ||A row^T||^2 (no SVD involved).
// Throws std::invalid_argument on a zero row.
double subspace_cosine(const IncidenceOperator& op, const Eigen::VectorXd& row);

// Expected comparison row: entry (i,j) = (1-eps) f(theta_i - theta_j).
Eigen::VectorXd mean_comparison_row(const model::ScoreVector& theta, double epsilon);

// Linearization error of f at spread b: delta(b) = |f(b) - b/2|.
inline double linearization_error(double b) {
  return std::abs(model::bt_margin(b) - 0.5 * b);
}

// Mean cosine between the expected comparison row and the row space of A,
// over fresh uniform-[0,b] score draws. The erasure factor scales the row
// uniformly and cancels in the cosine, so the profile is computed at eps=0.
struct AngleProfile {
  std::vector<double> b_grid;
  std::vector<double> mean_cosine;
  std::vector<double> stddev;
  int trials = 0;
};
AngleProfile angle_profile(int m, const std::vector<double>& b_grid, int trials,
                           const SplitRng& rng);

// Minimum pairwise distance between expected net-win vectors of distinct
// clusters, using the half-sample mean (1-eps)/2 f(theta_i - theta_j).
// Throws std::invalid_argument when the model has fewer than 2 clusters.
double cluster_separation(const model::ClusterModel& model, double epsilon);

}  // namespace mcpr::netwin
