#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "mcpr/rng.hpp"

namespace mcpr::model {

using ScoreVector = Eigen::VectorXd;

// Full parameter set of one synthetic problem instance.
// n = r*K users total; the user count is always derived, never stored.
struct SimulationConfig {
  int m = 0;              // items
  int r = 1;              // clusters
  int K = 1;              // users per cluster
  double b = 1.0;         // score spread, scores drawn uniform on [0, b]
  double epsilon = 0.0;   // erasure probability, in [0, 1)
  std::uint64_t seed = 0;

  int n() const { return r * K; }

  bool operator==(const SimulationConfig&) const = default;

  // Throws std::invalid_argument with a field-level message on bad values.
  void validate() const;

  // The clustering theory wants b in [b0, 5] or very large; values outside
  // that range are legal (the paper's own experiments use b = 10) but worth
  // a note. Returns an empty string when there is nothing to say.
  std::string theory_range_warning() const;
};

// Ground truth: one sum-zero score vector per cluster plus user labels.
// Users are laid out in contiguous blocks: cluster k owns [k*K, (k+1)*K).
struct ClusterModel {
  std::vector<ScoreVector> scores;
  std::vector<int> labels;

  int r() const { return static_cast<int>(scores.size()); }
  int n() const { return static_cast<int>(labels.size()); }
  int m() const { return scores.empty() ? 0 : static_cast<int>(scores[0].size()); }
};

// One observed comparison: items i < j, outcome +1 if i was preferred.
struct Comparison {
  std::int32_t i;
  std::int32_t j;
  std::int8_t outcome;
};

// Sparse per-user comparison records, sorted by (i, j) within a user.
// This is the observed matrix R; rows are users, columns index pairs i < j.
struct ComparisonDataset {
  int m = 0;
  std::vector<std::vector<Comparison>> users;

  int n() const { return static_cast<int>(users.size()); }
  std::size_t total_records() const {
    std::size_t t = 0;
    for (const auto& u : users) t += u.size();
    return t;
  }
  std::size_t pair_count() const {
    return static_cast<std::size_t>(m) * (m - 1) / 2;
  }
};

// The two half-samples of the sample split: first feeds clustering,
// second feeds score estimation.
struct SplitDataset {
  ComparisonDataset first;
  ComparisonDataset second;
};

// f(x) = (e^x - 1)/(e^x + 1), the expected comparison margin under the
// Bradley-Terry model. Identically tanh(x/2); saturates cleanly at +-1.
inline double bt_margin(double x) { return std::tanh(0.5 * x); }

// P(item i preferred over item j) = e^{ti} / (e^{ti} + e^{tj}),
// computed shift-invariantly so large common offsets cannot overflow.
inline double win_probability(double theta_i, double theta_j) {
  return 1.0 / (1.0 + std::exp(theta_j - theta_i));
}

// Draws each cluster's scores i.i.d. uniform on [0, b], then centers the
// vector to sum zero. Labels are contiguous blocks of K users per cluster.
ClusterModel generate_scores(const SimulationConfig& config, const SplitRng& rng);

// Samples every user/pair comparison independently: observed with
// probability 1 - epsilon, outcome +1 with the BT win probability.
ComparisonDataset sample_comparisons(const ClusterModel& model, double epsilon,
                                     const SplitRng& rng);

// Splits the support of `source` into two half-samples: each record goes
// only to the first with probability (1+eps)/4, only to the second with
// probability (1+eps)/4, to both with probability (1-eps)/4, and is
// discarded otherwise. Outcomes are copied verbatim.
// Throws std::invalid_argument when epsilon is outside [0, 1).
SplitDataset split_sample(const ComparisonDataset& source, double epsilon,
                          const SplitRng& rng);

}  // namespace mcpr::model
