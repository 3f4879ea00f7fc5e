#include "mcpr/pipeline.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mcpr/netwin.hpp"
#include "mcpr/parallel.hpp"
#include "mcpr/svd.hpp"

namespace mcpr::pipeline {

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(name) + ": " + e.what());
  }
}

std::vector<std::vector<int>> members_by_cluster(const spectral::Clustering& clustering) {
  std::vector<std::vector<int>> members(clustering.r);
  for (int u = 0; u < clustering.n(); ++u) members[clustering.labels[u]].push_back(u);
  return members;
}

// Per-cluster MLE over the second half-sample, clusters in parallel.
std::vector<btmle::ScoreEstimate> estimate_clusters(
    const model::ComparisonDataset& second, const spectral::Clustering& clustering,
    const btmle::MleConfig& mle, int threads) {
  const auto members = members_by_cluster(clustering);
  std::vector<btmle::ScoreEstimate> estimates(clustering.r);
  parallel_for(clustering.r, threads, [&](int k) {
    estimates[k] = btmle::solve_mle(btmle::aggregate_wins(second, members[k]), mle);
  });
  return estimates;
}

}  // namespace

PipelineResult run_algorithm1(const model::ComparisonDataset& dataset,
                              const model::SimulationConfig& config,
                              const PipelineParams& params,
                              const model::ClusterModel* truth, const SplitRng& rng) {
  const int n = dataset.n();
  const int m = dataset.m;
  const int r = params.clustering.r;
  if (r < 1 || r > n)
    throw std::invalid_argument("run_algorithm1: cluster count out of range");

  PipelineResult result;

  // Step 0: sample splitting.
  const model::SplitDataset split =
      stage("step 0 (sample split)", [&] { return model::split_sample(dataset, config.epsilon, rng); });

  // Step 1: net-win projection of the first half-sample.
  const netwin::NetWinMatrix S =
      stage("step 1 (net-win)", [&] { return netwin::net_win(split.first); });

  // Step 2: rank-r denoising + clustering. Distances of the rank-r
  // reconstruction rows equal distances in the left*sigma embedding, so the
  // clustering runs on the n x r embedding.
  result.clustering = stage("step 2 (clustering)", [&] {
    const int max_rank = static_cast<int>(std::min(S.rows.rows(), S.rows.cols()));
    const spectral::LowRankFactors factors =
        spectral::truncated_svd(S.rows, std::min(r, max_rank));
    const Eigen::MatrixXd embedding = factors.embedding();
    if (params.algorithm == ClusterAlgorithm::kThreshold) {
      spectral::ClusteringParams p = params.clustering;
      if (p.tau <= 0.0) p.tau = spectral::default_tau(m, config.epsilon, p.tau_constant);
      return spectral::threshold_cluster(embedding, p, rng.fork(stream::kClusterInit));
    }
    return spectral::kmeans_cluster(embedding, r, params.clustering,
                                    rng.fork(stream::kClusterInit));
  });

  // Step 3: per-cluster score estimation on the second half-sample.
  result.estimates = stage("step 3 (score estimation)", [&] {
    return estimate_clusters(split.second, result.clustering, params.mle, params.threads);
  });

  try {
    result.rates = btmle::theoretical_rates(config);
  } catch (const std::invalid_argument&) {
    // below the m, n >= 3 floor of the rate formulas; leave zeros
  }

  if (dataset.total_records() == 0) {
    result.degenerate = true;
    result.degenerate_reason = "dataset has no comparisons";
  }
  for (int k = 0; k < result.clustering.r && !result.degenerate; ++k) {
    if (!result.estimates[k].connected) {
      result.degenerate = true;
      result.degenerate_reason =
          "cluster " + std::to_string(k) + " has a degenerate comparison graph";
    }
  }
  if (result.clustering.provenance.empty_clusters && !result.degenerate) {
    result.degenerate = true;
    result.degenerate_reason = "clustering produced empty clusters";
  }

  if (truth != nullptr) {
    if (truth->n() != n) throw std::invalid_argument("run_algorithm1: truth size mismatch");
    result.has_truth_metrics = true;
    if (truth->r() == result.clustering.r) {
      result.misclustered_fraction =
          misclustering_permutation(*truth, result.clustering) / (2.0 * n);
    } else {
      result.misclustered_fraction = spectral::misclustering_majority(truth->labels, result.clustering);
    }
    result.per_user_relative_error.resize(n);
    for (int u = 0; u < n; ++u) {
      const auto& est = result.estimates[result.clustering.labels[u]];
      result.per_user_relative_error[u] =
          btmle::relative_error(est.theta_hat, truth->scores[truth->labels[u]]);
    }
  }
  return result;
}

std::vector<RTildeEstimate> sweep_r_tilde(const model::ComparisonDataset& dataset,
                                          const model::SimulationConfig& config,
                                          int r_lo, int r_hi,
                                          const PipelineParams& params,
                                          const model::ClusterModel* truth,
                                          const SplitRng& rng) {
  if (r_lo < 1 || r_hi < r_lo)
    throw std::invalid_argument("sweep_r_tilde: need 1 <= r_lo <= r_hi");
  const int n = dataset.n();
  const int m = dataset.m;
  if (r_hi > n) throw std::invalid_argument("sweep_r_tilde: r_hi exceeds user count");

  // One split and one SVD at the top rank; every sweep point reuses them, so
  // consecutive estimates differ only through r_tilde.
  const model::SplitDataset split = model::split_sample(dataset, config.epsilon, rng);
  const netwin::NetWinMatrix S = netwin::net_win(split.first);
  const int max_rank = static_cast<int>(std::min(S.rows.rows(), S.rows.cols()));
  const int top = std::min(r_hi, max_rank);
  const spectral::LowRankFactors factors = spectral::truncated_svd(S.rows, top);
  const Eigen::MatrixXd full_embedding = factors.embedding();

  std::vector<RTildeEstimate> sweep;
  for (int rt = r_lo; rt <= r_hi; ++rt) {
    const Eigen::MatrixXd embedding = full_embedding.leftCols(std::min(rt, top));
    spectral::Clustering clustering = spectral::kmeans_cluster(
        embedding, rt, params.clustering, rng.fork(stream::kClusterInit, rt));
    const auto estimates =
        estimate_clusters(split.second, clustering, params.mle, params.threads);
    RTildeEstimate entry;
    entry.r_tilde = rt;
    entry.stacked.resize(n, m);
    for (int u = 0; u < n; ++u)
      entry.stacked.row(u) = estimates[clustering.labels[u]].theta_hat;
    if (truth != nullptr) {
      double sum = 0.0;
      for (int u = 0; u < n; ++u)
        sum += btmle::relative_error(estimates[clustering.labels[u]].theta_hat,
                                     truth->scores[truth->labels[u]]);
      entry.mean_relative_error = sum / n;
    } else {
      entry.mean_relative_error = std::numeric_limits<double>::quiet_NaN();
    }
    sweep.push_back(std::move(entry));
  }
  return sweep;
}

ClusterCountResult estimate_num_clusters(const model::ComparisonDataset& dataset,
                                         const model::SimulationConfig& config,
                                         int r_min, int r_max,
                                         const PipelineParams& params,
                                         const model::ClusterModel* truth,
                                         const SplitRng& rng) {
  if (r_min < 2 || r_max < r_min)
    throw std::invalid_argument("estimate_num_clusters: need 2 <= r_min <= r_max");
  const int n = dataset.n();
  const int m = dataset.m;
  const std::vector<RTildeEstimate> sweep =
      sweep_r_tilde(dataset, config, r_min - 1, r_max, params, truth, rng);

  ClusterCountResult out;
  out.has_error_curve = truth != nullptr;
  double truth_norm = 0.0;
  if (truth != nullptr) {
    Eigen::MatrixXd truth_stack(n, m);
    for (int u = 0; u < n; ++u) truth_stack.row(u) = truth->scores[truth->labels[u]];
    truth_norm = truth_stack.norm();
  }

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s = 1; s < sweep.size(); ++s) {
    const double prev_norm = sweep[s - 1].stacked.norm();
    const double diff = (sweep[s].stacked - sweep[s - 1].stacked).norm();
    double change;
    if (prev_norm < 1e-12 * std::sqrt(double(n) * m)) {
      out.reliable = false;  // all-zero estimates: b = 0 style unidentifiable data
      change = 0.0;
    } else {
      change = diff / prev_norm;
    }
    out.r_tilde_grid.push_back(sweep[s].r_tilde);
    out.change_curve.push_back(change);
    if (truth != nullptr) {
      out.change_truth_norm.push_back(truth_norm > 0.0 ? diff / truth_norm
                                                       : std::numeric_limits<double>::quiet_NaN());
      out.error_curve.push_back(sweep[s].mean_relative_error);
    }
    // The estimate stabilizes right after the true cluster count: the change
    // from r to r+1 is the smallest, while the change into r (merged
    // clusters splitting apart) is the largest. The sweep point *preceding*
    // the smallest change is therefore the estimate.
    if (change < best) {
      best = change;
      out.r_hat = sweep[s].r_tilde - 1;
    }
  }
  if (truth != nullptr && truth_norm == 0.0) out.reliable = false;
  return out;
}

}  // namespace mcpr::pipeline
