#include "mcpr/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mcpr::spectral {

double default_tau(int m, double epsilon, double c) {
  if (m < 3) throw std::invalid_argument("default_tau: m must be >= 3");
  return c * (1.0 - epsilon) * m / std::sqrt(std::log(double(m)));
}

Clustering threshold_cluster(const Eigen::MatrixXd& rows, const ClusteringParams& params,
                             SplitRng rng) {
  if (params.tau <= 0.0) throw std::invalid_argument("threshold_cluster: tau must be > 0");
  const int n = static_cast<int>(rows.rows());
  const int r = params.r;
  Clustering out;
  out.r = r;
  out.labels.assign(n, -1);
  out.provenance.algorithm = "threshold";
  out.provenance.anchors.assign(r, -1);

  std::vector<int> unclustered(n);
  std::iota(unclustered.begin(), unclustered.end(), 0);
  for (int k = 0; k < r; ++k) {
    if (unclustered.empty()) {
      out.provenance.empty_clusters = true;
      continue;
    }
    const int pivot = unclustered[rng.uniform_index(unclustered.size())];
    out.provenance.anchors[k] = pivot;
    std::vector<int> rest;
    rest.reserve(unclustered.size());
    for (int u : unclustered) {
      if ((rows.row(u) - rows.row(pivot)).norm() <= params.tau)
        out.labels[u] = k;
      else
        rest.push_back(u);
    }
    unclustered.swap(rest);
  }
  // Remaining rows: nearest pivot, ties to the lowest cluster index.
  for (int u : unclustered) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int k = 0; k < r; ++k) {
      const int pivot = out.provenance.anchors[k];
      if (pivot < 0) continue;
      const double d = (rows.row(u) - rows.row(pivot)).squaredNorm();
      if (d < best) {
        best = d;
        arg = k;
      }
    }
    out.labels[u] = arg;
  }
  return out;
}

namespace {

// Row index whose squared distance to its assigned center is largest,
// ties to the lowest index. Used for farthest-point re-seeding.
int farthest_assigned_row(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& centers,
                          const std::vector<int>& assign, double* out_dist2) {
  int arg = 0;
  double best = -1.0;
  for (int u = 0; u < rows.rows(); ++u) {
    const double d = (rows.row(u) - centers.row(assign[u])).squaredNorm();
    if (d > best) {
      best = d;
      arg = u;
    }
  }
  *out_dist2 = best;
  return arg;
}

}  // namespace

Clustering kmeans_cluster(const Eigen::MatrixXd& rows, int r, const ClusteringParams& params,
                          SplitRng rng) {
  const int n = static_cast<int>(rows.rows());
  if (r < 1 || r > n) throw std::invalid_argument("kmeans_cluster: need 1 <= r <= n");
  const int d = static_cast<int>(rows.cols());

  Clustering out;
  out.r = r;
  out.provenance.algorithm = "kmeans";

  // Farthest-first initialization.
  std::vector<int> center_rows;
  center_rows.push_back(static_cast<int>(rng.uniform_index(n)));
  Eigen::VectorXd min_dist2 =
      (rows.rowwise() - rows.row(center_rows[0])).rowwise().squaredNorm();
  while (static_cast<int>(center_rows.size()) < r) {
    int arg = 0;
    double best = -1.0;
    for (int u = 0; u < n; ++u) {
      if (min_dist2[u] > best) {
        best = min_dist2[u];
        arg = u;
      }
    }
    center_rows.push_back(arg);
    min_dist2 = min_dist2.cwiseMin(
        (rows.rowwise() - rows.row(arg)).rowwise().squaredNorm());
  }
  out.provenance.anchors = center_rows;

  Eigen::MatrixXd centers(r, d);
  for (int k = 0; k < r; ++k) centers.row(k) = rows.row(center_rows[k]);

  std::vector<int> assign(n, 0);
  auto assign_step = [&]() {
    double objective = 0.0;
    for (int u = 0; u < n; ++u) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int k = 0; k < r; ++k) {
        const double dd = (rows.row(u) - centers.row(k)).squaredNorm();
        if (dd < best) {
          best = dd;
          arg = k;
        }
      }
      assign[u] = arg;
      objective += best;
    }
    return objective;
  };

  int iter = 0;
  for (; iter < params.kmeans_max_iters; ++iter) {
    const double objective = assign_step();
    out.provenance.objective_trace.push_back(objective);

    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(r, d);
    std::vector<int> count(r, 0);
    for (int u = 0; u < n; ++u) {
      next.row(assign[u]) += rows.row(u);
      ++count[assign[u]];
    }
    for (int k = 0; k < r; ++k)
      if (count[k] > 0) next.row(k) /= count[k];

    for (int k = 0; k < r; ++k) {
      if (count[k] > 0) continue;
      out.provenance.empty_clusters = true;
      double dist2 = 0.0;
      const int u = farthest_assigned_row(rows, next, assign, &dist2);
      if (dist2 == 0.0) {
        next.row(k) = centers.row(k);  // nothing to gain; keep the old center
        continue;
      }
      next.row(k) = rows.row(u);
      assign[u] = k;  // so a later empty cluster picks a different row
    }

    const double movement = (next - centers).rowwise().norm().maxCoeff();
    centers = next;
    if (movement < params.kmeans_tol || objective == 0.0) {
      ++iter;
      break;
    }
  }
  assign_step();  // labels consistent with the final centers
  out.provenance.iterations = iter;
  out.labels = std::move(assign);
  return out;
}

namespace {

// Maximum-weight perfect matching on an r x r overlap matrix via the
// Hungarian algorithm (potentials + augmenting paths, O(r^3)).
long long max_assignment(const std::vector<std::vector<long long>>& weight) {
  const int r = static_cast<int>(weight.size());
  long long top = 0;
  for (const auto& row : weight)
    for (long long w : row) top = std::max(top, w);
  // Minimize cost = top - weight.
  const long long INF = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(r + 1), v(r + 1);
  std::vector<int> p(r + 1), way(r + 1);
  for (int i = 1; i <= r; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<long long> minv(r + 1, INF);
    std::vector<char> used(r + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      long long delta = INF;
      int j1 = 0;
      for (int j = 1; j <= r; ++j) {
        if (used[j]) continue;
        const long long cur = (top - weight[i0 - 1][j - 1]) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= r; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  long long total = 0;
  for (int j = 1; j <= r; ++j) total += weight[p[j] - 1][j - 1];
  return total;
}

}  // namespace

int misclustering_permutation(const std::vector<int>& truth_labels, int truth_r,
                              const Clustering& est) {
  const int n = static_cast<int>(truth_labels.size());
  if (est.n() != n) throw std::invalid_argument("misclustering_permutation: size mismatch");
  if (est.r != truth_r)
    throw std::invalid_argument("misclustering_permutation: cluster count mismatch");
  const int r = truth_r;
  std::vector<std::vector<long long>> overlap(r, std::vector<long long>(r, 0));
  for (int i = 0; i < n; ++i) ++overlap[truth_labels[i]][est.labels[i]];

  long long best_overlap = 0;
  if (r <= 8) {
    std::vector<int> perm(r);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      long long total = 0;
      for (int k = 0; k < r; ++k) total += overlap[k][perm[k]];
      best_overlap = std::max(best_overlap, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    best_overlap = max_assignment(overlap);
  }
  // sum_k |C_k delta C_hat_pi(k)| = sum |C_k| + sum |C_hat| - 2 sum overlap
  return static_cast<int>(2LL * n - 2LL * best_overlap);
}

int misclustering_permutation(const model::ClusterModel& truth, const Clustering& est) {
  return misclustering_permutation(truth.labels, truth.r(), est);
}

double misclustering_majority(const std::vector<int>& truth_labels, const Clustering& est) {
  const int n = static_cast<int>(truth_labels.size());
  if (est.n() != n) throw std::invalid_argument("misclustering_majority: size mismatch");
  if (n == 0) return 0.0;
  const int truth_r = *std::max_element(truth_labels.begin(), truth_labels.end()) + 1;
  long long errors = 0;
  for (int j = 0; j < est.r; ++j) {
    std::vector<long long> count(truth_r, 0);
    long long size = 0;
    for (int u = 0; u < n; ++u) {
      if (est.labels[u] != j) continue;
      ++count[truth_labels[u]];
      ++size;
    }
    if (size == 0) continue;
    long long plurality = 0;
    for (int k = 0; k < truth_r; ++k) plurality = std::max(plurality, count[k]);
    errors += size - plurality;  // argmax ties resolve to the lower index implicitly
  }
  return static_cast<double>(errors) / n;
}

std::string clustering_to_csv(const Clustering& clustering) {
  std::ostringstream os;
  os << "user_id,label\n";
  for (int u = 0; u < clustering.n(); ++u) os << u << ',' << clustering.labels[u] << '\n';
  return os.str();
}

}  // namespace mcpr::spectral
