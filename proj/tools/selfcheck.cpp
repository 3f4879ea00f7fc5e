#include "selfcheck.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <vector>

#include "mcpr/btmle.hpp"
#include "mcpr/clustering.hpp"
#include "mcpr/model.hpp"
#include "mcpr/netwin.hpp"
#include "mcpr/rng.hpp"
#include "mcpr/svd.hpp"

namespace mcpr::cli {

namespace {

using mcpr::SplitRng;

bool check_incidence_adjointness() {
  SplitRng rng(11);
  for (int m : {3, 8, 50}) {
    netwin::IncidenceOperator op(m);
    for (int t = 0; t < 20; ++t) {
      Eigen::VectorXd x(m), y(op.pair_count());
      for (int i = 0; i < m; ++i) x[i] = rng.uniform(-2, 2);
      for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = rng.uniform(-2, 2);
      const double lhs = op.apply(x).dot(y);
      const double rhs = x.dot(op.apply_transpose(y));
      if (std::abs(lhs - rhs) > 1e-10 * (1 + std::abs(lhs))) return false;
    }
  }
  return true;
}

bool check_incidence_svd_spectrum() {
  for (int m : {3, 5, 8}) {
    try {
      netwin::explicit_svd_oracle(m);  // throws when the closed forms fail
    } catch (const std::exception&) {
      return false;
    }
  }
  return true;
}

bool check_netwin_projection_identity() {
  const int m = 6;
  model::SimulationConfig cfg;
  cfg.m = m;
  cfg.r = 2;
  cfg.K = 5;
  cfg.b = 2.0;
  cfg.epsilon = 0.3;
  cfg.seed = 7;
  SplitRng rng(cfg.seed);
  const auto truth = model::generate_scores(cfg, rng);
  const auto data = model::sample_comparisons(truth, cfg.epsilon, rng);
  const auto svd = netwin::explicit_svd_oracle(m);
  const auto S = netwin::net_win(data);
  // dense R row and the identity S = R V U^T
  netwin::IncidenceOperator op(m);
  for (int u = 0; u < data.n(); ++u) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(op.pair_count());
    for (const auto& rec : data.users[u]) row[op.pair_index(rec.i, rec.j)] = rec.outcome;
    Eigen::VectorXd expected = svd.U * (svd.V.transpose() * row);
    if ((S.rows.row(u).transpose() - expected).norm() > 1e-9) return false;
  }
  return true;
}

bool check_sign_vector_cosine() {
  SplitRng rng(13);
  for (int m : {3, 100}) {
    netwin::IncidenceOperator op(m);
    Eigen::VectorXd theta(m);
    for (int i = 0; i < m; ++i) theta[i] = rng.uniform(0, 1);
    Eigen::VectorXd eta = op.apply(theta).unaryExpr([](double v) { return v > 0 ? 1.0 : -1.0; });
    const double cosine = netwin::subspace_cosine(op, eta);
    const double expected = std::sqrt(2.0 * (m + 1) / (3.0 * m));
    if (std::abs(cosine - expected) > 1e-9) return false;
  }
  return true;
}

bool check_mle_against_grid() {
  SplitRng rng(17);
  for (int inst = 0; inst < 5; ++inst) {
    btmle::WinCounts counts;
    counts.wins = btmle::WinCounts::CountMatrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if (i == j) continue;
        counts.wins(i, j) = 3 + static_cast<std::int64_t>(rng.uniform_index(10));
      }
    const auto est = btmle::solve_mle(counts);
    // grid over the sum-zero plane
    double best = -std::numeric_limits<double>::infinity();
    double bx = 0, by = 0;
    for (double x = -3.0; x <= 3.0 + 1e-12; x += 0.01)
      for (double y = -3.0; y <= 3.0 + 1e-12; y += 0.01) {
        Eigen::Vector3d g(x, y, -x - y);
        const double ll = btmle::log_likelihood(counts, g);
        if (ll > best) {
          best = ll;
          bx = x;
          by = y;
        }
      }
    Eigen::Vector3d grid_arg(bx, by, -bx - by);
    if ((est.theta_hat - grid_arg).lpNorm<Eigen::Infinity>() > 0.02) return false;
  }
  // closed form at m = 2
  btmle::WinCounts two;
  two.wins = btmle::WinCounts::CountMatrix::Zero(2, 2);
  two.wins(0, 1) = 3;
  two.wins(1, 0) = 1;
  const auto est = btmle::solve_mle(two);
  const double half_log3 = 0.5 * std::log(3.0);
  return std::abs(est.theta_hat[0] - half_log3) < 1e-6 &&
         std::abs(est.theta_hat[1] + half_log3) < 1e-6;
}

bool check_permutation_metric() {
  SplitRng rng(19);
  for (int inst = 0; inst < 200; ++inst) {
    const int r = 2 + static_cast<int>(rng.uniform_index(2));
    const int n = r + static_cast<int>(rng.uniform_index(8));
    std::vector<int> truth(n), est_labels(n);
    for (int u = 0; u < n; ++u) {
      truth[u] = static_cast<int>(rng.uniform_index(r));
      est_labels[u] = static_cast<int>(rng.uniform_index(r));
    }
    // direct enumeration over permutations with explicit symmetric differences
    std::vector<int> perm(r);
    std::iota(perm.begin(), perm.end(), 0);
    int expected = std::numeric_limits<int>::max();
    do {
      int total = 0;
      for (int k = 0; k < r; ++k) {
        int sym = 0;
        for (int u = 0; u < n; ++u) {
          const bool in_truth = truth[u] == k;
          const bool in_est = est_labels[u] == perm[k];
          if (in_truth != in_est) ++sym;
        }
        total += sym;
      }
      expected = std::min(expected, total);
    } while (std::next_permutation(perm.begin(), perm.end()));

    spectral::Clustering est;
    est.labels = est_labels;
    est.r = r;
    if (spectral::misclustering_permutation(truth, r, est) != expected) return false;
  }
  return true;
}

bool check_truncated_svd() {
  SplitRng rng(23);
  Eigen::MatrixXd mat(40, 30);
  for (int i = 0; i < mat.rows(); ++i)
    for (int j = 0; j < mat.cols(); ++j) mat(i, j) = rng.uniform(-1, 1);
  spectral::SvdOptions opts;
  opts.force_iterative = true;
  const auto factors = spectral::truncated_svd(mat, 5, opts);
  Eigen::JacobiSVD<Eigen::MatrixXd> dense(mat);
  for (int t = 0; t < 5; ++t)
    if (std::abs(factors.singular_values[t] - dense.singularValues()[t]) >
        1e-8 * dense.singularValues()[0])
      return false;
  return factors.converged;
}

}  // namespace

int run_selfcheck(std::ostream& os) {
  const std::vector<std::pair<const char*, std::function<bool()>>> checks = {
      {"incidence operator adjointness <Ax,y> = <x,A'y>", check_incidence_adjointness},
      {"incidence SVD spectrum (rank m-1, sigma = sqrt(m), row norms)",
       check_incidence_svd_spectrum},
      {"net-win rows equal R V U' (dense oracle, m = 6)", check_netwin_projection_identity},
      {"sign-vector cosine = sqrt(2(m+1)/(3m)) at m in {3, 100}", check_sign_vector_cosine},
      {"MLE matches 0.01-grid search (m = 3) and closed form (m = 2)", check_mle_against_grid},
      {"permutation metric equals exhaustive enumeration", check_permutation_metric},
      {"Lanczos SVD matches dense SVD (40 x 30, top 5)", check_truncated_svd},
  };
  int failures = 0;
  for (const auto& [name, fn] : checks) {
    const bool pass = fn();
    os << (pass ? "[ OK ] " : "[FAIL] ") << name << '\n';
    if (!pass) ++failures;
  }
  os << (failures == 0 ? "all checks passed" : "FAILURES: " + std::to_string(failures)) << '\n';
  return failures;
}

}  // namespace mcpr::cli
