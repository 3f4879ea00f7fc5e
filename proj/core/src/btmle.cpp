#include "mcpr/btmle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mcpr/io.hpp"

namespace mcpr::btmle {

WinCounts aggregate_wins(const model::ComparisonDataset& dataset,
                         const std::vector<int>& members) {
  const int m = dataset.m;
  WinCounts out;
  out.wins = WinCounts::CountMatrix::Zero(m, m);
  for (int u : members) {
    if (u < 0 || u >= dataset.n())
      throw std::invalid_argument("aggregate_wins: member index out of range");
    for (const auto& rec : dataset.users[u]) {
      if (rec.outcome > 0)
        ++out.wins(rec.i, rec.j);
      else
        ++out.wins(rec.j, rec.i);
    }
  }
  return out;
}

double log_likelihood(const WinCounts& counts, const Eigen::VectorXd& gamma) {
  const int m = counts.m();
  double ll = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const std::int64_t w = counts.wins(i, j);
      if (w == 0) continue;
      // log p_ij = -log(1 + e^{g_j - g_i})
      ll -= w * std::log1p(std::exp(gamma[j] - gamma[i]));
    }
  return ll;
}

Eigen::VectorXd gradient(const WinCounts& counts, const Eigen::VectorXd& gamma) {
  const int m = counts.m();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      const std::int64_t b = counts.comparisons(i, j);
      if (b == 0) continue;
      const double p = model::win_probability(gamma[i], gamma[j]);
      g[i] += counts.wins(i, j) - b * p;
    }
  return g;
}

namespace {

// Connectivity of the comparison graph (edges where any comparison exists).
bool graph_connected(const WinCounts& counts) {
  const int m = counts.m();
  if (m <= 1) return true;
  std::vector<int> stack{0};
  std::vector<char> seen(m, 0);
  seen[0] = 1;
  int visited = 1;
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (int j = 0; j < m; ++j) {
      if (seen[j] || counts.comparisons(i, j) == 0) continue;
      seen[j] = 1;
      ++visited;
      stack.push_back(j);
    }
  }
  return visited == m;
}

bool every_item_has_win_and_loss(const WinCounts& counts) {
  const int m = counts.m();
  for (int i = 0; i < m; ++i) {
    std::int64_t wins = 0, losses = 0;
    for (int j = 0; j < m; ++j) {
      wins += counts.wins(i, j);
      losses += counts.wins(j, i);
    }
    if (wins == 0 || losses == 0) return false;
  }
  return true;
}

}  // namespace

ScoreEstimate solve_mle(const WinCounts& counts, const MleConfig& config) {
  const int m = counts.m();
  if (m < 1) throw std::invalid_argument("solve_mle: empty counts");
  ScoreEstimate out;
  out.theta_hat = Eigen::VectorXd::Zero(m);
  const std::int64_t total = counts.total_comparisons();
  if (m == 1 || total == 0) {
    out.connected = total > 0;
    return out;
  }

  out.connected = graph_connected(counts) && every_item_has_win_and_loss(counts);
  double ridge = config.ridge;
  if (!out.connected) ridge = std::max(ridge, 1e-3);
  out.ridge_used = ridge;

  const double stop = config.tol * (1.0 + static_cast<double>(total));
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd row_wins(m);
  for (int i = 0; i < m; ++i) {
    double w = 0.0;
    for (int j = 0; j < m; ++j) w += counts.wins(i, j);
    row_wins[i] = w;
  }

  int iter = 0;
  double grad_norm = 0.0;
  for (; iter < config.max_iters; ++iter) {
    Eigen::VectorXd g = gradient(counts, gamma);
    if (ridge > 0.0) g -= ridge * gamma;
    grad_norm = g.norm();
    if (grad_norm < stop) break;

    // MM sweep: the minorizer is separable, so each coordinate solves
    //   row_wins_i - denom_i * e^x - ridge * x = 0
    // exactly (log for ridge = 0, a few safeguarded Newton steps otherwise).
    for (int i = 0; i < m; ++i) {
      double denom = 0.0;
      for (int j = 0; j < m; ++j) {
        if (j == i) continue;
        const std::int64_t b = counts.comparisons(i, j);
        if (b == 0) continue;
        const double hi = std::max(gamma[i], gamma[j]);
        denom += b / ((std::exp(gamma[i] - hi) + std::exp(gamma[j] - hi)) * std::exp(hi));
      }
      if (denom <= 0.0) {
        // isolated item: the penalized stationary point is ridge * x = 0
        if (ridge > 0.0) gamma[i] = 0.0;
        continue;
      }
      if (ridge == 0.0) {
        gamma[i] = std::log(row_wins[i] / denom);  // row_wins > 0 when connected
      } else {
        double x = gamma[i];
        for (int it = 0; it < 50; ++it) {
          const double ex = std::exp(x);
          const double f = row_wins[i] - denom * ex - ridge * x;
          const double fp = -denom * ex - ridge;
          const double step = f / fp;
          x -= step;
          if (std::abs(step) < 1e-14 * (1.0 + std::abs(x))) break;
        }
        gamma[i] = x;
      }
      if (config.box > 0.0) gamma[i] = std::clamp(gamma[i], -config.box, config.box);
    }
    gamma.array() -= gamma.mean();
  }

  out.iterations = iter;
  out.final_gradient_norm = grad_norm;
  out.converged = grad_norm < stop;
  gamma.array() -= gamma.mean();
  for (int i = 0; i < m; ++i)
    if (!std::isfinite(gamma[i])) throw std::runtime_error("solve_mle: non-finite score");
  out.theta_hat = std::move(gamma);
  return out;
}

double relative_error(const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& theta) {
  if (theta_hat.size() != theta.size())
    throw std::invalid_argument("relative_error: size mismatch");
  const double denom = theta.norm();
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (theta_hat - theta).norm() / denom;
}

TheoreticalRates theoretical_rates(const model::SimulationConfig& config) {
  const int m = config.m;
  const int n = config.n();
  if (m < 3 || n < 3)
    throw std::invalid_argument("theoretical_rates: need m, n >= 3");
  const double keep = 1.0 - config.epsilon;
  if (keep <= 0.0) throw std::invalid_argument("theoretical_rates: epsilon must be < 1");
  TheoreticalRates rates;
  rates.eta1 = config.r * std::max(m, n) * std::log(double(m)) * std::log(double(n)) /
               (keep * config.K * double(m) * double(m));
  rates.eta2 = std::sqrt(std::log(double(m)) / (keep * config.K * double(m)));
  return rates;
}

std::string estimate_to_csv(const ScoreEstimate& estimate) {
  std::ostringstream os;
  os << "item,theta_hat\n";
  for (int i = 0; i < estimate.theta_hat.size(); ++i)
    os << i << ',' << io::format_double(estimate.theta_hat[i]) << '\n';
  return os.str();
}

std::string estimate_diagnostics_json(const ScoreEstimate& estimate) {
  std::ostringstream os;
  os << "{\"iterations\":" << estimate.iterations
     << ",\"final_gradient_norm\":" << io::format_double(estimate.final_gradient_norm)
     << ",\"connected\":" << (estimate.connected ? "true" : "false")
     << ",\"converged\":" << (estimate.converged ? "true" : "false")
     << ",\"ridge_used\":" << io::format_double(estimate.ridge_used) << "}";
  return os.str();
}

}  // namespace mcpr::btmle
