#include "mcpr/netwin.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace mcpr::netwin {

IncidenceOperator::IncidenceOperator(int m) : m_(m) {
  if (m < 2) throw std::invalid_argument("IncidenceOperator: m must be >= 2");
}

Eigen::VectorXd IncidenceOperator::apply(const Eigen::VectorXd& x) const {
  if (x.size() != m_) throw std::invalid_argument("apply: expected length-m vector");
  Eigen::VectorXd y(pair_count());
  std::int64_t idx = 0;
  for (int i = 0; i < m_; ++i)
    for (int j = i + 1; j < m_; ++j) y[idx++] = x[i] - x[j];
  return y;
}

Eigen::VectorXd IncidenceOperator::apply_transpose(const Eigen::VectorXd& y) const {
  if (y.size() != pair_count())
    throw std::invalid_argument("apply_transpose: expected length-C(m,2) vector");
  Eigen::VectorXd z = Eigen::VectorXd::Zero(m_);
  std::int64_t idx = 0;
  for (int i = 0; i < m_; ++i)
    for (int j = i + 1; j < m_; ++j) {
      const double v = y[idx++];
      z[i] += v;
      z[j] -= v;
    }
  return z;
}

Eigen::MatrixXd IncidenceOperator::materialize() const {
  if (m_ > 16) throw std::invalid_argument("materialize: oracle mode is limited to m <= 16");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m_, pair_count());
  std::int64_t idx = 0;
  for (int i = 0; i < m_; ++i)
    for (int j = i + 1; j < m_; ++j) {
      A(i, idx) = 1.0;
      A(j, idx) = -1.0;
      ++idx;
    }
  return A;
}

IncidenceSvd explicit_svd_oracle(int m) {
  if (m > 16) throw std::invalid_argument("explicit_svd_oracle: m must be <= 16");
  IncidenceOperator op(m);
  const Eigen::MatrixXd A = op.materialize();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double root_m = std::sqrt(double(m));
  IncidenceSvd out;
  out.U = svd.matrixU().leftCols(m - 1);
  out.V = svd.matrixV().leftCols(m - 1);
  out.singular_values = svd.singularValues().head(m - 1);
  for (int t = 0; t < m - 1; ++t)
    if (std::abs(out.singular_values[t] - root_m) > 1e-9)
      throw std::runtime_error("explicit_svd_oracle: singular value differs from sqrt(m)");
  if (m >= 2 && svd.singularValues().size() >= m &&
      svd.singularValues()[m - 1] > 1e-9 * root_m)
    throw std::runtime_error("explicit_svd_oracle: rank exceeds m-1");
  const double u_norm = std::sqrt((m - 1.0) / m);
  const double v_norm = std::sqrt(2.0 / m);
  for (int i = 0; i < m; ++i)
    if (std::abs(out.U.row(i).norm() - u_norm) > 1e-9)
      throw std::runtime_error("explicit_svd_oracle: U row norm mismatch");
  for (std::int64_t p = 0; p < op.pair_count(); ++p)
    if (std::abs(out.V.row(p).norm() - v_norm) > 1e-9)
      throw std::runtime_error("explicit_svd_oracle: V row norm mismatch");
  return out;
}

NetWinMatrix net_win(const model::ComparisonDataset& dataset) {
  const int m = dataset.m;
  const int n = dataset.n();
  const double scale = 1.0 / std::sqrt(double(m));
  NetWinMatrix out;
  out.rows = Eigen::MatrixXd::Zero(n, m);
  for (int u = 0; u < n; ++u) {
    for (const auto& rec : dataset.users[u]) {
      out.rows(u, rec.i) += rec.outcome * scale;
      out.rows(u, rec.j) -= rec.outcome * scale;
    }
  }
  return out;
}

double subspace_cosine(const IncidenceOperator& op, const Eigen::VectorXd& row) {
  const double norm = row.norm();
  if (norm == 0.0) throw std::invalid_argument("subspace_cosine: zero row");
  const double projected = op.apply_transpose(row).norm() / std::sqrt(double(op.m()));
  // Clamp: roundoff can push the ratio a hair above 1 for in-space rows.
  return std::min(projected / norm, 1.0);
}

Eigen::VectorXd mean_comparison_row(const model::ScoreVector& theta, double epsilon) {
  const int m = static_cast<int>(theta.size());
  IncidenceOperator op(m);
  Eigen::VectorXd row(op.pair_count());
  std::int64_t idx = 0;
  const double scale = 1.0 - epsilon;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      row[idx++] = scale * model::bt_margin(theta[i] - theta[j]);
  return row;
}

AngleProfile angle_profile(int m, const std::vector<double>& b_grid, int trials,
                           const SplitRng& rng) {
  if (m < 2 || trials < 1)
    throw std::invalid_argument("angle_profile: need m >= 2 and trials >= 1");
  IncidenceOperator op(m);
  AngleProfile profile;
  profile.b_grid = b_grid;
  profile.trials = trials;
  profile.mean_cosine.resize(b_grid.size());
  profile.stddev.resize(b_grid.size());
  for (std::size_t g = 0; g < b_grid.size(); ++g) {
    const double b = b_grid[g];
    double sum = 0.0, sumsq = 0.0;
    for (int t = 0; t < trials; ++t) {
      SplitRng stream = rng.fork(static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(t));
      Eigen::VectorXd theta(m);
      for (int i = 0; i < m; ++i) theta[i] = stream.uniform(0.0, b);
      theta.array() -= theta.mean();
      const double c = subspace_cosine(op, mean_comparison_row(theta, 0.0));
      sum += c;
      sumsq += c * c;
    }
    const double mean = sum / trials;
    profile.mean_cosine[g] = mean;
    profile.stddev[g] = trials > 1 ? std::sqrt(std::max(0.0, (sumsq - trials * mean * mean) / (trials - 1)))
                                   : 0.0;
  }
  return profile;
}

double cluster_separation(const model::ClusterModel& model, double epsilon) {
  if (model.r() < 2) throw std::invalid_argument("cluster_separation: need r >= 2");
  const int m = model.m();
  IncidenceOperator op(m);
  const double scale = 1.0 / std::sqrt(double(m));
  std::vector<Eigen::VectorXd> means;
  means.reserve(model.r());
  for (int k = 0; k < model.r(); ++k) {
    // Half-sample mean: each retained pair lands in R^(1) with prob (1-eps)/2.
    Eigen::VectorXd row = mean_comparison_row(model.scores[k], epsilon) * 0.5;
    means.push_back(scale * op.apply_transpose(row));
  }
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < model.r(); ++k)
    for (int k2 = k + 1; k2 < model.r(); ++k2)
      best = std::min(best, (means[k] - means[k2]).norm());
  return best;
}

}  // namespace mcpr::netwin
