#include "mcpr/svd.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include "mcpr/rng.hpp"

namespace mcpr::spectral {

ComparisonRowsOperator::ComparisonRowsOperator(const model::ComparisonDataset& dataset)
    : dataset_(&dataset) {}

Eigen::Index ComparisonRowsOperator::rows() const { return dataset_->n(); }
Eigen::Index ComparisonRowsOperator::cols() const {
  return static_cast<Eigen::Index>(dataset_->pair_count());
}

std::int64_t ComparisonRowsOperator::pair_index(int i, int j) const {
  const std::int64_t m = dataset_->m;
  return i * m - static_cast<std::int64_t>(i) * (i + 1) / 2 + (j - i - 1);
}

Eigen::VectorXd ComparisonRowsOperator::multiply(const Eigen::VectorXd& x) const {
  if (x.size() != cols()) throw std::invalid_argument("ComparisonRowsOperator: size mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(rows());
  for (int u = 0; u < dataset_->n(); ++u) {
    double acc = 0.0;
    for (const auto& rec : dataset_->users[u]) acc += rec.outcome * x[pair_index(rec.i, rec.j)];
    y[u] = acc;
  }
  return y;
}

Eigen::VectorXd ComparisonRowsOperator::multiply_transpose(const Eigen::VectorXd& y) const {
  if (y.size() != rows()) throw std::invalid_argument("ComparisonRowsOperator: size mismatch");
  Eigen::VectorXd z = Eigen::VectorXd::Zero(cols());
  for (int u = 0; u < dataset_->n(); ++u) {
    const double w = y[u];
    if (w == 0.0) continue;
    for (const auto& rec : dataset_->users[u]) z[pair_index(rec.i, rec.j)] += rec.outcome * w;
  }
  return z;
}

namespace {

// Classical Gram-Schmidt, applied twice, against the first k columns.
void reorthogonalize(const Eigen::MatrixXd& basis, int k, Eigen::VectorXd& w) {
  if (k == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::VectorXd h = basis.leftCols(k).transpose() * w;
    w.noalias() -= basis.leftCols(k) * h;
  }
}

// Random unit vector orthogonal to the first k basis columns; empty when the
// complement is (numerically) exhausted.
bool fresh_direction(SplitRng& rng, const Eigen::MatrixXd& basis, int k, Eigen::VectorXd& v) {
  for (int attempt = 0; attempt < 5; ++attempt) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-1.0, 1.0);
    reorthogonalize(basis, k, v);
    const double norm = v.norm();
    if (norm > 1e-8 * std::sqrt(double(v.size()))) {
      v /= norm;
      return true;
    }
  }
  return false;
}

LowRankFactors dense_truncated(const Eigen::MatrixXd& mat, int r) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  LowRankFactors out;
  out.left = svd.matrixU().leftCols(r);
  out.singular_values = svd.singularValues().head(r);
  out.right = svd.matrixV().leftCols(r);
  out.converged = true;
  out.residual = 0.0;
  return out;
}

}  // namespace

LowRankFactors truncated_svd(const LinearOperator& op, int r, const SvdOptions& opts) {
  const Eigen::Index n = op.rows();
  const Eigen::Index c = op.cols();
  const Eigen::Index min_dim = std::min(n, c);
  if (r < 1 || r > min_dim)
    throw std::invalid_argument("truncated_svd: r must satisfy 1 <= r <= min(rows, cols)");

  if (!opts.force_iterative && min_dim <= opts.dense_cutoff) {
    if (auto mat = op.dense()) return dense_truncated(*mat, r);
  }

  const int cap = static_cast<int>(std::min<Eigen::Index>(opts.max_subspace, min_dim));
  Eigen::MatrixXd basis_u(n, cap);
  Eigen::MatrixXd basis_v(c, cap);
  Eigen::MatrixXd band = Eigen::MatrixXd::Zero(cap, cap);  // B: alpha diag, beta superdiag

  SplitRng rng = SplitRng(opts.seed).fork(stream::kSvd);
  Eigen::VectorXd v(c), u(n);
  if (!fresh_direction(rng, basis_v, 0, v)) {
    // zero-dimensional pathologies only; treated as a zero matrix below
    v.setZero();
    v[0] = 1.0;
  }

  int k = 0;
  double sigma_max = 0.0;
  double prev_beta = 0.0;
  bool exhausted = false;
  int dead_starts = 0;  // consecutive restarts that produced no new direction

  LowRankFactors out;
  // Residual of triplet i after k steps is beta_k * |last entry of the i-th
  // left singular vector of B_k| (exact under full reorthogonalization).
  // That cheap estimate gates the expensive basis products; an explicit
  // residual pass guards the final answer once.
  auto cheap_estimate = [&](int dim, double next_beta) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(band.topLeftCorner(dim, dim),
                                          Eigen::ComputeThinU);
    const int take = std::min(r, dim);
    double worst = 0.0;
    for (int t = 0; t < take; ++t)
      worst = std::max(worst, std::abs(next_beta * svd.matrixU()(dim - 1, t)));
    return std::pair<double, double>(worst, svd.singularValues()[0]);
  };
  auto extract = [&](int dim) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(band.topLeftCorner(dim, dim),
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    const int take = std::min(r, dim);
    out.left = basis_u.leftCols(dim) * svd.matrixU().leftCols(take);
    out.right = basis_v.leftCols(dim) * svd.matrixV().leftCols(take);
    out.singular_values = svd.singularValues().head(take);
  };
  auto residual_ok = [&](double scale) {
    if (out.singular_values.size() > 0) scale = std::max(scale, out.singular_values[0]);
    out.residual = 0.0;
    for (int t = 0; t < out.singular_values.size(); ++t) {
      const double res_v =
          (op.multiply(out.right.col(t)) - out.singular_values[t] * out.left.col(t)).norm();
      const double res_u =
          (op.multiply_transpose(out.left.col(t)) - out.singular_values[t] * out.right.col(t))
              .norm();
      out.residual = std::max(out.residual, std::max(res_v, res_u));
    }
    return out.residual <= opts.tol * std::max(scale, 1e-300);
  };

  while (k < cap) {
    // u_k = Op v_k - beta_{k-1} u_{k-1}, then full reorthogonalization
    u = op.multiply(v);
    if (k > 0 && prev_beta != 0.0) u.noalias() -= prev_beta * basis_u.col(k - 1);
    reorthogonalize(basis_u, k, u);
    double alpha = u.norm();
    if (alpha <= 1e-14 * std::max(sigma_max, 1.0)) {
      // v lies in the (numerical) null space; restart in the orthogonal
      // complement. Repeated dead starts mean the range is exhausted.
      if (++dead_starts > 3 || !fresh_direction(rng, basis_v, k, v)) {
        exhausted = true;
        break;
      }
      prev_beta = 0.0;
      continue;
    }
    dead_starts = 0;
    basis_u.col(k) = u / alpha;
    band(k, k) = alpha;
    sigma_max = std::max(sigma_max, alpha);

    Eigen::VectorXd w = op.multiply_transpose(basis_u.col(k)) - alpha * v;
    // current v is not yet in basis_v; orthogonalize against stored columns and it
    reorthogonalize(basis_v, k, w);
    w.noalias() -= v.dot(w) * v;
    double beta = w.norm();
    if (beta <= 1e-14 * std::max(sigma_max, 1.0)) beta = 0.0;
    basis_v.col(k) = v;
    ++k;

    const bool check_now =
        k >= r && (k <= 32 || (k <= 64 && k % 4 == 0) || k % 8 == 0 || k == cap);
    if (check_now) {
      const auto [estimate, sigma1] = cheap_estimate(k, beta);
      if (estimate <= opts.tol * std::max(sigma1, 1e-300) || k == cap) {
        extract(k);
        if (out.singular_values.size() == r && residual_ok(sigma_max)) {
          out.converged = true;
          return out;
        }
      }
    }

    if (k < cap) {
      if (beta == 0.0) {
        if (!fresh_direction(rng, basis_v, k, v)) {
          exhausted = true;
          break;
        }
        prev_beta = 0.0;
      } else {
        v = w / beta;
        band(k - 1, k) = beta;
        prev_beta = beta;
      }
    }
  }

  // Cap reached or space exhausted: report the best available triplets.
  if (k == 0) {
    // zero matrix: arbitrary orthonormal factors, zero singular values
    out.left = Eigen::MatrixXd::Identity(n, r);
    out.right = Eigen::MatrixXd::Identity(c, r);
    out.singular_values = Eigen::VectorXd::Zero(r);
    out.converged = true;
    out.residual = 0.0;
    return out;
  }
  extract(k);
  // Rank-deficient input: pad with zero singular values on orthonormal
  // directions so the factor shapes stay r regardless.
  while (out.singular_values.size() < r) {
    Eigen::VectorXd pu(n), pv(c);
    Eigen::MatrixXd lb = out.left, rb = out.right;
    if (!fresh_direction(rng, lb, static_cast<int>(lb.cols()), pu) ||
        !fresh_direction(rng, rb, static_cast<int>(rb.cols()), pv))
      throw std::runtime_error("truncated_svd: cannot pad rank-deficient factors");
    out.left.conservativeResize(Eigen::NoChange, out.left.cols() + 1);
    out.left.col(out.left.cols() - 1) = pu;
    out.right.conservativeResize(Eigen::NoChange, out.right.cols() + 1);
    out.right.col(out.right.cols() - 1) = pv;
    out.singular_values.conservativeResize(out.singular_values.size() + 1);
    out.singular_values[out.singular_values.size() - 1] = 0.0;
  }
  out.converged = residual_ok(sigma_max) || exhausted;
  return out;
}

LowRankFactors truncated_svd(const Eigen::MatrixXd& mat, int r, const SvdOptions& opts) {
  DenseOperator op(mat);
  return truncated_svd(op, r, opts);
}

double spectral_norm(const Eigen::MatrixXd& mat) {
  if (mat.rows() == 0 || mat.cols() == 0) return 0.0;
  return truncated_svd(mat, 1).singular_values[0];
}

}  // namespace mcpr::spectral
