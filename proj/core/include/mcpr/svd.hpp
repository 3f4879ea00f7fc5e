#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>

#include "mcpr/model.hpp"

namespace mcpr::spectral {

// Matrix seen only through products. Lets the same truncated SVD run on the
// dense n x m net-win matrix and on the n x C(m,2) comparison matrix, which
// is never materialized.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  virtual Eigen::VectorXd multiply(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd multiply_transpose(const Eigen::VectorXd& y) const = 0;
  // Dense view when one exists cheaply; enables the small-matrix fallback.
  virtual std::optional<Eigen::MatrixXd> dense() const { return std::nullopt; }
};

class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(const Eigen::MatrixXd& mat) : mat_(&mat) {}
  Eigen::Index rows() const override { return mat_->rows(); }
  Eigen::Index cols() const override { return mat_->cols(); }
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const override { return *mat_ * x; }
  Eigen::VectorXd multiply_transpose(const Eigen::VectorXd& y) const override {
    return mat_->transpose() * y;
  }
  std::optional<Eigen::MatrixXd> dense() const override { return *mat_; }

 private:
  const Eigen::MatrixXd* mat_;
};

// The raw +-1/0 comparison matrix R (rows = users, cols = pairs i < j in
// lexicographic order), applied straight from the sparse records.
class ComparisonRowsOperator final : public LinearOperator {
 public:
  explicit ComparisonRowsOperator(const model::ComparisonDataset& dataset);
  Eigen::Index rows() const override;
  Eigen::Index cols() const override;
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd multiply_transpose(const Eigen::VectorXd& y) const override;

 private:
  std::int64_t pair_index(int i, int j) const;
  const model::ComparisonDataset* dataset_;
};

// Top-r singular triplets. `right` has orthonormal columns; singular values
// are sorted nonincreasing. When the iteration hit its cap before reaching
// tolerance, `converged` is false and `residual` holds the worst triplet
// residual norm actually achieved.
struct LowRankFactors {
  Eigen::MatrixXd left;
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd right;
  bool converged = true;
  double residual = 0.0;

  // n x r coordinates of the rank-r reconstruction in the right-factor
  // basis. Row distances equal row distances of the full reconstruction,
  // so clustering can run on this instead of the (possibly huge) product.
  Eigen::MatrixXd embedding() const { return left * singular_values.asDiagonal(); }

  Eigen::MatrixXd reconstruction() const {
    return left * singular_values.asDiagonal() * right.transpose();
  }
};

struct SvdOptions {
  double tol = 1e-8;            // relative tolerance on triplet residuals
  int max_subspace = 250;       // Lanczos basis size cap
  int dense_cutoff = 64;        // use dense SVD when min(n, cols) <= this
  bool force_iterative = false; // tests: exercise the Lanczos path regardless
  std::uint64_t seed = 0x51d;   // start vector stream
};

// Best rank-r approximation via Golub-Kahan-Lanczos bidiagonalization with
// full reorthogonalization; dense Jacobi SVD below the size cutoff.
// Throws std::invalid_argument unless 1 <= r <= min(rows, cols).
LowRankFactors truncated_svd(const LinearOperator& op, int r, const SvdOptions& opts = {});
LowRankFactors truncated_svd(const Eigen::MatrixXd& mat, int r, const SvdOptions& opts = {});

// Largest singular value (spectral norm), same machinery with r = 1.
double spectral_norm(const Eigen::MatrixXd& mat);

}  // namespace mcpr::spectral
