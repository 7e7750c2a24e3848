#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

namespace sparsegreedy {

/// Samples f(x₁, x₂) on a product grid with product probability weights.
class Matrix2D {
 public:
  /// Uniform weights 1/rows and 1/cols.
  explicit Matrix2D(Eigen::MatrixXd values);
  Matrix2D(Eigen::MatrixXd values, Eigen::VectorXd row_weights, Eigen::VectorXd col_weights);

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const Eigen::VectorXd& row_weights() const noexcept { return row_weights_; }
  const Eigen::VectorXd& col_weights() const noexcept { return col_weights_; }
  Eigen::Index rows() const noexcept { return values_.rows(); }
  Eigen::Index cols() const noexcept { return values_.cols(); }

  /// (Σ w₁ᵢ w₂ⱼ fᵢⱼ²)^{1/2}
  double norm() const;
  /// diag(√w₁) F diag(√w₂): the weighted norm becomes Frobenius.
  Eigen::MatrixXd scaled() const;

 private:
  Eigen::MatrixXd values_;
  Eigen::VectorXd row_weights_;
  Eigen::VectorXd col_weights_;
};

struct RankOneTerm {
  Eigen::VectorXd u;  // function of x₁
  Eigen::VectorXd v;  // function of x₂
};

struct RankOneApproximation {
  std::vector<RankOneTerm> terms;
  /// residual_norms[0] = ‖f‖, residual_norms[j] after j terms.
  std::vector<double> residual_norms;
  int restarts = 0;
};

struct RankOneConfig {
  double tol = 1e-13;
  int max_iters = 200'000;
  int max_restarts = 5;
  std::uint64_t seed = 0;
};

/// Greedy rank-one deflation in the weighted L_2 of the product grid: each step
/// extracts the best single product term of the residual by alternating
/// power iteration and subtracts it.
RankOneApproximation greedy_rank_one(const Matrix2D& f, int M, const RankOneConfig& cfg = {});

/// inf over M product terms of the weighted L_2 error, via the singular-value tail.
double theta_M(const Matrix2D& f, int M);

/// Reads a numeric CSV matrix (no header).
Matrix2D read_matrix_csv(std::istream& in);

}  // namespace sparsegreedy
