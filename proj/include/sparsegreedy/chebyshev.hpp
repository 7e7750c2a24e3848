#pragma once

#include <Eigen/Core>

#include "sparsegreedy/lp_space.hpp"

namespace sparsegreedy {

struct ChebyshevConfig {
  /// Optimality certificate: max_j |F_residual(u_j)| must fall below this.
  double kkt_tol = 1e-10;
  int max_iters = 200;
  /// Greedy runs stop once ‖f_m‖ ≤ residual_tol·‖f₀‖.
  double residual_tol = 1e-10;
  /// For 1 < p < 2 the Hessian weight |r|^{p-2} is evaluated at max(|r|, weight_floor).
  double weight_floor = 1e-12;
};

/// Best approximation of f from span(U) in L_p, with its certificate.
struct Projection {
  Eigen::VectorXd coefficients;
  FunctionVector residual;
  double residual_norm = 0.0;
  /// max_j |F_residual(u_j)|, 0 when the residual vanishes.
  double kkt = 0.0;
  int iterations = 0;
};

/// max_j |F_r(u_j)| over the columns of `span`; 0 when r is (numerically) zero
/// relative to `reference_norm`.
double kkt_residual(const GridSpace& space, const FunctionVector& r, const Eigen::MatrixXd& span,
                    double reference_norm);

/// Minimizes ‖f − U c‖_p. Closed form at p = 2; damped Newton with the
/// IRLS Hessian otherwise, started from the p = 2 solution or `warm_start`.
/// Throws ConvergenceError when the iteration budget runs out before the
/// KKT tolerance is met.
Projection chebyshev_project(const GridSpace& space, const FunctionVector& f, const Eigen::MatrixXd& span,
                             const ChebyshevConfig& cfg = {}, const Eigen::VectorXd* warm_start = nullptr);

}  // namespace sparsegreedy
