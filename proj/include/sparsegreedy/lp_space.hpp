#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace sparsegreedy {

using FunctionVector = Eigen::VectorXd;

/// Finite-dimensional weighted L_p space: ‖f‖ = (Σ wᵢ|fᵢ|^p)^{1/p}.
///
/// Uniform grids carry probability weights, so constants have unit norm.
/// Tensor grids on [0,1)^d additionally remember their axis layout
/// (row-major, last axis fastest), which the dictionary builders need.
class GridSpace {
 public:
  GridSpace(Eigen::VectorXd weights, double p);

  /// n points, weights 1/n.
  static GridSpace uniform(Eigen::Index n, double p);
  /// per_axis^d points x = j/per_axis on [0,1)^d, weights per_axis^{-d}.
  static GridSpace tensor_grid(int d, Eigen::Index per_axis, double p);

  Eigen::Index dim() const noexcept { return weights_.size(); }
  double p() const noexcept { return p_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  /// Number of axes of a tensor grid; 0 for an unstructured space.
  int axes() const noexcept { return axes_; }
  Eigen::Index per_axis() const noexcept { return per_axis_; }

  /// Same grid and weights, different exponent.
  GridSpace with_p(double p) const;

  void require_dim(Eigen::Index n, const char* what) const;

 private:
  Eigen::VectorXd weights_;
  double p_;
  int axes_ = 0;
  Eigen::Index per_axis_ = 0;
};

struct SmoothnessConstants {
  double q;       // power type: ρ(u) ≤ γ u^q
  double gamma;
  double q_dual;  // q / (q - 1)
};

double norm(const GridSpace& space, const FunctionVector& f);

/// Vector y with F_g(h) = yᵀh for the norming functional F_g of g ≠ 0.
Eigen::VectorXd norming_dual(const GridSpace& space, const FunctionVector& g);

/// F_g(h) = ‖g‖^{1-p} Σ wᵢ|gᵢ|^{p-1} sign(gᵢ) hᵢ.
double norming_functional(const GridSpace& space, const FunctionVector& g, const FunctionVector& h);

/// Power-type smoothness of L_p: (2, (p-1)/2) for p ≥ 2 and (p, 1/p) for 1 < p ≤ 2.
SmoothnessConstants smoothness_constants(double p);

/// Monte-Carlo lower estimate of the modulus of smoothness
/// ρ(u) = ½ sup_{‖x‖=‖y‖=1} (‖x+uy‖ + ‖x−uy‖ − 2).
double estimate_modulus(const GridSpace& space, double u, std::size_t samples, std::uint64_t seed);

/// Exact modulus of smoothness of a Hilbert space, √(1+u²) − 1.
double hilbert_modulus(double u);

}  // namespace sparsegreedy
