#pragma once

#include <cstdint>
#include <vector>

#include "sparsegreedy/chebyshev.hpp"
#include "sparsegreedy/dictionary.hpp"
#include "sparsegreedy/greedy.hpp"

namespace sparsegreedy {

struct OracleConfig {
  std::uint64_t cap = 500'000;
  /// KKT tolerance of the inner Chebyshev solves for p ≠ 2.
  double kkt_tol = 1e-11;
  unsigned threads = 1;
};

struct BestTermApproximation {
  double value = 0.0;
  std::vector<int> support;
};

/// σ_m(f, 𝒟) by exhaustive search over all supports of size min(m, N).
/// Ties resolve to the lexicographically first support. Throws
/// EnumerationCapError when C(N, m) exceeds cfg.cap.
BestTermApproximation sigma_m_exact(const FunctionVector& f, const Dictionary& dict, std::size_t m,
                                    const OracleConfig& cfg = {});

/// σ_m for an orthonormal dictionary at p = 2: the ℓ2 tail of the coefficients.
BestTermApproximation sigma_m_orthonormal(const FunctionVector& f, const Dictionary& dict, std::size_t m);

/// Residual ‖f − P_S f‖ of the best approximation from span{g_i : i ∈ support}.
double best_approximation_error(const FunctionVector& f, const Dictionary& dict, const std::vector<int>& support,
                                const ChebyshevConfig& cfg = {});

/// Relative size below which residuals and σ_m count as zero.
inline constexpr double kExactZero = 1e-9;

/// ‖f_{iterations_used}‖ / σ_m(f₀): +∞ when σ_m vanishes but the residual does
/// not, 1 when both vanish.
double lebesgue_ratio(const GreedyTrace& trace, const FunctionVector& f0, const Dictionary& dict, std::size_t m,
                      std::size_t iterations_used, const OracleConfig& cfg = {});

/// Same, with σ_m already known.
double lebesgue_ratio(double residual, double sigma, double f0_norm);

}  // namespace sparsegreedy
