#include "sparsegreedy/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "sparsegreedy/combinatorics.hpp"
#include "sparsegreedy/errors.hpp"
#include "sparsegreedy/parallel.hpp"

namespace sparsegreedy {

namespace {

double weighted_ls_residual(const Eigen::VectorXd& sqrt_w, const FunctionVector& f, const Eigen::MatrixXd& cols) {
  const Eigen::VectorXd b = sqrt_w.cwiseProduct(f);
  if (cols.cols() == 0) return b.norm();
  const Eigen::MatrixXd a = sqrt_w.asDiagonal() * cols;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::VectorXd qtb = qr.householderQ().adjoint() * b;
  return qtb.tail(qtb.size() - std::min<Eigen::Index>(cols.cols(), qtb.size())).norm();
}

// Lexicographically first support among those within tolerance of the minimum.
BestTermApproximation pick_lexicographic(const std::vector<double>& values, std::size_t first_rank, int n, int k,
                                         double scale) {
  const double best = *std::min_element(values.begin(), values.end());
  const double tol = 1e-12 * scale;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] <= best + tol) return {best, unrank_combination(first_rank + i, n, k)};
  return {best, {}};
}

constexpr std::size_t kChunk = 4096;

// Evaluates `value(support)` on every k-subset of [0, n), in rank order.
template <typename Value>
std::vector<double> enumerate_supports(int n, int k, std::uint64_t total, unsigned threads, Value&& value) {
  std::vector<double> values(total);
  const std::size_t chunks = (total + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::uint64_t begin = c * kChunk;
    const std::uint64_t end = std::min<std::uint64_t>(total, begin + kChunk);
    std::vector<int> combo = unrank_combination(begin, n, k);
    for (std::uint64_t r = begin; r < end; ++r) {
      values[r] = value(combo);
      next_combination(combo, n);
    }
  });
  return values;
}

}  // namespace

double best_approximation_error(const FunctionVector& f, const Dictionary& dict, const std::vector<int>& support,
                                const ChebyshevConfig& cfg) {
  const Eigen::MatrixXd cols = dict.columns(support);
  if (dict.space().p() == 2.0) return weighted_ls_residual(dict.space().weights().cwiseSqrt(), f, cols);
  return chebyshev_project(dict.space(), f, cols, cfg).residual_norm;
}

BestTermApproximation sigma_m_exact(const FunctionVector& f, const Dictionary& dict, std::size_t m,
                                    const OracleConfig& cfg) {
  const GridSpace& space = dict.space();
  space.require_dim(f.size(), "sigma_m target");
  const int n = static_cast<int>(dict.size());
  const int k = static_cast<int>(std::min<std::size_t>(m, dict.size()));
  const double f_norm = norm(space, f);
  if (k == 0) return {f_norm, {}};
  const std::uint64_t total = binomial_capped(n, k, cfg.cap);
  if (total > cfg.cap)
    throw EnumerationCapError("sigma_m oracle: C(" + std::to_string(n) + "," + std::to_string(k) +
                              ") supports exceed the enumeration cap; reduce the dictionary size or m");

  const Eigen::VectorXd sqrt_w = space.weights().cwiseSqrt();
  if (space.p() != 2.0) {
    ChebyshevConfig inner;
    inner.kkt_tol = cfg.kkt_tol;
    const auto values = enumerate_supports(n, k, total, cfg.threads, [&](const std::vector<int>& s) {
      return chebyshev_project(space, f, dict.columns(s), inner).residual_norm;
    });
    return pick_lexicographic(values, 0, n, k, f_norm);
  }

  // p = 2: screen with the Gram identity ‖f − P_S f‖² = ‖f‖² − bᵀG_S⁻¹b, which
  // loses accuracy near zero, then recompute the near-optimal supports by QR.
  const Eigen::MatrixXd gram = dict.gram();
  const Eigen::VectorXd corr = dict.elements().transpose() * space.weights().cwiseProduct(f);
  const double f2 = f_norm * f_norm;
  const auto screened = enumerate_supports(n, k, total, cfg.threads, [&](const std::vector<int>& s) {
    Eigen::MatrixXd g(k, k);
    Eigen::VectorXd b(k);
    for (int i = 0; i < k; ++i) {
      b[i] = corr[s[i]];
      for (int j = 0; j < k; ++j) g(i, j) = gram(s[i], s[j]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) return 0.0;  // dependent: forces exact recompute
    return std::max(0.0, f2 - b.dot(llt.solve(b)));
  });
  const double best_sq = *std::min_element(screened.begin(), screened.end());
  const double margin = 1e-8 * f2 + 1e-300;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::uint64_t, double>> exact;
  for (std::uint64_t r = 0; r < total; ++r) {
    if (screened[r] <= best_sq + margin) {
      const double v = weighted_ls_residual(sqrt_w, f, dict.columns(unrank_combination(r, n, k)));
      exact.emplace_back(r, v);
      best = std::min(best, v);
    }
  }
  for (const auto& [r, v] : exact)
    if (v <= best + 1e-12 * f_norm) return {best, unrank_combination(r, n, k)};
  return {best, {}};
}

BestTermApproximation sigma_m_orthonormal(const FunctionVector& f, const Dictionary& dict, std::size_t m) {
  const GridSpace& space = dict.space();
  if (space.p() != 2.0) throw DomainError("orthonormal fast path needs p = 2");
  if (dict.size() > dict.dim()) throw DomainError("orthonormal fast path needs an orthonormal dictionary");
  const Eigen::MatrixXd gram = dict.gram();
  if ((gram - Eigen::MatrixXd::Identity(dict.size(), dict.size())).cwiseAbs().maxCoeff() > 1e-10)
    throw DomainError("orthonormal fast path needs an orthonormal dictionary");
  const Eigen::VectorXd c = dict.elements().transpose() * space.weights().cwiseProduct(f);
  std::vector<int> order(static_cast<std::size_t>(dict.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(c[a]) > std::abs(c[b]); });
  m = std::min<std::size_t>(m, order.size());
  BestTermApproximation out;
  out.support.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
  std::sort(out.support.begin(), out.support.end());
  // the part of f outside the span counts as well
  FunctionVector tail = f;
  for (int i : out.support) tail -= c[i] * dict.element(i);
  out.value = norm(space, tail);
  return out;
}

double lebesgue_ratio(double residual, double sigma, double f0_norm) {
  const double zero = kExactZero * f0_norm;
  if (sigma <= zero) return residual <= zero ? 1.0 : std::numeric_limits<double>::infinity();
  return residual / sigma;
}

double lebesgue_ratio(const GreedyTrace& trace, const FunctionVector& f0, const Dictionary& dict, std::size_t m,
                      std::size_t iterations_used, const OracleConfig& cfg) {
  const double sigma = sigma_m_exact(f0, dict, m, cfg).value;
  return lebesgue_ratio(trace.residual_at(iterations_used), sigma, norm(dict.space(), f0));
}

}  // namespace sparsegreedy
