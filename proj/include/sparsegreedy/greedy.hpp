#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>
#include "json.hpp"

#include "sparsegreedy/chebyshev.hpp"
#include "sparsegreedy/dictionary.hpp"
#include "sparsegreedy/lp_space.hpp"

namespace sparsegreedy {

enum class SelectionMode {
  strict_max,        // the scan maximizer, lowest index on ties
  adversarial_weak,  // the lowest-index element within t·max
};

struct WeaknessPolicy {
  double t = 1.0;
  SelectionMode mode = SelectionMode::strict_max;

  void validate() const;
};

enum class Termination { max_iters, residual_tol, zero_functionals };

const char* to_string(SelectionMode mode);
const char* to_string(Termination termination);
SelectionMode selection_mode_from_string(const std::string& name);

struct FunctionalValue {
  double achieved = 0.0;  // |F_{f_{m-1}}(φ_m)|
  double scan_max = 0.0;  // max over admissible g of |F_{f_{m-1}}(g)|
};

/// History of one greedy run.
struct GreedyTrace {
  std::vector<int> selected;
  /// coefficients[m-1] expands G_m over selected[0..m).
  std::vector<Eigen::VectorXd> coefficients;
  /// residual_norms[0] = ‖f₀‖, residual_norms[m] = ‖f_m‖.
  std::vector<double> residual_norms;
  std::vector<FunctionalValue> functional_values;
  /// max_j |F_{f_m}(φ_j)| after each projection.
  std::vector<double> kkt;
  /// Elements numerically dependent on the span at the time they were picked.
  std::vector<int> skipped;
  Termination termination = Termination::max_iters;
  FunctionVector residual;

  std::size_t iterations() const noexcept { return selected.size(); }
  /// ‖f_m‖, or the final residual norm if the run stopped before m.
  double residual_at(std::size_t m) const;
};

/// Thresholding greedy algorithm: keeps the m largest expansion coefficients
/// of f in the (square, full-rank) basis.
GreedyTrace tga(const FunctionVector& f, const Dictionary& basis, std::size_t m);

/// Weak Chebyshev greedy algorithm in the ambient L_p of `dict`.
GreedyTrace wcga(const FunctionVector& f0, const Dictionary& dict, const WeaknessPolicy& policy,
                 std::size_t max_m, const ChebyshevConfig& solver = {});

/// Weak orthogonal matching pursuit (p = 2) with an incremental QR projection.
GreedyTrace womp(const FunctionVector& f0, const Dictionary& dict, const WeaknessPolicy& policy,
                 std::size_t max_m, const ChebyshevConfig& solver = {});

/// scan_max at or below this ends a run; R diagonal below this marks a dependent column.
inline constexpr double kZeroFunctional = 1e-14;
inline constexpr double kDependentColumn = 1e-12;

struct DecayBoundInputs {
  double norm_fk = 0.0;
  std::size_t k = 0;
  std::size_t m = 0;
  std::size_t sparsity = 1;  // K
  double r = 0.5;
  SmoothnessConstants smoothness{2.0, 0.5, 2.0};
  double V = 1.0;
  double t = 1.0;
  double eps = 0.0;
};

/// c₁ = t^{q'} / (2 (16γ)^{1/(q-1)} V^{q'}).
double decay_constant(const SmoothnessConstants& sc, double V, double t);

/// ‖f_k‖ exp(−c₁(m−k)/K^{rq'}) + 2ε: the geometric decay guarantee for
/// greedy runs on K-sparse targets under the ℓ1-incoherence condition.
double sparse_decay_bound(const DecayBoundInputs& in);

struct HullRateBound {
  double constant;    // C(q, γ) used for `configured`
  double shape_only;  // with C = 1
  double configured;
};

/// max(2ε, C (A(ε)+ε) t (1+m)^{1/q−1}) for targets with f^ε/A(ε) in the
/// convex hull of the symmetrized dictionary. The constant C(q,γ) is not
/// known explicitly and is passed in.
HullRateBound hull_rate_bound(std::size_t m, double a_eps, double eps, const SmoothnessConstants& sc, double t,
                              double constant = 1.0);

/// Residual monotonicity, the weak-selection contract and the KKT
/// certificate of a finished run; one message per violated iteration.
std::vector<std::string> trace_violations(const GreedyTrace& trace, const WeaknessPolicy& policy, double kkt_tol);

nlohmann::json to_json(const GreedyTrace& trace);
/// iteration,index,residual_norm,scan_max,achieved
void write_csv(const GreedyTrace& trace, std::ostream& out);

}  // namespace sparsegreedy
