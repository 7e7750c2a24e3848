#include "sparsegreedy/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numeric>
#include <ostream>

#include <Eigen/QR>

#include "sparsegreedy/errors.hpp"

namespace sparsegreedy {

void WeaknessPolicy::validate() const {
  if (!(t > 0.0 && t <= 1.0)) throw DomainError("weakness parameter t must lie in (0, 1]");
}

const char* to_string(SelectionMode mode) {
  return mode == SelectionMode::strict_max ? "strict_max" : "adversarial_weak";
}

const char* to_string(Termination termination) {
  switch (termination) {
    case Termination::max_iters: return "max_iters";
    case Termination::residual_tol: return "residual_tol";
    case Termination::zero_functionals: return "zero_functionals";
  }
  return "unknown";
}

SelectionMode selection_mode_from_string(const std::string& name) {
  if (name == "strict_max") return SelectionMode::strict_max;
  if (name == "adversarial_weak") return SelectionMode::adversarial_weak;
  throw ConfigurationError("unknown selection policy '" + name + "'");
}

double GreedyTrace::residual_at(std::size_t m) const {
  if (residual_norms.empty()) return std::numeric_limits<double>::quiet_NaN();
  return residual_norms[std::min(m, residual_norms.size() - 1)];
}

namespace {

struct Selection {
  int index = -1;
  FunctionalValue value;
};

// |F| values are scanned in index order, so the reduction is deterministic.
Selection select_element(const Eigen::VectorXd& abs_functionals, const std::vector<char>& admissible,
                         const WeaknessPolicy& policy) {
  Selection s;
  double best = -1.0;
  for (Eigen::Index i = 0; i < abs_functionals.size(); ++i) {
    if (admissible[i] && abs_functionals[i] > best) {
      best = abs_functionals[i];
      s.index = static_cast<int>(i);
    }
  }
  if (s.index < 0) return s;
  s.value.scan_max = best;
  if (policy.mode == SelectionMode::adversarial_weak) {
    const double threshold = policy.t * best;
    for (Eigen::Index i = 0; i < abs_functionals.size(); ++i) {
      if (admissible[i] && abs_functionals[i] >= threshold) {
        s.index = static_cast<int>(i);
        break;
      }
    }
  }
  s.value.achieved = abs_functionals[s.index];
  return s;
}

// Gram-Schmidt basis of the selected span in sqrt(w)-scaled coordinates;
// used for the p = 2 rank check in every exponent.
class WeightedBasis {
 public:
  WeightedBasis(const Eigen::VectorXd& sqrt_w, Eigen::Index capacity)
      : sqrt_w_(sqrt_w), q_(sqrt_w.size(), capacity), r_(Eigen::MatrixXd::Zero(capacity, capacity)) {}

  Eigen::Index size() const { return k_; }

  /// Projects out the current basis; returns the R diagonal this column would get.
  double candidate(const Eigen::VectorXd& column) {
    pending_ = sqrt_w_.cwiseProduct(column);
    pending_r_ = Eigen::VectorXd::Zero(k_);
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd h = q_.leftCols(k_).transpose() * pending_;
      pending_ -= q_.leftCols(k_) * h;
      pending_r_ += h;
    }
    return pending_.norm();
  }

  /// Appends the last candidate.
  void accept(double diag) {
    q_.col(k_) = pending_ / diag;
    r_.col(k_).head(k_) = pending_r_;
    r_(k_, k_) = diag;
    ++k_;
  }

  auto q() const { return q_.leftCols(k_); }
  auto r() const { return r_.topLeftCorner(k_, k_); }

 private:
  Eigen::VectorXd sqrt_w_;
  Eigen::MatrixXd q_;
  Eigen::MatrixXd r_;
  Eigen::Index k_ = 0;
  Eigen::VectorXd pending_;
  Eigen::VectorXd pending_r_;
};

void warn_dependent(const Dictionary& dict, int index) {
  std::clog << "warning: element " << dict.labels()[index]
            << " is numerically dependent on the selected span; excluded\n";
}

template <typename Project>
GreedyTrace run_greedy(const FunctionVector& f0, const Dictionary& dict, const WeaknessPolicy& policy,
                       std::size_t max_m, const ChebyshevConfig& solver, Project&& project) {
  policy.validate();
  const GridSpace& space = dict.space();
  space.require_dim(f0.size(), "greedy target");
  if (max_m > static_cast<std::size_t>(dict.size()))
    throw DomainError("iteration budget exceeds dictionary size");

  GreedyTrace trace;
  const double f0_norm = norm(space, f0);
  trace.residual = f0;
  trace.residual_norms.push_back(f0_norm);
  if (f0_norm == 0.0) {
    trace.termination = Termination::residual_tol;
    return trace;
  }

  std::vector<char> admissible(dict.size(), 1);
  WeightedBasis basis(space.weights().cwiseSqrt(), static_cast<Eigen::Index>(max_m));
  trace.termination = Termination::max_iters;
  while (trace.selected.size() < max_m) {
    if (trace.residual_norms.back() <= solver.residual_tol * f0_norm) {
      trace.termination = Termination::residual_tol;
      break;
    }
    const Eigen::VectorXd functionals = (dict.elements().transpose() * norming_dual(space, trace.residual)).cwiseAbs();
    const Selection pick = select_element(functionals, admissible, policy);
    if (pick.index < 0 || pick.value.scan_max <= kZeroFunctional) {
      trace.termination = Termination::zero_functionals;
      break;
    }
    admissible[pick.index] = 0;
    const double diag = basis.candidate(dict.element(pick.index));
    if (diag < kDependentColumn) {
      warn_dependent(dict, pick.index);
      trace.skipped.push_back(pick.index);
      continue;
    }
    basis.accept(diag);
    trace.selected.push_back(pick.index);
    trace.functional_values.push_back(pick.value);
    project(trace, basis);
  }
  if (trace.termination == Termination::max_iters && trace.residual_norms.back() <= solver.residual_tol * f0_norm)
    trace.termination = Termination::residual_tol;
  return trace;
}

}  // namespace

GreedyTrace wcga(const FunctionVector& f0, const Dictionary& dict, const WeaknessPolicy& policy, std::size_t max_m,
                 const ChebyshevConfig& solver) {
  const GridSpace& space = dict.space();
  return run_greedy(f0, dict, policy, max_m, solver, [&](GreedyTrace& trace, const WeightedBasis&) {
    const Eigen::MatrixXd span = dict.columns(trace.selected);
    Eigen::VectorXd warm;
    const Eigen::VectorXd* warm_ptr = nullptr;
    if (!trace.coefficients.empty()) {
      warm = Eigen::VectorXd::Zero(span.cols());
      warm.head(span.cols() - 1) = trace.coefficients.back();
      warm_ptr = &warm;
    }
    Projection proj = chebyshev_project(space, f0, span, solver, warm_ptr);
    trace.coefficients.push_back(std::move(proj.coefficients));
    trace.residual_norms.push_back(proj.residual_norm);
    trace.kkt.push_back(proj.kkt);
    trace.residual = std::move(proj.residual);
  });
}

GreedyTrace womp(const FunctionVector& f0, const Dictionary& dict, const WeaknessPolicy& policy, std::size_t max_m,
                 const ChebyshevConfig& solver) {
  const GridSpace& space = dict.space();
  if (space.p() != 2.0) throw DomainError("womp requires the Hilbert case p = 2");
  const Eigen::VectorXd scaled_f = space.weights().cwiseSqrt().cwiseProduct(f0);
  Eigen::VectorXd z;  // Qᵀ (√w ∘ f₀)
  return run_greedy(f0, dict, policy, max_m, solver, [&](GreedyTrace& trace, const WeightedBasis& basis) {
    const Eigen::Index k = basis.size();
    z.conservativeResize(k);
    z[k - 1] = basis.q().col(k - 1).dot(scaled_f);
    Eigen::VectorXd c = basis.r().triangularView<Eigen::Upper>().solve(z);
    const Eigen::MatrixXd span = dict.columns(trace.selected);
    trace.residual = f0 - span * c;
    trace.residual_norms.push_back(norm(space, trace.residual));
    trace.kkt.push_back(kkt_residual(space, trace.residual, span, norm(space, f0)));
    trace.coefficients.push_back(std::move(c));
  });
}

GreedyTrace tga(const FunctionVector& f, const Dictionary& basis, std::size_t m) {
  const GridSpace& space = basis.space();
  space.require_dim(f.size(), "tga target");
  if (basis.size() != basis.dim()) throw DomainError("tga needs a square basis");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis.elements());
  if (qr.rank() < basis.size()) throw DomainError("tga basis is rank deficient");
  const Eigen::VectorXd coeffs = qr.solve(f);

  std::vector<int> order(static_cast<std::size_t>(basis.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(coeffs[a]) > std::abs(coeffs[b]); });

  GreedyTrace trace;
  m = std::min<std::size_t>(m, order.size());
  trace.residual_norms.push_back(norm(space, f));
  FunctionVector approx = FunctionVector::Zero(f.size());
  for (std::size_t j = 0; j < m; ++j) {
    const int idx = order[j];
    trace.selected.push_back(idx);
    approx += coeffs[idx] * basis.element(idx);
    Eigen::VectorXd c(static_cast<Eigen::Index>(j + 1));
    for (std::size_t i = 0; i <= j; ++i) c[static_cast<Eigen::Index>(i)] = coeffs[trace.selected[i]];
    trace.coefficients.push_back(std::move(c));
    trace.residual_norms.push_back(norm(space, f - approx));
  }
  trace.residual = f - approx;
  trace.termination = Termination::max_iters;
  return trace;
}

double decay_constant(const SmoothnessConstants& sc, double V, double t) {
  return std::pow(t, sc.q_dual) / (2.0 * std::pow(16.0 * sc.gamma, 1.0 / (sc.q - 1.0)) * std::pow(V, sc.q_dual));
}

double sparse_decay_bound(const DecayBoundInputs& in) {
  if (in.m < in.k) throw DomainError("decay bound needs m >= k");
  const double c1 = decay_constant(in.smoothness, in.V, in.t);
  const double denom = std::pow(static_cast<double>(in.sparsity), in.r * in.smoothness.q_dual);
  return in.norm_fk * std::exp(-c1 * static_cast<double>(in.m - in.k) / denom) + 2.0 * in.eps;
}

HullRateBound hull_rate_bound(std::size_t m, double a_eps, double eps, const SmoothnessConstants& sc, double t,
                              double constant) {
  if (a_eps < 0.0) throw DomainError("A(eps) must be nonnegative");
  const double shape = (a_eps + eps) * t * std::pow(1.0 + static_cast<double>(m), 1.0 / sc.q - 1.0);
  return {constant, std::max(2.0 * eps, shape), std::max(2.0 * eps, constant * shape)};
}

std::vector<std::string> trace_violations(const GreedyTrace& trace, const WeaknessPolicy& policy, double kkt_tol) {
  std::vector<std::string> out;
  const auto& r = trace.residual_norms;
  for (std::size_t i = 0; i + 1 < r.size(); ++i)
    if (r[i + 1] > r[i] + 1e-10 * r[0])
      out.push_back("residual increased at iteration " + std::to_string(i + 1));
  for (std::size_t i = 0; i < trace.functional_values.size(); ++i) {
    const auto& v = trace.functional_values[i];
    if (v.achieved < policy.t * v.scan_max - 1e-12)
      out.push_back("weak selection violated at iteration " + std::to_string(i + 1));
  }
  for (std::size_t i = 0; i < trace.kkt.size(); ++i)
    if (trace.kkt[i] > kkt_tol) out.push_back("KKT certificate failed at iteration " + std::to_string(i + 1));
  return out;
}

nlohmann::json to_json(const GreedyTrace& trace) {
  nlohmann::json j;
  j["selected"] = trace.selected;
  j["residual_norms"] = trace.residual_norms;
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& c : trace.coefficients) coeffs.push_back(std::vector<double>(c.data(), c.data() + c.size()));
  j["coefficients"] = std::move(coeffs);
  nlohmann::json fv = nlohmann::json::array();
  for (const auto& v : trace.functional_values) fv.push_back({{"achieved", v.achieved}, {"scan_max", v.scan_max}});
  j["functional_values"] = std::move(fv);
  j["kkt"] = trace.kkt;
  j["skipped"] = trace.skipped;
  j["termination"] = to_string(trace.termination);
  return j;
}

void write_csv(const GreedyTrace& trace, std::ostream& out) {
  out << "iteration,index,residual_norm,scan_max,achieved\n" << std::setprecision(17);
  out << 0 << ",," << trace.residual_norms.front() << ",,\n";
  for (std::size_t i = 0; i < trace.selected.size(); ++i) {
    out << i + 1 << ',' << trace.selected[i] << ',' << trace.residual_norms[i + 1] << ',';
    if (i < trace.functional_values.size())
      out << trace.functional_values[i].scan_max << ',' << trace.functional_values[i].achieved;
    else
      out << ',';
    out << '\n';
  }
}

}  // namespace sparsegreedy
