#include "sparsegreedy/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "sparsegreedy/chebyshev.hpp"
#include "sparsegreedy/combinatorics.hpp"
#include "sparsegreedy/errors.hpp"
#include "sparsegreedy/parallel.hpp"
#include "sparsegreedy/random.hpp"

namespace sparsegreedy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// relative eigenvalue floor below which a support Gram matrix is singular
constexpr double kSingular = 1e-12;

using Support = std::vector<int>;

Eigen::MatrixXd sub_matrix(const Eigen::MatrixXd& m, const Support& rows) {
  const auto k = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd out(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) out(i, j) = m(rows[i], rows[j]);
  return out;
}

Support gather(const Support& global, const Support& local) {
  Support out;
  out.reserve(local.size());
  for (int i : local) out.push_back(global[i]);
  return out;
}

bool singular(const Eigen::VectorXd& eigenvalues) {
  const double hi = eigenvalues.cwiseAbs().maxCoeff();
  return !(eigenvalues.minCoeff() > kSingular * std::max(hi, 1.0));
}

// Candidate value of a constant on one support; reduced by max, ties to the
// earliest candidate in visiting order.
struct Candidate {
  double value = -kInf;
  Support a;
  Support b;
};

void offer(Candidate& best, double value, const Support& a, const Support& b) {
  if (value > best.value) best = {value, a, b};
}

ConstantEstimate finish(const Candidate& best, Method method, std::uint64_t seed) {
  ConstantEstimate out;
  out.value = best.value;
  out.method = method;
  out.seed = seed;
  out.witness_a = best.a;
  out.witness_b = best.b;
  return out;
}

Candidate reduce(const std::vector<Candidate>& parts) {
  Candidate best;
  for (const auto& c : parts)
    if (c.value > best.value) best = c;
  return best;
}

// max over sign patterns ε (ε₀ = +1) of εᵀPε; sampled when |A| is too large.
double max_sign_quadratic(const Eigen::MatrixXd& p, int max_bits, std::uint64_t seed, bool& sampled) {
  const auto k = static_cast<int>(p.rows());
  Eigen::VectorXd eps(k);
  double best = 0.0;
  auto eval = [&] { best = std::max(best, eps.dot(p * eps)); };
  if (k - 1 <= max_bits) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (k - 1)); ++mask) {
      eps[0] = 1.0;
      for (int i = 1; i < k; ++i) eps[i] = (mask >> (i - 1)) & 1 ? -1.0 : 1.0;
      eval();
    }
    return best;
  }
  sampled = true;
  Rng rng(seed);
  std::bernoulli_distribution coin;
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << max_bits); ++s) {
    eps[0] = 1.0;
    for (int i = 1; i < k; ++i) eps[i] = coin(rng) ? -1.0 : 1.0;
    eval();
  }
  return best;
}

std::vector<Eigen::VectorXd> sign_patterns(int k, int max_bits, std::uint64_t seed, bool& sampled) {
  std::vector<Eigen::VectorXd> out;
  if (k - 1 <= max_bits) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (k - 1)); ++mask) {
      Eigen::VectorXd eps(k);
      eps[0] = 1.0;
      for (int i = 1; i < k; ++i) eps[i] = (mask >> (i - 1)) & 1 ? -1.0 : 1.0;
      out.push_back(std::move(eps));
    }
    return out;
  }
  sampled = true;
  Rng rng(seed);
  std::bernoulli_distribution coin;
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << max_bits); ++s) {
    Eigen::VectorXd eps(k);
    eps[0] = 1.0;
    for (int i = 1; i < k; ++i) eps[i] = coin(rng) ? -1.0 : 1.0;
    out.push_back(std::move(eps));
  }
  return out;
}

// All (A, B) with A ⊂ B, 1 ≤ |A| ≤ K and |B| = D (D already clipped to N):
// visited B-major in lexicographic order, or sampled when over the cap.
struct PairPlan {
  int n = 0, k = 0, d = 0;
  bool exact = true;
  std::uint64_t b_count = 0;
  std::uint64_t samples = 0;
};

PairPlan plan_pairs(int n, int k, int d, const AnalysisConfig& cfg) {
  PairPlan plan{n, std::min(k, d), d, true, 0, 0};
  const std::uint64_t b_count = binomial_capped(n, d, cfg.cap);
  std::uint64_t per_b = 0;
  for (int a = 1; a <= plan.k; ++a) per_b += binomial_capped(d, a, cfg.cap);
  const long double total = static_cast<long double>(b_count) * static_cast<long double>(per_b);
  if (b_count > cfg.cap || total > static_cast<long double>(cfg.cap)) {
    plan.exact = false;
    plan.samples = cfg.samples;
  } else {
    plan.b_count = b_count;
  }
  return plan;
}

// Per-B cache of the Gram block and its inverse.
struct GramBlock {
  bool dependent = false;
  Eigen::MatrixXd m;
  Eigen::MatrixXd inverse;
};

GramBlock gram_block(const Eigen::MatrixXd& gram, const Support& b) {
  GramBlock out;
  out.m = sub_matrix(gram, b);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.m);
  if (singular(es.eigenvalues())) {
    out.dependent = true;
    return out;
  }
  out.inverse = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  return out;
}

// Runs visit(A_local, B, block, candidate, id) over the plan, A_local indexing
// into B. A dependent B is reported once as an infinite candidate.
template <typename Visit>
Candidate run_pairs(const PairPlan& plan, const Eigen::MatrixXd& gram, const AnalysisConfig& cfg,
                    std::uint64_t stream, Visit&& visit) {
  if (plan.exact) {
    std::vector<Candidate> parts(plan.b_count);
    parallel_for(plan.b_count, cfg.threads, [&](std::size_t rank) {
      const Support b = unrank_combination(rank, plan.n, plan.d);
      const GramBlock block = gram_block(gram, b);
      if (block.dependent) {
        offer(parts[rank], kInf, b, b);
        return;
      }
      for (int a = 1; a <= plan.k; ++a) {
        Support a_loc(a);
        for (int i = 0; i < a; ++i) a_loc[i] = i;
        do {
          visit(a_loc, b, block, parts[rank], rank);
        } while (next_combination(a_loc, plan.d));
      }
    });
    return reduce(parts);
  }
  std::vector<Candidate> parts(plan.samples);
  parallel_for(plan.samples, cfg.threads, [&](std::size_t s) {
    Rng rng = make_rng(cfg.seed, "support-sample", stream * 1'000'003ULL + s);
    const Support b = random_subset(plan.n, plan.d, rng);
    std::uniform_int_distribution<int> size(1, plan.k);
    const Support a_loc = random_subset(plan.d, size(rng), rng);
    const GramBlock block = gram_block(gram, b);
    if (block.dependent) {
      offer(parts[s], kInf, gather(b, a_loc), b);
      return;
    }
    visit(a_loc, b, block, parts[s], s);
  });
  return reduce(parts);
}

std::uint64_t checked_size(const Dictionary& dict, int K, int D) {
  if (K < 1) throw DomainError("sparsity K must be at least 1");
  if (D < K) throw DomainError("depth D must be at least K");
  if (K > dict.size()) throw DomainError("sparsity K exceeds dictionary size");
  return static_cast<std::uint64_t>(dict.size());
}

// min ‖Σ_B cᵢgᵢ‖_p subject to Σ_A εᵢcᵢ = 1, as a Chebyshev projection (A = first entries).
double constrained_min_norm(const Dictionary& dict, const Support& a, const Support& rest, const Eigen::VectorXd& eps,
                            const ChebyshevConfig& solver) {
  const Eigen::Index n = dict.dim();
  const auto ka = static_cast<Eigen::Index>(a.size());
  const auto kr = static_cast<Eigen::Index>(rest.size());
  const auto pivot = dict.element(a[0]);
  const FunctionVector target = eps[0] * pivot;
  Eigen::MatrixXd span(n, ka - 1 + kr);
  for (Eigen::Index i = 1; i < ka; ++i) span.col(i - 1) = -(dict.element(a[i]) - eps[i] * eps[0] * pivot);
  for (Eigen::Index j = 0; j < kr; ++j) span.col(ka - 1 + j) = -dict.element(rest[j]);
  return chebyshev_project(dict.space(), target, span, solver).residual_norm;
}

Support complement_in(const Support& b, const Support& a_loc) {
  Support out;
  std::size_t next = 0;
  for (int i = 0; i < static_cast<int>(b.size()); ++i) {
    if (next < a_loc.size() && a_loc[next] == i)
      ++next;
    else
      out.push_back(b[i]);
  }
  return out;
}

// Multi-start projected ascent of a scale-invariant ratio over the unit sphere.
// eval(c, grad) returns log(ratio) and fills the gradient of log(ratio).
template <typename Eval>
double multistart_ascent(Eigen::Index dim, int starts, int iters, Rng& rng, Eval&& eval) {
  std::normal_distribution<double> gauss;
  double best = -kInf;
  Eigen::VectorXd grad(dim), trial_grad(dim);
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd c(dim);
    if (s == 0)
      c.setOnes();
    else
      for (Eigen::Index i = 0; i < dim; ++i) c[i] = gauss(rng);
    c.normalize();
    double value = eval(c, grad);
    double step = 0.5;
    for (int it = 0; it < iters && std::isfinite(value); ++it) {
      const Eigen::VectorXd tangent = grad - grad.dot(c) * c;
      if (tangent.norm() < 1e-12 || step < 1e-12) break;
      const Eigen::VectorXd trial = (c + step * tangent).normalized();
      const double tv = eval(trial, trial_grad);
      if (tv > value) {
        c = trial;
        value = tv;
        grad = trial_grad;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
    best = std::max(best, value);
  }
  return std::exp(best);
}

}  // namespace

const char* to_string(Method method) { return method == Method::exact ? "exact" : "sampled"; }

bool ConstantEstimate::infinite() const noexcept { return std::isinf(value); }

double coherence(const Dictionary& dict) {
  if (dict.size() < 2) throw DomainError("coherence needs at least two elements");
  const Eigen::MatrixXd gram = dict.gram();
  const Eigen::VectorXd d = gram.diagonal().cwiseSqrt();
  double mu = 0.0;
  for (Eigen::Index i = 0; i < gram.rows(); ++i)
    for (Eigen::Index j = i + 1; j < gram.cols(); ++j) mu = std::max(mu, std::abs(gram(i, j)) / (d[i] * d[j]));
  return std::min(mu, 1.0);
}

ConstantEstimate rip_delta(const Dictionary& dict, int s, const AnalysisConfig& cfg) {
  if (s < 1) throw DomainError("RIP sparsity must be at least 1");
  if (s > dict.size()) throw DomainError("RIP sparsity exceeds dictionary size");
  const int n = static_cast<int>(dict.size());
  const Eigen::MatrixXd gram = dict.gram();
  auto value = [&](const Support& sup) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub_matrix(gram, sup), Eigen::EigenvaluesOnly);
    return std::max(1.0 - es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff() - 1.0);
  };
  const std::uint64_t total = binomial_capped(n, s, cfg.cap);
  if (total <= cfg.cap) {
    constexpr std::size_t chunk = 1024;
    std::vector<Candidate> parts((total + chunk - 1) / chunk);
    parallel_for(parts.size(), cfg.threads, [&](std::size_t c) {
      Support sup = unrank_combination(c * chunk, n, s);
      for (std::uint64_t r = c * chunk; r < std::min<std::uint64_t>(total, (c + 1) * chunk); ++r) {
        offer(parts[c], value(sup), sup, {});
        next_combination(sup, n);
      }
    });
    return finish(reduce(parts), Method::exact, 0);
  }
  std::vector<Candidate> parts(cfg.samples);
  parallel_for(cfg.samples, cfg.threads, [&](std::size_t i) {
    Rng rng = make_rng(cfg.seed, "rip-sample", static_cast<std::uint64_t>(s) * 1'000'003ULL + i);
    const Support sup = random_subset(n, s, rng);
    offer(parts[i], value(sup), sup, {});
  });
  return finish(reduce(parts), Method::sampled, cfg.seed);
}

double riesz_U_from_delta(double delta) {
  if (!(delta >= 0.0) || delta >= 1.0) throw DomainError("Riesz parameter delta must lie in [0, 1)");
  return std::sqrt((1.0 + delta) / (1.0 - delta));
}

ConstantEstimate ell1_incoherence_V(const Dictionary& dict, int K, int D, double r, const AnalysisConfig& cfg) {
  const auto n = static_cast<int>(checked_size(dict, K, D));
  if (!(r > 0.0 && r <= 1.0)) throw DomainError("exponent r must lie in (0, 1]");
  const int d = std::min(D, n);
  const PairPlan plan = plan_pairs(n, K, d, cfg);
  const Eigen::MatrixXd gram = dict.gram();
  const bool hilbert = dict.space().p() == 2.0;
  std::atomic<bool> sampled_signs{false};
  ChebyshevConfig solver;
  solver.kkt_tol = cfg.kkt_tol;

  const Candidate best = run_pairs(plan, gram, cfg, 3, [&](const Support& a_loc, const Support& b,
                                                           const GramBlock& block, Candidate& cand, std::uint64_t id) {
    const Support a = gather(b, a_loc);
    const double scale = std::pow(static_cast<double>(a.size()), -r);
    bool local_sampled = false;
    double ratio = 0.0;
    if (hilbert) {
      Eigen::MatrixXd p(a.size(), a.size());
      for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) p(i, j) = block.inverse(a_loc[i], a_loc[j]);
      ratio = std::sqrt(max_sign_quadratic(p, cfg.max_sign_bits, substream_seed(cfg.seed, "signs", id),
                                           local_sampled));
    } else {
      const Support rest = complement_in(b, a_loc);
      for (const auto& eps : sign_patterns(static_cast<int>(a.size()), cfg.max_sign_bits,
                                           substream_seed(cfg.seed, "signs", id), local_sampled))
        ratio = std::max(ratio, 1.0 / constrained_min_norm(dict, a, rest, eps, solver));
    }
    if (local_sampled) sampled_signs = true;
    offer(cand, scale * ratio, a, b);
  });
  const bool sampled = !plan.exact || sampled_signs;
  return finish(best, sampled ? Method::sampled : Method::exact, sampled ? cfg.seed : 0);
}

ConstantEstimate nikolskii_C1(const Dictionary& dict, int K, double r, const AnalysisConfig& cfg) {
  const auto n = static_cast<int>(checked_size(dict, K, K));
  if (!(r > 0.0 && r <= 1.0)) throw DomainError("exponent r must lie in (0, 1]");
  const Eigen::MatrixXd gram = dict.gram();
  const bool hilbert = dict.space().p() == 2.0;
  ChebyshevConfig solver;
  solver.kkt_tol = cfg.kkt_tol;
  std::vector<Support> supports;
  bool sampled = false;
  std::uint64_t total = 0;
  for (int a = 1; a <= K; ++a) total += binomial_capped(n, a, cfg.cap);
  if (total <= cfg.cap) {
    for (int a = 1; a <= K; ++a) {
      Support s(a);
      for (int i = 0; i < a; ++i) s[i] = i;
      do supports.push_back(s);
      while (next_combination(s, n));
    }
  } else {
    sampled = true;
    for (std::size_t i = 0; i < cfg.samples; ++i) {
      Rng rng = make_rng(cfg.seed, "nikolskii-sample", i);
      std::uniform_int_distribution<int> size(1, K);
      supports.push_back(random_subset(n, size(rng), rng));
    }
  }
  std::vector<Candidate> parts(supports.size());
  std::vector<char> sign_sampled(supports.size(), 0);
  parallel_for(supports.size(), cfg.threads, [&](std::size_t i) {
    const Support& a = supports[i];
    const GramBlock block = gram_block(gram, a);
    if (block.dependent) {
      offer(parts[i], kInf, a, {});
      return;
    }
    bool local_sampled = false;
    double ratio = 0.0;
    if (hilbert) {
      ratio = std::sqrt(max_sign_quadratic(block.inverse, cfg.max_sign_bits, substream_seed(cfg.seed, "signs", i),
                                           local_sampled));
    } else {
      for (const auto& eps : sign_patterns(static_cast<int>(a.size()), cfg.max_sign_bits,
                                           substream_seed(cfg.seed, "signs", i), local_sampled))
        ratio = std::max(ratio, 1.0 / constrained_min_norm(dict, a, {}, eps, solver));
    }
    sign_sampled[i] = local_sampled;
    offer(parts[i], std::pow(static_cast<double>(a.size()), -r) * ratio, a, {});
  });
  sampled = sampled || std::any_of(sign_sampled.begin(), sign_sampled.end(), [](char c) { return c != 0; });
  return finish(reduce(parts), sampled ? Method::sampled : Method::exact, sampled ? cfg.seed : 0);
}

ConstantEstimate unconditionality_U(const Dictionary& dict, int K, int D, const AnalysisConfig& cfg) {
  const auto n = static_cast<int>(checked_size(dict, K, D));
  const int d = std::min(D, n);
  const Eigen::MatrixXd gram = dict.gram();
  if (dict.space().p() == 2.0) {
    const PairPlan plan = plan_pairs(n, K, d, cfg);
    const Candidate best = run_pairs(plan, gram, cfg, 5, [&](const Support& a_loc, const Support& b,
                                                             const GramBlock& block, Candidate& cand, std::uint64_t) {
      const Support a = gather(b, a_loc);
      // U² = λ_max(Lᵀ (M⁻¹)_AA L) with L Lᵀ = M_AA
      const auto ka = static_cast<Eigen::Index>(a.size());
      Eigen::MatrixXd p(ka, ka), maa(ka, ka);
      for (Eigen::Index i = 0; i < ka; ++i)
        for (Eigen::Index j = 0; j < ka; ++j) {
          p(i, j) = block.inverse(a_loc[i], a_loc[j]);
          maa(i, j) = block.m(a_loc[i], a_loc[j]);
        }
      const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(maa).matrixL();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l.transpose() * p * l, Eigen::EigenvaluesOnly);
      offer(cand, std::sqrt(std::max(1.0, es.eigenvalues().maxCoeff())), a, b);
    });
    return finish(best, plan.exact ? Method::exact : Method::sampled, plan.exact ? 0 : cfg.seed);
  }

  // general p: ascent of ‖f_A‖ / dist(f_A, span Λ) on sampled supports
  ChebyshevConfig solver;
  solver.kkt_tol = cfg.kkt_tol;
  const GridSpace& space = dict.space();
  std::vector<Candidate> parts(cfg.ascent_supports);
  parallel_for(cfg.ascent_supports, cfg.threads, [&](std::size_t s) {
    Rng rng = make_rng(cfg.seed, "unconditionality-ascent", s);
    const Support b = random_subset(n, d, rng);
    std::uniform_int_distribution<int> size(1, std::min(K, d));
    const Support a_loc = random_subset(d, size(rng), rng);
    const Support a = gather(b, a_loc);
    if (gram_block(gram, b).dependent) {
      offer(parts[s], kInf, a, b);
      return;
    }
    const Support rest = complement_in(b, a_loc);
    if (rest.empty()) {
      offer(parts[s], 1.0, a, b);
      return;
    }
    const Eigen::MatrixXd ga = dict.columns(a), gl = dict.columns(rest);
    const double v = multistart_ascent(ga.cols(), cfg.ascent_starts, cfg.ascent_iters, rng,
                                       [&](const Eigen::VectorXd& c, Eigen::VectorXd& grad) {
                                         const FunctionVector fa = ga * c;
                                         const double num = norm(space, fa);
                                         const Projection proj = chebyshev_project(space, fa, gl, solver);
                                         grad = ga.transpose() * norming_dual(space, fa) / num -
                                                ga.transpose() * norming_dual(space, proj.residual) /
                                                    proj.residual_norm;
                                         return std::log(num) - std::log(proj.residual_norm);
                                       });
    offer(parts[s], std::max(1.0, v), a, b);
  });
  return finish(reduce(parts), Method::sampled, cfg.seed);
}

namespace {

// Smallest B with ‖E1 c‖ ≤ B‖E2 c‖ on supports of size ≤ D, norms of `space`.
ConstantEstimate domination(const GridSpace& space, const Eigen::MatrixXd& e1, const Eigen::MatrixXd& e2, int D,
                            const AnalysisConfig& cfg) {
  if (e1.cols() != e2.cols()) throw StructuralError("domination needs index-aligned dictionaries of equal size");
  if (e1.rows() != e2.rows()) throw StructuralError("domination needs dictionaries over the same grid");
  space.require_dim(e1.rows(), "domination");
  if (D < 1) throw DomainError("depth D must be at least 1");
  const int n = static_cast<int>(e1.cols());
  const int d = std::min(D, n);
  const Eigen::VectorXd sqrt_w = space.weights().cwiseSqrt();
  const Eigen::MatrixXd s1 = sqrt_w.asDiagonal() * e1;
  const Eigen::MatrixXd s2 = sqrt_w.asDiagonal() * e2;
  const Eigen::MatrixXd m1 = s1.transpose() * s1, m2 = s2.transpose() * s2;

  if (space.p() == 2.0) {
    const std::uint64_t total = binomial_capped(n, d, cfg.cap);
    const bool exact = total <= cfg.cap;
    const std::size_t count = exact ? total : cfg.samples;
    std::vector<Candidate> parts(count);
    parallel_for(count, cfg.threads, [&](std::size_t i) {
      Support lam;
      if (exact) {
        lam = unrank_combination(i, n, d);
      } else {
        Rng rng = make_rng(cfg.seed, "domination-sample", i);
        lam = random_subset(n, d, rng);
      }
      const Eigen::MatrixXd b2 = sub_matrix(m2, lam);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> check(b2, Eigen::EigenvaluesOnly);
      if (singular(check.eigenvalues())) {
        offer(parts[i], kInf, lam, {});
        return;
      }
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(sub_matrix(m1, lam), b2, Eigen::EigenvaluesOnly);
      offer(parts[i], std::sqrt(std::max(0.0, ges.eigenvalues().maxCoeff())), lam, {});
    });
    return finish(reduce(parts), exact ? Method::exact : Method::sampled, exact ? 0 : cfg.seed);
  }

  std::vector<Candidate> parts(cfg.ascent_supports);
  parallel_for(cfg.ascent_supports, cfg.threads, [&](std::size_t s) {
    Rng rng = make_rng(cfg.seed, "domination-ascent", s);
    const Support lam = random_subset(n, d, rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> check(sub_matrix(m2, lam), Eigen::EigenvaluesOnly);
    if (singular(check.eigenvalues())) {
      offer(parts[s], kInf, lam, {});
      return;
    }
    Eigen::MatrixXd g1(e1.rows(), d), g2(e2.rows(), d);
    for (int j = 0; j < d; ++j) {
      g1.col(j) = e1.col(lam[j]);
      g2.col(j) = e2.col(lam[j]);
    }
    const double v = multistart_ascent(g1.cols(), cfg.ascent_starts, cfg.ascent_iters, rng,
                                       [&](const Eigen::VectorXd& c, Eigen::VectorXd& grad) {
                                         const FunctionVector x1 = g1 * c, x2 = g2 * c;
                                         const double n1 = norm(space, x1), n2 = norm(space, x2);
                                         grad = g1.transpose() * norming_dual(space, x1) / n1 -
                                                g2.transpose() * norming_dual(space, x2) / n2;
                                         return std::log(n1) - std::log(n2);
                                       });
    offer(parts[s], v, lam, {});
  });
  return finish(reduce(parts), Method::sampled, cfg.seed);
}

}  // namespace

ConstantEstimate check_domination(const Dictionary& d1, const Dictionary& d2, int D, const AnalysisConfig& cfg) {
  return domination(d1.space(), d1.elements(), d2.elements(), D, cfg);
}

double transfer_nikolskii(double c1_of_d1, double domination) { return c1_of_d1 * domination; }
double transfer_ell1_incoherence(double v_of_d1, double domination) { return v_of_d1 * domination; }
double transfer_unconditionality(double u_of_d1, double e1, double e2) { return u_of_d1 * e2 / e1; }

Equivalence equivalence_constants(const Dictionary& d1, const Dictionary& d2, int D, const AnalysisConfig& cfg) {
  Equivalence eq;
  eq.lower = check_domination(d1, d2, D, cfg);
  eq.lower.value = 1.0 / eq.lower.value;
  // d2 ≤ E2·d1, measured in the same space as above
  eq.upper = domination(d1.space(), d2.elements(), d1.elements(), D, cfg);
  return eq;
}

PropertyReport analyze(const Dictionary& dict, const AnalysisRequest& request, const AnalysisConfig& cfg) {
  PropertyReport report;
  if (dict.size() >= 2) report.coherence = coherence(dict);
  for (int s : request.rip_sparsities) report.rip[s] = rip_delta(dict, s, cfg);
  for (int K : request.K) {
    if (request.nikolskii)
      for (double r : request.r) report.nikolskii[{K, r}] = nikolskii_C1(dict, K, r, cfg);
    for (int D : request.D) {
      if (D < K) continue;
      if (request.unconditionality) report.unconditionality[{K, D}] = unconditionality_U(dict, K, D, cfg);
      if (request.ell1_incoherence)
        for (double r : request.r) report.ell1_incoherence[{K, D, r}] = ell1_incoherence_V(dict, K, D, r, cfg);
    }
  }
  return report;
}

nlohmann::json to_json(const ConstantEstimate& c) {
  nlohmann::json j;
  if (c.infinite())
    j["value"] = "inf";
  else
    j["value"] = c.value;
  j["method"] = to_string(c.method);
  if (c.method == Method::sampled) j["seed"] = c.seed;
  j["witness_a"] = c.witness_a;
  if (!c.witness_b.empty()) j["witness_b"] = c.witness_b;
  return j;
}

nlohmann::json to_json(const PropertyReport& report) {
  nlohmann::json j;
  j["coherence"] = report.coherence;
  j["coherence_method"] = "exact";
  nlohmann::json rip = nlohmann::json::array();
  for (const auto& [s, c] : report.rip) {
    auto e = to_json(c);
    e["s"] = s;
    rip.push_back(std::move(e));
  }
  j["rip"] = std::move(rip);
  nlohmann::json u = nlohmann::json::array();
  for (const auto& [kd, c] : report.unconditionality) {
    auto e = to_json(c);
    e["K"] = kd.first;
    e["D"] = kd.second;
    u.push_back(std::move(e));
  }
  j["unconditionality"] = std::move(u);
  nlohmann::json c1 = nlohmann::json::array();
  for (const auto& [kr, c] : report.nikolskii) {
    auto e = to_json(c);
    e["K"] = kr.first;
    e["r"] = kr.second;
    c1.push_back(std::move(e));
  }
  j["nikolskii"] = std::move(c1);
  nlohmann::json v = nlohmann::json::array();
  for (const auto& [kdr, c] : report.ell1_incoherence) {
    auto e = to_json(c);
    e["K"] = std::get<0>(kdr);
    e["D"] = std::get<1>(kdr);
    e["r"] = std::get<2>(kdr);
    v.push_back(std::move(e));
  }
  j["ell1_incoherence"] = std::move(v);
  return j;
}

}  // namespace sparsegreedy
