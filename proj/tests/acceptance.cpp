// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sparsegreedy/analysis.hpp"
#include "sparsegreedy/bilinear.hpp"
#include "sparsegreedy/combinatorics.hpp"
#include "sparsegreedy/greedy.hpp"
#include "sparsegreedy/harness.hpp"
#include "sparsegreedy/oracle.hpp"
#include "sparsegreedy/random.hpp"

using namespace sparsegreedy;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Planted {
  FunctionVector f0;
  std::vector<int> support;
};

Planted plant(const Dictionary& d, int K, std::uint64_t seed) {
  Rng rng = make_rng(seed, "support");
  Rng coef = make_rng(seed, "coefficients");
  std::vector<int> all(static_cast<std::size_t>(d.size()));
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  Planted p;
  p.support.assign(all.begin(), all.begin() + K);
  std::sort(p.support.begin(), p.support.end());
  std::uniform_real_distribution<double> mag(0.1, 1.0);
  std::bernoulli_distribution sign;
  SparseRepresentation rep;
  for (int i : p.support) rep.set(i, (sign(coef) ? -1.0 : 1.0) * mag(coef));
  p.f0 = synthesize(d, rep);
  return p;
}

FunctionVector gaussian_vector(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g;
  FunctionVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

bool contains_all(const std::vector<int>& selected, const std::vector<int>& support) {
  for (int i : support)
    if (std::find(selected.begin(), selected.end(), i) == selected.end()) return false;
  return true;
}

// ‖f_m‖ ≥ σ_m(f₀) − 1e−10 over every m the oracle can enumerate. For exact
// K-sparse targets σ_m = 0 when m ≥ K, which holds trivially.
struct FloorLedger {
  long checks = 0;
  long trivial = 0;
  long skipped = 0;
  long violations = 0;
  double worst = std::numeric_limits<double>::infinity();

  void check(const GreedyTrace& t, const FunctionVector& f0, const Dictionary& d, std::size_t K) {
    OracleConfig cfg;
    for (std::size_t m = 1; m < t.residual_norms.size(); ++m) {
      if (m >= K) {
        ++trivial;
        continue;
      }
      if (binomial_capped(static_cast<int>(d.size()), static_cast<int>(m), cfg.cap) > cfg.cap) {
        ++skipped;
        continue;
      }
      const double sigma = sigma_m_exact(f0, d, m, cfg).value;
      ++checks;
      const double slack = t.residual_norms[m] - sigma;
      worst = std::min(worst, slack);
      if (slack < -1e-10) ++violations;
    }
  }
};

FloorLedger floor_ledger;

// Sparse decay bound from every start k ≤ m; returns the smallest slack.
double decay_slack(const GreedyTrace& t, std::size_t m, std::size_t K, double V, double tweak, double p, double r) {
  DecayBoundInputs in;
  in.sparsity = K;
  in.r = r;
  in.smoothness = smoothness_constants(p);
  in.V = V;
  in.t = tweak;
  in.eps = 0.0;
  in.m = m;
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= m; ++k) {
    in.k = k;
    in.norm_fk = t.residual_at(k);
    slack = std::min(slack, sparse_decay_bound(in) - t.residual_at(m));
  }
  return slack;
}

// ---------------------------------------------------------------- criteria

Outcome hilbert_coincidence() {
  const auto t0 = Clock::now();
  const GridSpace s = GridSpace::uniform(32, 2.0);
  int mismatched = 0;
  double worst = 0.0;
  std::vector<std::pair<Planted, GreedyTrace>> runs;
  std::vector<Dictionary> dicts;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const std::uint64_t seed = substream_seed(1, "coincidence", i);
    const Dictionary d = build_gaussian(32, 64, substream_seed(seed, "dictionary"), s);
    const Planted p = plant(d, 3, seed);
    const GreedyTrace a = wcga(p.f0, d, {}, 12);
    const GreedyTrace b = womp(p.f0, d, {}, 12);
    if (a.selected != b.selected || a.residual_norms.size() != b.residual_norms.size()) {
      ++mismatched;
    } else {
      for (std::size_t k = 0; k < a.residual_norms.size(); ++k)
        worst = std::max(worst, std::abs(a.residual_norms[k] - b.residual_norms[k]));
    }
    runs.emplace_back(p, a);
    dicts.push_back(d);
  }
  const double secs = seconds_since(t0);
  for (std::size_t i = 0; i < runs.size(); ++i) floor_ledger.check(runs[i].second, runs[i].first.f0, dicts[i], 3);
  Outcome o;
  o.pass = mismatched == 0 && worst <= 1e-8 && secs < 10.0;
  o.detail = "100 instances, " + std::to_string(mismatched) + " selection mismatches, max |residual diff| " +
             fmt("%.3g", worst) + ", " + fmt("%.2f", secs) + " s (limit 10 s)";
  return o;
}

struct RecoveryRun {
  Dictionary dict;
  Planted target;
  GreedyTrace trace;
};

std::vector<RecoveryRun> recovery_runs(const WeaknessPolicy& policy, int* recovered, double* secs) {
  const auto t0 = Clock::now();
  const GridSpace s = GridSpace::uniform(64, 2.0);
  std::vector<RecoveryRun> out;
  *recovered = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const std::uint64_t seed = substream_seed(2, "recovery", i);
    Dictionary d = build_gaussian(64, 128, substream_seed(seed, "dictionary"), s);
    Planted p = plant(d, 4, seed);
    GreedyTrace t = womp(p.f0, d, policy, 16);
    const double fn = norm(s, p.f0);
    if (t.residual_norms.back() <= 1e-9 * fn && contains_all(t.selected, p.support)) ++*recovered;
    out.push_back({std::move(d), std::move(p), std::move(t)});
  }
  *secs = seconds_since(t0);
  return out;
}

Outcome exact_recovery() {
  int recovered = 0;
  double secs = 0.0;
  const auto runs = recovery_runs({}, &recovered, &secs);
  for (const auto& r : runs) floor_ledger.check(r.trace, r.target.f0, r.dict, 4);
  Outcome o;
  o.pass = recovered >= 95 && secs < 30.0;
  o.detail = std::to_string(recovered) + "/100 recovered (need 95), " + fmt("%.2f", secs) + " s (limit 30 s)";
  return o;
}

struct BoundTally {
  long pairs = 0;
  long violations = 0;
  long inexact = 0;
  double min_slack = std::numeric_limits<double>::infinity();
};

// Small dictionaries with exact V; every (target, m) pair is checked.
BoundTally decay_bound_runs(const WeaknessPolicy& policy, bool floor) {
  BoundTally tally;
  const double r = 0.5;
  std::uint64_t instance = 0;
  for (double p : {2.0, 3.0, 4.0, 1.5}) {
    for (int N : {8, 10, 12}) {
      for (int K : {1, 2, 3}) {
        const std::uint64_t seed = substream_seed(3, "decay", instance++);
        const GridSpace s = GridSpace::uniform(N + 4, p);
        const Dictionary d = build_gaussian(N + 4, N, substream_seed(seed, "dictionary"), s);
        const int max_m = N - K;
        const int depth = std::min(N, K + max_m);
        AnalysisConfig acfg;
        const ConstantEstimate V = ell1_incoherence_V(d, K, depth, r, acfg);
        if (V.method != Method::exact) ++tally.inexact;
        for (std::uint64_t j = 0; j < 3; ++j) {
          const Planted target = plant(d, K, substream_seed(seed, "target", j));
          const GreedyTrace t = wcga(target.f0, d, policy, static_cast<std::size_t>(max_m));
          if (floor) floor_ledger.check(t, target.f0, d, static_cast<std::size_t>(K));
          for (int m = 1; m <= max_m; ++m) {
            const double slack = decay_slack(t, static_cast<std::size_t>(m), static_cast<std::size_t>(K), V.value,
                                             policy.t, p, r);
            ++tally.pairs;
            tally.min_slack = std::min(tally.min_slack, slack);
            if (slack < -1e-8) ++tally.violations;
          }
        }
      }
    }
  }
  return tally;
}

Outcome decay_bound() {
  const BoundTally b = decay_bound_runs({}, true);
  Outcome o;
  o.pass = b.pairs >= 200 && b.violations == 0 && b.inexact == 0;
  o.detail = std::to_string(b.pairs) + " (instance, m) pairs over p in {2,3,4,1.5}, " + std::to_string(b.violations) +
             " violations, min slack " + fmt("%.3g", b.min_slack) +
             (b.inexact ? ", " + std::to_string(b.inexact) + " instances without exact V" : std::string());
  return o;
}

Outcome oracle_floor() {
  const FloorLedger& f = floor_ledger;
  Outcome o;
  o.pass = f.violations == 0 && f.checks > 0;
  o.detail = std::to_string(f.checks) + " oracle comparisons, " + std::to_string(f.violations) + " below sigma_m, " +
             std::to_string(f.trivial) + " trivial (m >= K), " + std::to_string(f.skipped) +
             " beyond the cap; min slack " + fmt("%.3g", f.worst);
  return o;
}

Outcome orthonormal_optimality() {
  const GridSpace trig_space = GridSpace::tensor_grid(1, 15, 2.0);
  const GridSpace haar_space = GridSpace::tensor_grid(1, 16, 2.0);
  const std::vector<std::pair<std::string, Dictionary>> dicts = {
      {"trigonometric", build_trigonometric(1, 7, trig_space)}, {"haar", build_haar(4, 1, haar_space)}};
  double worst = 0.0;
  for (const auto& [name, d] : dicts) {
    for (std::uint64_t i = 0; i < 50; ++i) {
      const FunctionVector f = gaussian_vector(d.dim(), substream_seed(5, name, i));
      const GreedyTrace thr = tga(f, d, 6);
      const GreedyTrace omp = womp(f, d, {}, 6);
      for (std::size_t m = 0; m <= 6; ++m) {
        const double sigma = sigma_m_exact(f, d, m).value;
        const double a = thr.residual_at(m), b = omp.residual_at(m);
        worst = std::max({worst, std::abs(a - sigma), std::abs(b - sigma), std::abs(a - b)});
      }
    }
  }
  Outcome o;
  o.pass = worst <= 1e-10;
  o.detail = "trigonometric (N=15) and Haar (N=16), 50 targets each, m <= 6: max disagreement " + fmt("%.3g", worst);
  return o;
}

Outcome constant_chain() {
  int instances = 0, failures = 0, inexact = 0, riesz_checked = 0;
  double worst = -std::numeric_limits<double>::infinity();
  const double r = 0.5;
  for (std::uint64_t i = 0; i < 30; ++i) {
    // tall enough that δ_D < 1, where the Riesz bound applies
    const Eigen::Index n = 32 + 4 * static_cast<Eigen::Index>(i % 5);
    const Eigen::Index N = 6 + static_cast<Eigen::Index>(i % 4);
    const int K = 1 + static_cast<int>(i % 2);
    const int D = K + 1 + static_cast<int>(i % 3 == 0);
    const Dictionary d = build_gaussian(n, N, substream_seed(6, "chain", i), GridSpace::uniform(n, 2.0));
    const ConstantEstimate c1 = nikolskii_C1(d, K, r);
    const ConstantEstimate v = ell1_incoherence_V(d, K, D, r);
    const ConstantEstimate u = unconditionality_U(d, K, D);
    const ConstantEstimate delta = rip_delta(d, D);
    ++instances;
    if (c1.method != Method::exact || v.method != Method::exact || u.method != Method::exact ||
        delta.method != Method::exact) {
      ++inexact;
      continue;
    }
    const double kr = std::pow(static_cast<double>(K), r);
    std::vector<double> gaps = {c1.value - v.value, u.value - v.value * kr, v.value - c1.value * u.value};
    if (delta.value < 1.0) {
      ++riesz_checked;
      gaps.push_back(u.value - riesz_U_from_delta(delta.value));
    }
    for (double g : gaps) {
      worst = std::max(worst, g);
      if (g > 1e-8) ++failures;
    }
  }
  Outcome o;
  o.pass = failures == 0 && inexact == 0 && riesz_checked == instances;
  o.detail = std::to_string(instances) + " exact p=2 instances, " + std::to_string(failures) +
             " failed inequalities, Riesz bound applicable on " + std::to_string(riesz_checked) +
             ", largest gap (lhs - rhs) " + fmt("%.3g", worst) +
             (inexact ? ", " + std::to_string(inexact) + " not exact" : std::string());
  return o;
}

Outcome modulus_bound() {
  int failures = 0;
  double worst = -std::numeric_limits<double>::infinity();
  std::uint64_t k = 0;
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const GridSpace s = GridSpace::uniform(16, p);
    const SmoothnessConstants sc = smoothness_constants(p);
    for (double u : {0.01, 0.1, 0.5, 1.0}) {
      const double est = estimate_modulus(s, u, 10'000, substream_seed(7, "modulus", k++));
      const double gap = est - sc.gamma * std::pow(u, sc.q);
      worst = std::max(worst, gap);
      if (gap > 1e-9) ++failures;
    }
  }
  Outcome o;
  o.pass = failures == 0;
  o.detail = "16 (p, u) cells x 10000 pairs, " + std::to_string(failures) + " above gamma u^q, max excess " +
             fmt("%.3g", worst);
  return o;
}

Outcome schmidt_equivalence() {
  double worst = 0.0;
  Rng dims = make_rng(8, "dims");
  std::uniform_int_distribution<int> size(1, 16);
  for (std::uint64_t i = 0; i < 50; ++i) {
    const int r = size(dims), c = size(dims);
    Rng rng = make_rng(8, "matrix", i);
    std::normal_distribution<double> g;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < m.size(); ++j) m.data()[j] = g(rng);
    const Matrix2D f(m);
    const int depth = std::min(r, c);
    const RankOneApproximation a = greedy_rank_one(f, depth);
    for (int M = 0; M <= depth; ++M)
      worst = std::max(worst, std::abs(a.residual_norms[static_cast<std::size_t>(M)] - theta_M(f, M)));
  }
  Outcome o;
  o.pass = worst <= 1e-8;
  o.detail = "50 random matrices up to 16x16, every step M: max |greedy - theta_M| " + fmt("%.3g", worst);
  return o;
}

Outcome lebesgue_pipeline() {
  bool finite = true, reproducible = true, clean = true;
  std::size_t rows = 0;
  double max_ratio = 0.0;
  for (const char* model : {"sparse", "dense"}) {
    nlohmann::json j = nlohmann::json::parse(R"j({
      "kind": "lebesgue", "seed": 9, "trials": 10,
      "space": {"d": 1, "grid": 64, "p": 4},
      "dictionary": {"kind": "trigonometric", "params": {"max_freq": 8}},
      "signal": {"sparsity": [3], "noise": 0.05},
      "algorithm": {"name": "wcga"},
      "budget": "m*ceil(log(m+1))",
      "m_values": [1, 2, 3, 4]
    })j");
    j["signal"]["model"] = model;
    const ExperimentConfig cfg = ExperimentConfig::from_json(j);
    const ExperimentResult a = run_lebesgue(cfg, 1);
    const ExperimentResult b = run_lebesgue(cfg, 2);
    std::ostringstream ca, cb;
    a.table.write_csv(ca);
    b.table.write_csv(cb);
    reproducible = reproducible && ca.str() == cb.str() && a.summary.dump() == b.summary.dump();
    finite = finite && a.summary["all_ratios_finite"].get<bool>();
    clean = clean && a.violations.empty();
    rows += a.table.rows.size();
    for (const auto& m : a.summary["per_m"])
      if (m["max_ratio"].is_number()) max_ratio = std::max(max_ratio, m["max_ratio"].get<double>());
  }
  Outcome o;
  o.pass = finite && reproducible && clean;
  o.detail = std::to_string(rows) + " rows (sparse+noise and dense models), ratios " +
             (finite ? "all finite" : "NOT all finite") + ", max ratio " + fmt("%.4g", max_ratio) + ", " +
             (reproducible ? "byte-identical reruns" : "reruns DIFFER") +
             (clean ? "" : ", invariant violations reported");
  return o;
}

Outcome adversarial_soundness() {
  const WeaknessPolicy weak{0.5, SelectionMode::adversarial_weak};
  // criterion 2 instances: V at this size can only be sampled; a sampled V is
  // a lower bound, which makes the bound smaller, so passing remains sound
  int recovered = 0;
  double secs = 0.0;
  const auto runs = recovery_runs(weak, &recovered, &secs);
  long pairs = 0, violations = 0, sampled = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (const auto& run : runs) {
    AnalysisConfig acfg;
    acfg.samples = 400;
    const ConstantEstimate V = ell1_incoherence_V(run.dict, 4, 20, 0.5, acfg);
    if (V.method == Method::sampled) ++sampled;
    for (std::size_t m = 1; m < run.trace.residual_norms.size(); ++m) {
      const double slack = decay_slack(run.trace, m, 4, V.value, weak.t, 2.0, 0.5);
      ++pairs;
      min_slack = std::min(min_slack, slack);
      if (slack < -1e-8) ++violations;
    }
  }
  const BoundTally small = decay_bound_runs(weak, false);
  Outcome o;
  o.pass = violations == 0 && small.violations == 0 && small.inexact == 0;
  o.detail = "t=0.5 adversarial: recovery-size runs " + std::to_string(pairs) + " pairs, " +
             std::to_string(violations) + " violations (V sampled on " + std::to_string(sampled) +
             "), min slack " + fmt("%.3g", min_slack) + "; exact-V runs " + std::to_string(small.pairs) +
             " pairs, " + std::to_string(small.violations) + " violations, min slack " +
             fmt("%.3g", small.min_slack) + "; recovered " + std::to_string(recovered) + "/100 (informational)";
  return o;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> entries = {
      {1, "Hilbert coincidence of WCGA and WOMP", hilbert_coincidence},
      {2, "exact recovery, gaussian(64,128), K=4", exact_recovery},
      {3, "sparse decay bound with exact V", decay_bound},
      {4, "greedy never beats sigma_m", oracle_floor},
      {5, "orthonormal optimality of TGA and WOMP", orthonormal_optimality},
      {6, "dictionary constant implications", constant_chain},
      {7, "modulus of smoothness power bound", modulus_bound},
      {8, "greedy rank-one equals the SVD tail", schmidt_equivalence},
      {9, "Lebesgue ratio pipeline, trigonometric p=4", lebesgue_pipeline},
      {10, "adversarial weak selection at t=0.5", adversarial_soundness},
  };
  int failed = 0;
  for (const auto& e : entries) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o.pass = false;
      o.detail = std::string("exception: ") + ex.what();
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2d %s  %s: %s [%.2f s]\n", e.id, o.pass ? "PASS" : "FAIL", e.name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(entries.size()) - failed, entries.size());
  return failed == 0 ? 0 : 1;
}
