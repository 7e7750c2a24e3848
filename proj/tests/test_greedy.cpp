#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "sparsegreedy/errors.hpp"
#include "sparsegreedy/greedy.hpp"
#include "sparsegreedy/oracle.hpp"
#include "support.hpp"

using namespace sparsegreedy;
using sgtest::custom;
using sgtest::random_vector;
using sgtest::standard_basis;

namespace {

FunctionVector planted(const Dictionary& d, const std::vector<int>& support, Rng& rng) {
  std::uniform_real_distribution<double> mag(0.1, 1.0);
  std::bernoulli_distribution sign;
  SparseRepresentation rep;
  for (int i : support) rep.set(i, (sign(rng) ? 1.0 : -1.0) * mag(rng));
  return synthesize(d, rep);
}

std::vector<int> random_support(int n, int k, Rng& rng) {
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(k));
  std::sort(all.begin(), all.end());
  return all;
}

double objective(const GridSpace& s, const FunctionVector& r) {
  return (s.weights().array() * r.array().abs().pow(s.p())).sum();
}

// Residual of the greedy approximant before iteration m (1-based).
FunctionVector residual_before(const GreedyTrace& t, const Dictionary& d, const FunctionVector& f0, std::size_t m) {
  if (m == 1) return f0;
  const std::vector<int> sel(t.selected.begin(), t.selected.begin() + static_cast<long>(m - 1));
  return f0 - d.columns(sel) * t.coefficients[m - 2];
}

}  // namespace

TEST_CASE("thresholding keeps the largest coefficient of an orthonormal expansion") {
  const Dictionary b = standard_basis(2, 2.0);
  const FunctionVector f = 3.0 * b.element(0) + 1.0 * b.element(1);
  const GreedyTrace t = tga(f, b, 1);
  REQUIRE(t.selected.size() == 1);
  CHECK(t.selected[0] == 0);
  CHECK(t.residual_norms[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("thresholding with all nonzero terms leaves no residual") {
  Rng rng(5);
  const Dictionary b = standard_basis(6, 3.0);
  const FunctionVector f = planted(b, {1, 2, 4}, rng);
  const GreedyTrace t = tga(f, b, 3);
  CHECK(t.residual_norms.back() <= 1e-14 * t.residual_norms.front());
  CHECK(tga(f, b, 10).selected.size() == 6);
}

TEST_CASE("thresholding on the Haar basis attains the best m-term error") {
  const GridSpace s = GridSpace::tensor_grid(1, 16, 2.0);
  const Dictionary haar = build_haar(4, 1, s);
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const FunctionVector f = random_vector(16, rng);
    const GreedyTrace t = tga(f, haar, 6);
    for (std::size_t m = 0; m <= 6; ++m) {
      const double sigma = sigma_m_exact(f, haar, m).value;
      CHECK(std::abs(t.residual_norms[m] - sigma) <= 1e-10);
    }
  }
}

TEST_CASE("thresholding rejects non-bases") {
  Eigen::MatrixXd m(3, 3);
  m << 1, 0, 1, 0, 1, 1, 0, 0, 0;
  CHECK_THROWS_AS(tga(Eigen::Vector3d(1, 1, 0), custom(m, 2.0), 1), DomainError);
  Eigen::MatrixXd wide(2, 3);
  wide << 1, 0, 1, 0, 1, 1;
  CHECK_THROWS_AS(tga(Eigen::Vector2d(1, 1), custom(wide, 2.0), 1), DomainError);
}

TEST_CASE("Chebyshev and orthogonal greedy coincide in the Hilbert case") {
  const GridSpace s = GridSpace::uniform(32, 2.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dictionary d = build_gaussian(32, 64, seed, s);
    Rng rng(seed + 100);
    const FunctionVector f = planted(d, random_support(64, 3, rng), rng);
    const GreedyTrace a = wcga(f, d, {}, 12);
    const GreedyTrace b = womp(f, d, {}, 12);
    REQUIRE(a.selected == b.selected);
    for (std::size_t i = 0; i < a.residual_norms.size(); ++i)
      CHECK(std::abs(a.residual_norms[i] - b.residual_norms[i]) <= 1e-8);
  }
}

TEST_CASE("target in the span of one element stops after one step") {
  for (double p : {1.5, 2.0, 3.0}) {
    CAPTURE(p);
    const Dictionary d = build_gaussian(10, 15, 4, GridSpace::uniform(10, p));
    const FunctionVector f = 0.7 * d.element(3);
    const GreedyTrace t = wcga(f, d, {}, 5);
    REQUIRE(t.selected.size() == 1);
    CHECK(t.selected[0] == 3);
    CHECK(t.residual_norms[1] <= 1e-12);
    CHECK(t.termination == Termination::residual_tol);
  }
}

TEST_CASE("sparse targets in orthonormal systems are recovered in exactly K steps") {
  const GridSpace s = GridSpace::tensor_grid(1, 32, 2.0);
  const Dictionary trig = build_trigonometric(1, 8, s);
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 1 + trial % 5;
    const std::vector<int> support = random_support(static_cast<int>(trig.size()), k, rng);
    const FunctionVector f = planted(trig, support, rng);
    const GreedyTrace t = wcga(f, trig, {}, static_cast<std::size_t>(trig.size()));
    REQUIRE(t.selected.size() == static_cast<std::size_t>(k));
    std::vector<int> sel = t.selected;
    std::sort(sel.begin(), sel.end());
    CHECK(sel == support);
    CHECK(t.residual_norms.back() <= 1e-10 * t.residual_norms.front());
    // each scan maximizer was a support element, checked by rescanning
    for (std::size_t m = 1; m <= t.selected.size(); ++m) {
      const FunctionVector r = residual_before(t, trig, f, m);
      Eigen::Index arg = 0;
      const double best = (trig.elements().transpose() * norming_dual(s, r)).cwiseAbs().maxCoeff(&arg);
      CHECK(best > 0.0);
      CHECK(std::binary_search(support.begin(), support.end(), static_cast<int>(arg)));
    }
  }
}

TEST_CASE("orthogonal greedy matches thresholding on orthonormal bases") {
  const Dictionary b = build_haar(3, 1, GridSpace::tensor_grid(1, 8, 2.0));
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const FunctionVector f = random_vector(8, rng);
    const GreedyTrace a = womp(f, b, {}, 5);
    const GreedyTrace c = tga(f, b, 5);
    CHECK(a.selected == c.selected);
    for (std::size_t m = 0; m <= 5; ++m) CHECK(std::abs(a.residual_norms[m] - c.residual_norms[m]) <= 1e-12);
  }
}

TEST_CASE("numerically dependent picks are skipped and excluded from the span") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 2);
  m(0, 0) = 1.0;
  m(0, 1) = 1.0;
  m(1, 1) = 1e-13;
  const Dictionary d = custom(m, 2.0);
  FunctionVector f(3);
  f << 1.0, 1.0, 0.5;
  for (bool hilbert : {true, false}) {
    const GreedyTrace t = hilbert ? womp(f, d, {}, 2) : wcga(f, d, {}, 2);
    CHECK(t.selected.size() == 1);
    CHECK(t.skipped.size() == 1);
    CHECK(t.termination == Termination::zero_functionals);
    CHECK(t.residual_norms.back() > 0.1);
  }
}

TEST_CASE("one-dimensional projections match a golden-section line search") {
  Rng rng(31);
  for (double p : {1.5, 3.0, 4.0}) {
    const GridSpace s = GridSpace::uniform(20, p);
    for (int trial = 0; trial < 10; ++trial) {
      const FunctionVector f = random_vector(20, rng);
      const FunctionVector g = random_vector(20, rng);
      Eigen::MatrixXd span(20, 1);
      span.col(0) = g;
      const Projection proj = chebyshev_project(s, f, span);
      // golden section resolves the flat minimum only to ~sqrt(eps); refine by bisecting the
      // monotone derivative Σ w |f − xg|^{p−1} sign(f − xg) g inside its bracket
      const double coarse = sgtest::golden_section(
          [&](double x) { return sgtest::plain_norm(s.weights(), f - x * g, p); }, -20.0, 20.0);
      auto slope = [&](double x) {
        const Eigen::ArrayXd r = (f - x * g).array();
        return -(s.weights().array() * r.abs().pow(p - 1.0) * r.sign() * g.array()).sum();
      };
      double lo = coarse - 1e-4, hi = coarse + 1e-4;
      REQUIRE(slope(lo) < 0.0);
      REQUIRE(slope(hi) > 0.0);
      for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (slope(mid) < 0.0 ? lo : hi) = mid;
      }
      const double c = 0.5 * (lo + hi);
      CHECK(std::abs(coarse - c) <= 1e-6 * std::max(1.0, std::abs(c)));
      CAPTURE(p);
      CHECK(std::abs(proj.coefficients[0] - c) <= 1e-8);
      CHECK(proj.residual_norm == doctest::Approx(sgtest::plain_norm(s.weights(), f - c * g, p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("Hilbert projections leave residuals orthogonal to the span") {
  Rng rng(3);
  Eigen::VectorXd w = random_vector(30, rng).cwiseAbs().array() + 0.1;
  w /= w.sum();
  const GridSpace s(w, 2.0);
  const FunctionVector f = random_vector(30, rng);
  Eigen::MatrixXd span(30, 6);
  for (int j = 0; j < 6; ++j) span.col(j) = random_vector(30, rng);
  const Projection proj = chebyshev_project(s, f, span);
  CHECK((span.transpose() * w.asDiagonal() * proj.residual).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(proj.kkt <= 1e-10);
}

TEST_CASE("targets inside the span project to zero residual for any p") {
  Rng rng(4);
  for (double p : {1.2, 1.5, 2.0, 3.0, 7.0}) {
    const GridSpace s = GridSpace::uniform(15, p);
    Eigen::MatrixXd span(15, 3);
    for (int j = 0; j < 3; ++j) span.col(j) = random_vector(15, rng);
    const FunctionVector f = span * Eigen::Vector3d(0.3, -1.0, 2.0);
    const Projection proj = chebyshev_project(s, f, span);
    CAPTURE(p);
    CHECK(proj.residual_norm <= 1e-12 * norm(s, f));
    CHECK((proj.coefficients - Eigen::Vector3d(0.3, -1.0, 2.0)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("certified projections are minimizers under random perturbations") {
  Rng rng(77);
  std::normal_distribution<double> g;
  for (double p : {1.5, 1.8, 2.5, 3.0, 4.0, 6.0}) {
    for (int trial = 0; trial < 15; ++trial) {
      const Eigen::Index n = 10 + trial * 3, k = 1 + trial % 6;
      const GridSpace s = GridSpace::uniform(n, p);
      const FunctionVector f = random_vector(n, rng);
      Eigen::MatrixXd span(n, k);
      for (Eigen::Index j = 0; j < k; ++j) span.col(j) = random_vector(n, rng);
      const Projection proj = chebyshev_project(s, f, span);
      CAPTURE(p);
      CAPTURE(trial);
      CHECK(proj.kkt <= 1e-10);
      CHECK((proj.residual - (f - span * proj.coefficients)).cwiseAbs().maxCoeff() <= 1e-12 * f.cwiseAbs().maxCoeff());
      const double base = objective(s, proj.residual);
      for (int probe = 0; probe < 20; ++probe) {
        Eigen::VectorXd dc(k);
        for (Eigen::Index j = 0; j < k; ++j) dc[j] = g(rng);
        dc *= 1e-4 / dc.norm();
        CHECK(objective(s, f - span * (proj.coefficients + dc)) >= base * (1.0 - 1e-12));
      }
    }
  }
}

TEST_CASE("solver budget exhaustion reports the last iterate") {
  Rng rng(9);
  const GridSpace s = GridSpace::uniform(40, 6.0);
  const FunctionVector f = random_vector(40, rng);
  Eigen::MatrixXd span(40, 4);
  for (int j = 0; j < 4; ++j) span.col(j) = random_vector(40, rng);
  ChebyshevConfig cfg;
  cfg.max_iters = 1;
  cfg.kkt_tol = 1e-15;
  try {
    (void)chebyshev_project(s, f, span, cfg);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_iterate().size() == 4);
    CHECK(e.gradient_norm() > 0.0);
  }
}

TEST_CASE("decay constant and bound evaluation") {
  CHECK(decay_constant({2.0, 1.0, 2.0}, 1.0, 1.0) == doctest::Approx(1.0 / 32.0).epsilon(1e-15));
  const SmoothnessConstants sc = smoothness_constants(3.0);
  // hand evaluation of t^{q'} / (2 (16γ)^{1/(q-1)} V^{q'}) at q=2, γ=1, V=1.5, t=0.5
  CHECK(decay_constant(sc, 1.5, 0.5) == doctest::Approx(0.25 / (2.0 * 16.0 * 2.25)).epsilon(1e-14));

  DecayBoundInputs in;
  in.norm_fk = 2.0;
  in.k = 3;
  in.m = 3;
  in.eps = 0.25;
  CHECK(sparse_decay_bound(in) == doctest::Approx(2.5));
  in.eps = 0.0;
  double prev = sparse_decay_bound(in);
  for (std::size_t m = 4; m < 2000; m += 50) {
    in.m = m;
    const double b = sparse_decay_bound(in);
    CHECK(b < prev);
    prev = b;
  }
  in.m = 100000;
  CHECK(sparse_decay_bound(in) < 1e-12);
  in.m = 2;
  CHECK_THROWS_AS(sparse_decay_bound(in), DomainError);
}

TEST_CASE("convex-hull rate bound branches") {
  const SmoothnessConstants sc{2.0, 0.5, 2.0};
  CHECK(hull_rate_bound(10, 1.0, 5.0, sc, 1.0).configured == doctest::Approx(10.0));
  const double a = hull_rate_bound(3, 2.0, 0.0, sc, 1.0).shape_only;
  const double b = hull_rate_bound(15, 2.0, 0.0, sc, 1.0).shape_only;
  CHECK(a / b == doctest::Approx(2.0));
  CHECK(hull_rate_bound(0, 0.7, 0.0, sc, 1.0).shape_only == doctest::Approx(0.7));
  const HullRateBound c = hull_rate_bound(8, 1.0, 0.0, sc, 1.0, 3.0);
  CHECK(c.constant == 3.0);
  CHECK(c.configured == doctest::Approx(3.0 * c.shape_only));
  CHECK_THROWS_AS(hull_rate_bound(1, -1.0, 0.0, sc, 1.0), DomainError);
}

TEST_CASE("greedy runs satisfy monotonicity, weak selection and the KKT certificate") {
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const GridSpace s = GridSpace::uniform(24, p);
    for (SelectionMode mode : {SelectionMode::strict_max, SelectionMode::adversarial_weak}) {
      const WeaknessPolicy policy{mode == SelectionMode::strict_max ? 1.0 : 0.5, mode};
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const Dictionary d = build_gaussian(24, 36, seed, s);
        Rng rng(seed);
        const FunctionVector f = random_vector(24, rng);
        const GreedyTrace t = wcga(f, d, policy, 8);
        CAPTURE(p);
        CHECK(trace_violations(t, policy, 1e-10).empty());
        // rescan each step: the pick obeys the policy
        for (std::size_t m = 1; m <= t.selected.size(); ++m) {
          const Eigen::VectorXd fv =
              (d.elements().transpose() * norming_dual(s, residual_before(t, d, f, m))).cwiseAbs();
          double mx = 0.0;
          for (Eigen::Index j = 0; j < d.size(); ++j)
            if (std::find(t.selected.begin(), t.selected.begin() + static_cast<long>(m - 1), j) ==
                t.selected.begin() + static_cast<long>(m - 1))
              mx = std::max(mx, fv[j]);
          const int pick = t.selected[m - 1];
          CHECK(fv[pick] >= policy.t * mx - 1e-12);
          if (mode == SelectionMode::adversarial_weak) {
            for (int j = 0; j < pick; ++j) {
              const bool used = std::find(t.selected.begin(), t.selected.begin() + static_cast<long>(m - 1), j) !=
                                t.selected.begin() + static_cast<long>(m - 1);
              if (!used) CHECK(fv[j] < policy.t * mx + 1e-12);
            }
          } else {
            CHECK(fv[pick] >= mx - 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("greedy argument validation") {
  const Dictionary d = build_gaussian(8, 10, 1, GridSpace::uniform(8, 3.0));
  const FunctionVector f = FunctionVector::Ones(8);
  CHECK_THROWS_AS(wcga(f, d, {0.0, SelectionMode::strict_max}, 2), DomainError);
  CHECK_THROWS_AS(wcga(f, d, {1.5, SelectionMode::strict_max}, 2), DomainError);
  CHECK_THROWS_AS(wcga(f, d, {}, 11), DomainError);
  CHECK_THROWS_AS(womp(f, d, {}, 2), DomainError);
  CHECK_THROWS_AS(wcga(FunctionVector::Ones(7), d, {}, 2), StructuralError);
  CHECK_THROWS_AS(selection_mode_from_string("greedier"), ConfigurationError);
  CHECK(selection_mode_from_string("adversarial_weak") == SelectionMode::adversarial_weak);

  const GreedyTrace z = wcga(FunctionVector::Zero(8), d, {}, 3);
  CHECK(z.selected.empty());
  CHECK(z.residual_norms.size() == 1);
}

TEST_CASE("trace serialization") {
  const Dictionary d = build_gaussian(12, 20, 2, GridSpace::uniform(12, 2.0));
  Rng rng(1002);
  const FunctionVector f = random_vector(12, rng);
  const GreedyTrace t = womp(f, d, {}, 4);
  const nlohmann::json j = to_json(t);
  CHECK(j["selected"].size() == 4);
  CHECK(j["residual_norms"].size() == 5);
  CHECK(j["coefficients"][3].size() == 4);
  CHECK(j["termination"] == "max_iters");
  CHECK(j["functional_values"][0]["scan_max"].get<double>() == t.functional_values[0].scan_max);

  std::ostringstream out;
  write_csv(t, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "iteration,index,residual_norm,scan_max,achieved");
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 5);
  CHECK(t.residual_at(100) == t.residual_norms.back());
}
