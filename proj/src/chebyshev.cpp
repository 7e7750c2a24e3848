#include "sparsegreedy/chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/QR>

#include "sparsegreedy/errors.hpp"

namespace sparsegreedy {

namespace {

// residuals below this fraction of ‖f‖ count as exact representation
constexpr double kZeroResidual = 1e-13;

double objective(const Eigen::VectorXd& w, const Eigen::ArrayXd& r, double p) {
  return (w.array() * r.abs().pow(p)).sum() / p;
}

Eigen::VectorXd weighted_least_squares(const Eigen::VectorXd& sqrt_w, const FunctionVector& f,
                                       const Eigen::MatrixXd& span) {
  const Eigen::MatrixXd a = sqrt_w.asDiagonal() * span;
  const Eigen::VectorXd b = sqrt_w.cwiseProduct(f);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::VectorXd c = qr.solve(b);
  // one step of iterative refinement
  c += qr.solve(b - a * c);
  return c;
}

// Size below which an entry of r = f − Uc is indistinguishable from zero:
// a multiple of the rounding error of computing it.
Eigen::ArrayXd resolution(const FunctionVector& f, const Eigen::MatrixXd& span, const Eigen::VectorXd& c) {
  const double scale = 64.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(span.cols() + 1);
  return scale * (f.array().abs() + (span.cwiseAbs() * c.cwiseAbs()).array());
}

// max_j |F_r(u_j)|, where entries of r at rounding level may carry any dual
// value a residual within rounding of r allows: |y_i| ≤ w_i (res_i/‖r‖)^{p−1}.
// Significant for p < 2, where |r|^{p−1} is steep at 0 and the minimizer's
// near-interpolation entries fall below double resolution.
double certificate(const GridSpace& space, const Eigen::ArrayXd& r, const Eigen::MatrixXd& span,
                   const Eigen::ArrayXd& res) {
  if (span.cols() == 0) return 0.0;
  const Eigen::ArrayXd kept = (r.abs() > res).select(r, 0.0);
  if ((kept == 0.0).all()) return 0.0;
  const Eigen::VectorXd g = span.transpose() * norming_dual(space, kept.matrix());
  const double plain = g.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> zero;
  for (Eigen::Index i = 0; i < r.size(); ++i)
    if (kept[i] == 0.0) zero.push_back(i);
  if (zero.empty() || space.p() >= 2.0) return plain;

  const auto nz = static_cast<Eigen::Index>(zero.size());
  const double kn = norm(space, kept.matrix());
  Eigen::MatrixXd uz(span.cols(), nz);
  Eigen::VectorXd bound(nz);
  for (Eigen::Index j = 0; j < nz; ++j) {
    uz.col(j) = span.row(zero[j]).transpose();
    bound[j] = space.weights()[zero[j]] * std::pow(res[zero[j]] / kn, space.p() - 1.0);
  }
  const Eigen::VectorXd y = (-uz.colPivHouseholderQr().solve(g)).cwiseMax(-bound).cwiseMin(bound);
  return std::min(plain, (g + uz * y).cwiseAbs().maxCoeff());
}

// Minimizer over α ≥ 0 of Σ w|r − αz|^p, a convex function of α whose
// derivative is monotone; found by bracketing and false position. The
// Newton step α = 1 is the fallback.
double exact_step(const Eigen::ArrayXd& w, const Eigen::ArrayXd& r, const Eigen::ArrayXd& z, double p) {
  auto slope = [&](double a) {
    const Eigen::ArrayXd t = r - a * z;
    return -(w * t.abs().pow(p - 1.0) * t.sign() * z).sum();
  };
  double lo = 0.0, hi = 1.0;
  double s_lo = slope(lo), s_hi = slope(hi);
  if (!(s_lo < 0.0)) return 1.0;
  while (s_hi < 0.0) {
    lo = hi;
    s_lo = s_hi;
    hi *= 2.0;
    if (hi > 1e8) return 1.0;
    s_hi = slope(hi);
  }
  int side = 0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    double a = (lo * s_hi - hi * s_lo) / (s_hi - s_lo);
    if (!(a > lo && a < hi)) a = 0.5 * (lo + hi);
    const double s = slope(a);
    if (s == 0.0) return a;
    if (s < 0.0) {
      lo = a;
      s_lo = s;
      if (side == -1) s_hi *= 0.5;  // Illinois modification
      side = -1;
    } else {
      hi = a;
      s_hi = s;
      if (side == 1) s_lo *= 0.5;
      side = 1;
    }
  }
  return 0.5 * (lo + hi);
}

struct Iterate {
  Eigen::VectorXd c;
  Eigen::ArrayXd r;
  double phi = 0.0;
  double kkt = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
};

Iterate make_iterate(const GridSpace& space, const FunctionVector& f, const Eigen::MatrixXd& span,
                     Eigen::VectorXd c) {
  Iterate it;
  it.r = (f - span * c).array();
  it.phi = objective(space.weights(), it.r, space.p());
  it.kkt = certificate(space, it.r, span, resolution(f, span, c));
  it.c = std::move(c);
  return it;
}

Iterate newton(const GridSpace& space, const FunctionVector& f, const Eigen::MatrixXd& span,
               const ChebyshevConfig& cfg, Eigen::VectorXd c0, int depth);

// For p < 2 the minimizer typically interpolates f at a few points, where the
// Newton model degenerates. Pin the smallest residual entries to exact zeros
// (independent rows of U only), and minimize over the remaining freedom.
bool polish(const GridSpace& space, const FunctionVector& f, const Eigen::MatrixXd& span,
            const ChebyshevConfig& cfg, Iterate& cur, int depth) {
  const Eigen::Index n = span.rows(), k = span.cols();
  const double rmax = cur.r.abs().maxCoeff();
  if (rmax == 0.0) return false;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(cur.r[a]) < std::abs(cur.r[b]);
  });
  for (double rel : {1e-9, 1e-6, 1e-3}) {
    std::vector<Eigen::Index> pinned;
    Eigen::MatrixXd rows(0, k);
    for (Eigen::Index i : order) {
      if (std::abs(cur.r[i]) > rel * rmax || static_cast<Eigen::Index>(pinned.size()) == k) break;
      Eigen::MatrixXd trial(rows.rows() + 1, k);
      trial << rows, span.row(i);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(trial);
      qr.setThreshold(1e-10);
      if (qr.rank() == trial.rows()) {
        rows = std::move(trial);
        pinned.push_back(i);
      }
    }
    if (pinned.empty()) continue;
    const auto np = static_cast<Eigen::Index>(pinned.size());
    Eigen::VectorXd fz(np);
    for (Eigen::Index j = 0; j < np; ++j) fz[j] = f[pinned[j]];
    // c = c_p + N y with U_Z c_p = f_Z and U_Z N = 0
    Eigen::HouseholderQR<Eigen::MatrixXd> qt(rows.transpose());
    const Eigen::MatrixXd q = qt.householderQ() * Eigen::MatrixXd::Identity(k, k);
    const Eigen::MatrixXd r = qt.matrixQR().topLeftCorner(np, np).triangularView<Eigen::Upper>();
    const Eigen::VectorXd c_p =
        q.leftCols(np) * r.transpose().triangularView<Eigen::Lower>().solve(fz);
    Eigen::VectorXd c_new = c_p;
    if (np < k) {
      const Eigen::MatrixXd null = q.rightCols(k - np);
      FunctionVector g = f - span * c_p;
      Eigen::MatrixXd reduced = span * null;
      for (Eigen::Index i : pinned) {
        g[i] = 0.0;
        reduced.row(i).setZero();
      }
      const Iterate sub = newton(space, g, reduced, cfg, null.transpose() * (cur.c - c_p), depth + 1);
      c_new += null * sub.c;
    }
    Iterate cand = make_iterate(space, f, span, c_new);
    if (cand.phi <= cur.phi * (1.0 + 1e-12) && cand.kkt < cur.kkt) {
      cand.iterations = cur.iterations;
      cur = std::move(cand);
      return true;
    }
  }
  return false;
}

Iterate newton(const GridSpace& space, const FunctionVector& f, const Eigen::MatrixXd& span,
               const ChebyshevConfig& cfg, Eigen::VectorXd c0, int depth) {
  const double p = space.p();
  const Eigen::VectorXd& w = space.weights();
  Iterate cur = make_iterate(space, f, span, std::move(c0));
  cur.grad_norm = std::numeric_limits<double>::infinity();
  double best_kkt = cur.kkt;
  int idle = 0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    cur.iterations = it;
    if (cur.kkt <= cfg.kkt_tol) return cur;
    const double kkt_before = cur.kkt;
    const Eigen::ArrayXd a = cur.r.abs();
    const Eigen::ArrayXd v = w.array() * a.pow(p - 1.0) * cur.r.sign();  // -gradient = Uᵀ v
    const Eigen::VectorXd neg_grad = span.transpose() * v.matrix();
    cur.grad_norm = neg_grad.norm();
    const Eigen::ArrayXd h = (p - 1.0) * w.array() * a.max(cfg.weight_floor).pow(p - 2.0);
    // Newton step: weighted least-squares fit of v/h with weights h
    const Eigen::ArrayXd sqrt_h = h.sqrt();
    const Eigen::MatrixXd b = sqrt_h.matrix().asDiagonal() * span;
    const Eigen::VectorXd rhs = (v / sqrt_h).matrix();
    Eigen::VectorXd step = b.colPivHouseholderQr().solve(rhs);
    if (!step.allFinite()) step = neg_grad;
    double slope = neg_grad.dot(step);
    if (!(slope > 0.0)) {
      step = neg_grad;
      slope = neg_grad.squaredNorm();
    }
    double alpha = exact_step(w.array(), cur.r, (span * step).array(), p);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      Eigen::VectorXd trial = cur.c + alpha * step;
      const Eigen::ArrayXd tr = (f - span * trial).array();
      const double tphi = objective(w, tr, p);
      const bool sufficient = tphi <= cur.phi - 1e-4 * alpha * slope;
      bool rounding_level = false;
      double tkkt = 0.0;
      if (sufficient || tphi <= cur.phi * (1.0 + 1e-13)) {
        tkkt = certificate(space, tr, span, resolution(f, span, trial));
        // decrease below the resolution of the objective: judge by the certificate
        rounding_level = !sufficient && tkkt < cur.kkt;
      }
      if (sufficient || rounding_level) {
        cur.c = std::move(trial);
        cur.r = tr;
        cur.phi = tphi;
        cur.kkt = tkkt;
        accepted = true;
        break;
      }
    }
    const bool stalled = !accepted || (it >= 2 && cur.kkt > 0.5 * kkt_before);
    if (p < 2.0 && stalled && cur.kkt > cfg.kkt_tol && depth < 32 && polish(space, f, span, cfg, cur, depth))
      accepted = true;
    if (!accepted) break;
    // at the resolution limit of double precision the certificate stops improving
    if (cur.kkt < 0.999 * best_kkt) {
      best_kkt = cur.kkt;
      idle = 0;
    } else if (++idle >= 8) {
      break;
    }
  }
  cur.iterations = cfg.max_iters;
  return cur;
}

}  // namespace

double kkt_residual(const GridSpace& space, const FunctionVector& r, const Eigen::MatrixXd& span,
                    double reference_norm) {
  if (span.cols() == 0) return 0.0;
  const double rn = norm(space, r);
  if (rn == 0.0 || rn <= kZeroResidual * reference_norm) return 0.0;
  return (span.transpose() * norming_dual(space, r)).cwiseAbs().maxCoeff();
}

Projection chebyshev_project(const GridSpace& space, const FunctionVector& f, const Eigen::MatrixXd& span,
                             const ChebyshevConfig& cfg, const Eigen::VectorXd* warm_start) {
  space.require_dim(f.size(), "chebyshev projection target");
  space.require_dim(span.rows(), "chebyshev projection span");
  const double p = space.p();
  const Eigen::Index k = span.cols();
  Projection out;
  const double fn = norm(space, f);
  if (k == 0 || fn == 0.0) {
    out.coefficients = Eigen::VectorXd::Zero(k);
    out.residual = f;
    out.residual_norm = fn;
    return out;
  }

  const Eigen::VectorXd sqrt_w = space.weights().cwiseSqrt();
  const FunctionVector fs = f / fn;

  auto finish = [&](const Eigen::VectorXd& c, int iters) {
    out.coefficients = c * fn;
    out.residual = f - span * out.coefficients;
    out.residual_norm = norm(space, out.residual);
    out.kkt = out.residual_norm <= kZeroResidual * fn
                  ? 0.0
                  : certificate(space, out.residual.array(), span, resolution(f, span, out.coefficients));
    out.iterations = iters;
    return out;
  };

  const Eigen::VectorXd ls = weighted_least_squares(sqrt_w, fs, span);
  if (p == 2.0) return finish(ls, 1);

  Eigen::VectorXd c0 = ls;
  if (warm_start && warm_start->size() == k) {
    const Eigen::VectorXd warm = *warm_start / fn;
    if (objective(space.weights(), (fs - span * warm).array(), p) < objective(space.weights(), (fs - span * ls).array(), p))
      c0 = warm;
  }
  const Iterate res = newton(space, fs, span, cfg, std::move(c0), 0);
  if (res.kkt <= cfg.kkt_tol) {
    // the certified iterate itself, rescaled: at p near 1 the certificate is
    // too sensitive to rounding to be recomputed from f − Uc
    out.coefficients = res.c * fn;
    out.residual = fn * res.r.matrix();
    out.residual_norm = norm(space, out.residual);
    out.kkt = res.kkt;
    out.iterations = res.iterations;
    return out;
  }
  throw ConvergenceError("chebyshev projection did not reach KKT tolerance (kkt=" + std::to_string(res.kkt) +
                             ", p=" + std::to_string(p) + ")",
                         res.c * fn, res.grad_norm * std::pow(fn, p - 1.0));
}

}  // namespace sparsegreedy
