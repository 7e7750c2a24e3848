#include "sparsegreedy/lp_space.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sparsegreedy/errors.hpp"
#include "sparsegreedy/random.hpp"

namespace sparsegreedy {

namespace {

void require_exponent(double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw DomainError("exponent p must lie in (1, inf), got " + std::to_string(p));
}

}  // namespace

GridSpace::GridSpace(Eigen::VectorXd weights, double p) : weights_(std::move(weights)), p_(p) {
  require_exponent(p);
  if (weights_.size() == 0) throw ConfigurationError("grid space needs at least one point");
  for (Eigen::Index i = 0; i < weights_.size(); ++i)
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
      throw ConfigurationError("quadrature weights must be strictly positive");
}

GridSpace GridSpace::uniform(Eigen::Index n, double p) {
  if (n < 1) throw ConfigurationError("grid space needs at least one point");
  return GridSpace(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)), p);
}

GridSpace GridSpace::tensor_grid(int d, Eigen::Index per_axis, double p) {
  if (d < 1 || per_axis < 1) throw ConfigurationError("tensor grid needs d >= 1 and per-axis size >= 1");
  Eigen::Index n = 1;
  for (int a = 0; a < d; ++a) n *= per_axis;
  GridSpace space = uniform(n, p);
  space.axes_ = d;
  space.per_axis_ = per_axis;
  return space;
}

GridSpace GridSpace::with_p(double p) const {
  GridSpace out = *this;
  require_exponent(p);
  out.p_ = p;
  return out;
}

void GridSpace::require_dim(Eigen::Index n, const char* what) const {
  if (n != dim())
    throw StructuralError(std::string(what) + ": length " + std::to_string(n) + " does not match space dimension " +
                          std::to_string(dim()));
}

double norm(const GridSpace& space, const FunctionVector& f) {
  space.require_dim(f.size(), "norm");
  const double p = space.p();
  // scale by the max entry so |f|^p neither overflows nor underflows
  const double scale = f.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  if (p == 2.0) return scale * std::sqrt(space.weights().dot((f / scale).cwiseAbs2()));
  const double s = space.weights().dot((f.cwiseAbs() / scale).array().pow(p).matrix());
  return scale * std::pow(s, 1.0 / p);
}

Eigen::VectorXd norming_dual(const GridSpace& space, const FunctionVector& g) {
  space.require_dim(g.size(), "norming functional");
  const double gn = norm(space, g);
  if (gn == 0.0) throw DomainError("no norming functional for 0");
  const double p = space.p();
  const Eigen::ArrayXd u = g.array() / gn;
  if (p == 2.0) return (space.weights().array() * u).matrix();
  return (space.weights().array() * u.abs().pow(p - 1.0) * u.sign()).matrix();
}

double norming_functional(const GridSpace& space, const FunctionVector& g, const FunctionVector& h) {
  space.require_dim(h.size(), "norming functional");
  return norming_dual(space, g).dot(h);
}

SmoothnessConstants smoothness_constants(double p) {
  require_exponent(p);
  SmoothnessConstants sc{};
  if (p >= 2.0) {
    sc.q = 2.0;
    sc.gamma = (p - 1.0) / 2.0;
  } else {
    sc.q = p;
    sc.gamma = 1.0 / p;
  }
  sc.q_dual = sc.q / (sc.q - 1.0);
  return sc;
}

double estimate_modulus(const GridSpace& space, double u, std::size_t samples, std::uint64_t seed) {
  if (u < 0.0) throw DomainError("modulus of smoothness needs u >= 0");
  if (samples == 0) throw DomainError("modulus estimate needs at least one sample");
  if (u == 0.0) return 0.0;
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_int_distribution<int> shape(0, 2);
  const Eigen::Index n = space.dim();
  double best = 0.0;
  FunctionVector x(n), y(n);
  for (std::size_t s = 0; s < samples; ++s) {
    // mix dense gaussian pairs with sparse ones, where L_p geometry is least Hilbertian
    const int kind = shape(rng);
    for (Eigen::Index i = 0; i < n; ++i) {
      x[i] = gauss(rng);
      y[i] = gauss(rng);
    }
    if (kind == 1 && n > 1) {
      std::uniform_int_distribution<Eigen::Index> idx(0, n - 1);
      x.setZero();
      y.setZero();
      x[idx(rng)] = 1.0;
      y[idx(rng)] = gauss(rng) < 0 ? -1.0 : 1.0;
    } else if (kind == 2) {
      y = x.cwiseProduct(y.array().sign().matrix());
    }
    const double nx = norm(space, x), ny = norm(space, y);
    if (nx == 0.0 || ny == 0.0) continue;
    x /= nx;
    y /= ny;
    const double v = 0.5 * (norm(space, x + u * y) + norm(space, x - u * y) - 2.0);
    best = std::max(best, v);
  }
  return best;
}

double hilbert_modulus(double u) { return std::sqrt(1.0 + u * u) - 1.0; }

}  // namespace sparsegreedy
