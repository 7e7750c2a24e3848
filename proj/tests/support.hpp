#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "sparsegreedy/dictionary.hpp"
#include "sparsegreedy/random.hpp"

namespace sgtest {

using namespace sparsegreedy;

// Standard basis e_0..e_{n-1} of the uniform space, scaled to unit norm.
inline Dictionary standard_basis(Eigen::Index n, double p) {
  const GridSpace space = GridSpace::uniform(n, p);
  std::vector<std::string> labels;
  for (Eigen::Index i = 0; i < n; ++i) labels.push_back("e" + std::to_string(i));
  return Dictionary::normalized(space, Eigen::MatrixXd::Identity(n, n), labels, DictionaryKind::custom);
}

// Columns of `m` renormalized in the uniform L_p space.
inline Dictionary custom(const Eigen::MatrixXd& m, double p) {
  const GridSpace space = GridSpace::uniform(m.rows(), p);
  std::vector<std::string> labels;
  for (Eigen::Index i = 0; i < m.cols(); ++i) labels.push_back("c" + std::to_string(i));
  return Dictionary::normalized(space, m, labels, DictionaryKind::custom);
}

inline Eigen::VectorXd random_vector(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

// Direct weighted p-norm without scaling tricks.
inline double plain_norm(const Eigen::VectorXd& w, const Eigen::VectorXd& f, double p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) s += w[i] * std::pow(std::abs(f[i]), p);
  return std::pow(s, 1.0 / p);
}

// Golden-section minimization of a unimodal function on [a, b].
template <typename F>
double golden_section(F&& f, double a, double b, double tol = 1e-13) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace sgtest
