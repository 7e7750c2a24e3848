#include "sparsegreedy/bilinear.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/SVD>

#include "sparsegreedy/errors.hpp"
#include "sparsegreedy/random.hpp"

namespace sparsegreedy {

Matrix2D::Matrix2D(Eigen::MatrixXd values)
    : Matrix2D(values, Eigen::VectorXd::Constant(values.rows(), 1.0 / static_cast<double>(values.rows())),
               Eigen::VectorXd::Constant(values.cols(), 1.0 / static_cast<double>(values.cols()))) {}

Matrix2D::Matrix2D(Eigen::MatrixXd values, Eigen::VectorXd row_weights, Eigen::VectorXd col_weights)
    : values_(std::move(values)), row_weights_(std::move(row_weights)), col_weights_(std::move(col_weights)) {
  if (values_.rows() < 1 || values_.cols() < 1) throw ConfigurationError("matrix dimensions must be at least 1");
  if (row_weights_.size() != values_.rows() || col_weights_.size() != values_.cols())
    throw StructuralError("weight vectors must match matrix dimensions");
  if ((row_weights_.array() <= 0.0).any() || (col_weights_.array() <= 0.0).any())
    throw ConfigurationError("product weights must be strictly positive");
}

Eigen::MatrixXd Matrix2D::scaled() const {
  return row_weights_.cwiseSqrt().asDiagonal() * values_ * col_weights_.cwiseSqrt().asDiagonal();
}

double Matrix2D::norm() const { return scaled().norm(); }

namespace {

constexpr int kStagnationWindow = 20'000;

struct PowerResult {
  Eigen::VectorXd u, v;  // unit vectors in scaled coordinates
  double sigma = 0.0;
  bool converged = false;
};

// Alternating power iteration for the top singular pair of a.
PowerResult alternating_power(const Eigen::MatrixXd& a, Eigen::VectorXd v, const RankOneConfig& cfg) {
  PowerResult out;
  const double scale = a.norm();
  v.normalize();
  Eigen::VectorXd u = a * v;
  double sigma = u.norm();
  if (sigma == 0.0) return out;
  u /= sigma;
  double window_best = std::numeric_limits<double>::infinity();
  int window_start = 0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    Eigen::VectorXd nv = a.transpose() * u;
    const double s_v = nv.norm();
    nv /= s_v;
    Eigen::VectorXd nu = a * nv;
    const double s_u = nu.norm();
    nu /= s_u;
    // stationarity: A v = σu and Aᵀu = σv
    const double optimality = (a.transpose() * nu - s_u * nv).norm();
    u = std::move(nu);
    v = std::move(nv);
    sigma = s_u;
    if (optimality <= cfg.tol * scale) {
      out.converged = true;
      break;
    }
    // stagnation: no halving of the optimality residual within a window
    if (optimality < 0.5 * window_best) {
      window_best = optimality;
      window_start = it;
    } else if (it - window_start > kStagnationWindow && optimality > 10.0 * cfg.tol * scale) {
      break;
    }
  }
  out.u = std::move(u);
  out.v = std::move(v);
  out.sigma = sigma;
  return out;
}

}  // namespace

RankOneApproximation greedy_rank_one(const Matrix2D& f, int M, const RankOneConfig& cfg) {
  if (M < 1) throw DomainError("greedy_rank_one needs M >= 1");
  RankOneApproximation out;
  Eigen::MatrixXd residual = f.scaled();
  const double f_norm = residual.norm();
  out.residual_norms.push_back(f_norm);
  const Eigen::VectorXd sr = f.row_weights().cwiseSqrt(), sc = f.col_weights().cwiseSqrt();
  Rng rng(cfg.seed);
  std::normal_distribution<double> gauss;
  for (int step = 0; step < M; ++step) {
    if (residual.norm() <= 1e-15 * f_norm) {
      out.residual_norms.push_back(residual.norm());
      continue;
    }
    // leading residual row as the deterministic start
    Eigen::Index lead = 0;
    residual.rowwise().squaredNorm().maxCoeff(&lead);
    Eigen::VectorXd start = residual.row(lead).transpose();
    PowerResult pr = alternating_power(residual, start, cfg);
    int restarts = 0;
    while (!pr.converged) {
      if (restarts == cfg.max_restarts)
        throw ConvergenceError("rank-one power iteration stagnated", pr.v, pr.sigma);
      ++restarts;
      for (Eigen::Index i = 0; i < start.size(); ++i) start[i] = gauss(rng);
      pr = alternating_power(residual, start, cfg);
    }
    out.restarts += restarts;
    residual -= pr.sigma * pr.u * pr.v.transpose();
    // back to function values: f ≈ Σ u(x₁) v(x₂)
    RankOneTerm term;
    term.u = (pr.sigma * pr.u).cwiseQuotient(sr);
    term.v = pr.v.cwiseQuotient(sc);
    out.terms.push_back(std::move(term));
    out.residual_norms.push_back(residual.norm());
  }
  return out;
}

double theta_M(const Matrix2D& f, int M) {
  if (M < 0) throw DomainError("theta_M needs M >= 0");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(f.scaled());
  const Eigen::VectorXd& s = svd.singularValues();
  if (M >= s.size()) return 0.0;
  return s.tail(s.size() - M).norm();
}

Matrix2D read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigurationError("matrix CSV: cannot parse '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ConfigurationError("matrix CSV rows have different lengths");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigurationError("matrix CSV is empty");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return Matrix2D(std::move(m));
}

}  // namespace sparsegreedy
