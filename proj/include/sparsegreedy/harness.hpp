#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "sparsegreedy/analysis.hpp"
#include "sparsegreedy/budget.hpp"
#include "sparsegreedy/chebyshev.hpp"
#include "sparsegreedy/greedy.hpp"
#include "sparsegreedy/oracle.hpp"

namespace sparsegreedy {

inline constexpr const char* kToolVersion = "0.1.0";

enum class ExperimentKind { recovery, lebesgue, rate_bound, bilinear, analyze, decay_demo };

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct SpaceDescriptor {
  int d = 1;
  Eigen::Index grid = 64;  // points per axis
  double p = 2.0;
};

struct SignalModel {
  /// sparse | dense | powerlaw | zero
  std::string model = "sparse";
  std::vector<int> sparsity{1};
  /// Norm ε of the additive noise.
  double noise = 0.0;
  /// Smoothness r of the powerlaw model: coefficient of frequency k ∝ k^{-(r+1/2)}.
  double decay_r = 1.0;
};

struct AlgorithmSpec {
  /// womp | wcga | tga
  std::string name = "womp";
  WeaknessPolicy policy;
  ChebyshevConfig solver;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::recovery;
  std::uint64_t seed = 0;
  int trials = 1;
  SpaceDescriptor space;
  /// {kind, params, seed}; "resample": true redraws random dictionaries per trial.
  nlohmann::json dictionary = {{"kind", "gaussian"}, {"params", nlohmann::json::object()}};
  bool resample_dictionary = false;
  SignalModel signal;
  AlgorithmSpec algorithm;
  std::string budget = "m";
  std::vector<int> m_values{1};
  OracleConfig oracle;
  bool oracle_floor = true;
  /// Exponent r and depth D (0: min(N, K + max budget)) of the decay bound.
  double rate_r = 0.5;
  int rate_depth = 0;
  AnalysisConfig analysis;
  AnalysisRequest analysis_request;
  /// bilinear: dimension ranges of random matrices, or a CSV matrix.
  std::pair<int, int> matrix_rows{2, 16};
  std::pair<int, int> matrix_cols{2, 16};
  std::string matrix_csv;
  /// Record wall time per row (breaks byte-identical reruns).
  bool timing = false;
  std::string output;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

using Cell = std::variant<std::int64_t, double, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void write_csv(std::ostream& out) const;
};

struct ExperimentResult {
  ExperimentConfig config;
  Table table;
  nlohmann::json summary;
  std::vector<std::string> violations;
};

ExperimentResult run_recovery(const ExperimentConfig& cfg, unsigned threads = 1);
ExperimentResult run_lebesgue(const ExperimentConfig& cfg, unsigned threads = 1);
ExperimentResult run_rate_bound(const ExperimentConfig& cfg, unsigned threads = 1);
ExperimentResult run_decay_demo(const ExperimentConfig& cfg, unsigned threads = 1);
ExperimentResult run_bilinear(const ExperimentConfig& cfg, unsigned threads = 1);
ExperimentResult run_analyze(const ExperimentConfig& cfg, unsigned threads = 1);
ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads = 1);

/// Least-squares slope of log y against log x over the finite positive
/// entries; NaN when fewer than two remain.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Space and dictionary described by a config (trial index selects the
/// per-trial substream when the dictionary is resampled).
GridSpace make_space(const ExperimentConfig& cfg);
Dictionary make_dictionary(const ExperimentConfig& cfg, std::size_t trial = 0);

/// result.csv and summary.json under `dir`.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

/// JSON number, or "inf" / "-inf" / "nan".
nlohmann::json json_number(double x);

}  // namespace sparsegreedy
