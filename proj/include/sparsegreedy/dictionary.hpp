#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>
#include "json.hpp"

#include "sparsegreedy/lp_space.hpp"

namespace sparsegreedy {

enum class DictionaryKind { trigonometric, haar, gaussian, custom };

const char* to_string(DictionaryKind kind);

/// Ordered family of unit-norm elements of a GridSpace, stored as the
/// columns of a dense matrix. Immutable after construction.
class Dictionary {
 public:
  /// Takes columns as given; each must already have unit norm (1e-12 relative).
  Dictionary(GridSpace space, Eigen::MatrixXd elements, std::vector<std::string> labels, DictionaryKind kind,
             nlohmann::json descriptor = nlohmann::json::object());

  /// Renormalizes every column in the ambient L_p norm first.
  static Dictionary normalized(GridSpace space, Eigen::MatrixXd columns, std::vector<std::string> labels,
                               DictionaryKind kind, nlohmann::json descriptor = nlohmann::json::object());

  const GridSpace& space() const noexcept { return space_; }
  Eigen::Index size() const noexcept { return elements_.cols(); }
  Eigen::Index dim() const noexcept { return elements_.rows(); }
  const Eigen::MatrixXd& elements() const noexcept { return elements_; }
  auto element(Eigen::Index i) const { return elements_.col(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  DictionaryKind kind() const noexcept { return kind_; }
  /// {kind, params, seed}: enough to rebuild the dictionary.
  const nlohmann::json& descriptor() const noexcept { return descriptor_; }

  /// Gram matrix of the weighted p = 2 pairing, GᵀWG.
  Eigen::MatrixXd gram() const;
  /// Columns `indices` as a dense matrix.
  Eigen::MatrixXd columns(const std::vector<int>& indices) const;

 private:
  GridSpace space_;
  Eigen::MatrixXd elements_;
  std::vector<std::string> labels_;
  DictionaryKind kind_;
  nlohmann::json descriptor_;
};

/// f = Σ_{i∈T} xᵢ gᵢ with no stored zeros.
class SparseRepresentation {
 public:
  SparseRepresentation() = default;
  SparseRepresentation(std::initializer_list<std::pair<const int, double>> terms);

  void set(int index, double coefficient);
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  std::vector<int> support() const;
  const std::map<int, double>& terms() const noexcept { return terms_; }

 private:
  std::map<int, double> terms_;
};

/// Products of univariate {1, cos 2πkx, sin 2πkx}, k ≤ max_freq, normalized in L_p.
/// Needs a d-axis tensor grid with per-axis size > 2·max_freq.
Dictionary build_trigonometric(int d, int max_freq, const GridSpace& space);

/// Tensorized L_p-normalized Haar system on a grid with per-axis size 2^levels.
Dictionary build_haar(int levels, int d, const GridSpace& space);

/// count i.i.d. standard normal columns renormalized in L_p.
Dictionary build_gaussian(Eigen::Index n, Eigen::Index count, std::uint64_t seed, const GridSpace& space);

FunctionVector synthesize(const Dictionary& dict, const SparseRepresentation& rep);

/// One column per element, header row of labels.
void write_csv(const Dictionary& dict, std::ostream& out);
/// Reads columns and renormalizes them in `space` (kind custom).
Dictionary read_csv(std::istream& in, const GridSpace& space);

/// Rebuilds a dictionary from {kind, params, seed}; custom kinds need params.path.
Dictionary build_from_descriptor(const nlohmann::json& descriptor, const GridSpace& space);

}  // namespace sparsegreedy
