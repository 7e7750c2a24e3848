#include "sparsegreedy/dictionary.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "sparsegreedy/errors.hpp"

namespace sparsegreedy {

const char* to_string(DictionaryKind kind) {
  switch (kind) {
    case DictionaryKind::trigonometric: return "trigonometric";
    case DictionaryKind::haar: return "haar";
    case DictionaryKind::gaussian: return "gaussian";
    case DictionaryKind::custom: return "custom";
  }
  return "unknown";
}

Dictionary::Dictionary(GridSpace space, Eigen::MatrixXd elements, std::vector<std::string> labels,
                       DictionaryKind kind, nlohmann::json descriptor)
    : space_(std::move(space)),
      elements_(std::move(elements)),
      labels_(std::move(labels)),
      kind_(kind),
      descriptor_(std::move(descriptor)) {
  space_.require_dim(elements_.rows(), "dictionary elements");
  if (elements_.cols() < 1) throw ConfigurationError("dictionary needs at least one element");
  if (static_cast<Eigen::Index>(labels_.size()) != elements_.cols())
    throw StructuralError("dictionary needs one label per element");
  if (std::set<std::string>(labels_.begin(), labels_.end()).size() != labels_.size())
    throw ConfigurationError("dictionary labels must be unique");
  for (Eigen::Index j = 0; j < elements_.cols(); ++j) {
    const double n = norm(space_, elements_.col(j));
    if (std::abs(n - 1.0) > 1e-12)
      throw DomainError("dictionary element " + labels_[j] + " does not have unit norm");
  }
}

Dictionary Dictionary::normalized(GridSpace space, Eigen::MatrixXd columns, std::vector<std::string> labels,
                                  DictionaryKind kind, nlohmann::json descriptor) {
  space.require_dim(columns.rows(), "dictionary elements");
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    const double n = norm(space, columns.col(j));
    if (n == 0.0) throw DomainError("dictionary element " + std::to_string(j) + " is zero");
    columns.col(j) /= n;
  }
  return Dictionary(std::move(space), std::move(columns), std::move(labels), kind, std::move(descriptor));
}

Eigen::MatrixXd Dictionary::gram() const {
  const Eigen::MatrixXd scaled = space_.weights().cwiseSqrt().asDiagonal() * elements_;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(size(), size());
  g.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
  return g.selfadjointView<Eigen::Lower>();
}

Eigen::MatrixXd Dictionary::columns(const std::vector<int>& indices) const {
  Eigen::MatrixXd out(dim(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] < 0 || indices[j] >= size()) throw StructuralError("dictionary index out of range");
    out.col(static_cast<Eigen::Index>(j)) = elements_.col(indices[j]);
  }
  return out;
}

SparseRepresentation::SparseRepresentation(std::initializer_list<std::pair<const int, double>> terms) {
  for (const auto& [i, x] : terms) set(i, x);
}

void SparseRepresentation::set(int index, double coefficient) {
  if (index < 0) throw StructuralError("negative element index");
  if (coefficient == 0.0)
    terms_.erase(index);
  else
    terms_[index] = coefficient;
}

std::vector<int> SparseRepresentation::support() const {
  std::vector<int> out;
  out.reserve(terms_.size());
  for (const auto& [i, x] : terms_) out.push_back(i);
  return out;
}

namespace {

struct Univariate {
  std::vector<Eigen::VectorXd> values;  // one per function, sampled on the axis grid
  std::vector<std::string> labels;
};

// Tensor product of per-axis systems, lexicographic with the first axis slowest.
Eigen::MatrixXd tensorize(const Univariate& uni, int d, Eigen::Index per_axis, std::vector<std::string>& labels) {
  const auto count1 = static_cast<Eigen::Index>(uni.values.size());
  Eigen::Index count = 1, n = 1;
  for (int a = 0; a < d; ++a) {
    count *= count1;
    n *= per_axis;
  }
  Eigen::MatrixXd out(n, count);
  labels.clear();
  labels.reserve(count);
  std::vector<Eigen::Index> fidx(d), pidx(d);
  for (Eigen::Index e = 0; e < count; ++e) {
    Eigen::Index rem = e;
    for (int a = d - 1; a >= 0; --a) {
      fidx[a] = rem % count1;
      rem /= count1;
    }
    std::string label;
    for (int a = 0; a < d; ++a) label += (a ? "|" : "") + uni.labels[fidx[a]];
    labels.push_back(std::move(label));
    for (Eigen::Index pt = 0; pt < n; ++pt) {
      Eigen::Index r = pt;
      double v = 1.0;
      for (int a = d - 1; a >= 0; --a) {
        v *= uni.values[fidx[a]][r % per_axis];
        r /= per_axis;
      }
      out(pt, e) = v;
    }
  }
  return out;
}

void require_tensor_grid(const GridSpace& space, int d, const char* builder) {
  if (space.axes() != d)
    throw ConfigurationError(std::string(builder) + " needs a " + std::to_string(d) + "-axis tensor grid");
}

std::string dyadic(std::int64_t num, std::int64_t den) {
  if (num == 0) return "0";
  const std::int64_t g = std::gcd(num, den);
  num /= g;
  den /= g;
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

}  // namespace

Dictionary build_trigonometric(int d, int max_freq, const GridSpace& space) {
  if (d < 1 || max_freq < 0) throw ConfigurationError("trigonometric dictionary needs d >= 1, max_freq >= 0");
  require_tensor_grid(space, d, "trigonometric dictionary");
  const Eigen::Index per_axis = space.per_axis();
  if (per_axis <= 2 * static_cast<Eigen::Index>(max_freq))
    throw ConfigurationError("grid too coarse: per-axis size must exceed 2*max_freq");
  Univariate uni;
  const Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(per_axis, 0, static_cast<double>(per_axis - 1)) /
                           static_cast<double>(per_axis);
  uni.values.push_back(Eigen::VectorXd::Ones(per_axis));
  uni.labels.emplace_back("1");
  for (int k = 1; k <= max_freq; ++k) {
    const Eigen::ArrayXd arg = 2.0 * std::numbers::pi * k * x;
    uni.values.push_back(arg.cos().matrix());
    uni.labels.push_back("cos" + std::to_string(k));
    uni.values.push_back(arg.sin().matrix());
    uni.labels.push_back("sin" + std::to_string(k));
  }
  std::vector<std::string> labels;
  Eigen::MatrixXd cols = tensorize(uni, d, per_axis, labels);
  nlohmann::json desc = {{"kind", "trigonometric"}, {"params", {{"d", d}, {"max_freq", max_freq}}}};
  return Dictionary::normalized(space, std::move(cols), std::move(labels), DictionaryKind::trigonometric,
                                std::move(desc));
}

Dictionary build_haar(int levels, int d, const GridSpace& space) {
  if (levels < 0 || levels > 24 || d < 1) throw ConfigurationError("haar dictionary needs 0 <= levels <= 24, d >= 1");
  require_tensor_grid(space, d, "haar dictionary");
  const Eigen::Index per_axis = space.per_axis();
  if (per_axis != (Eigen::Index{1} << levels))
    throw ConfigurationError("haar dictionary needs per-axis grid size 2^levels");
  Univariate uni;
  uni.values.push_back(Eigen::VectorXd::Ones(per_axis));
  uni.labels.emplace_back("[0,1]");
  for (int j = 0; j < levels; ++j) {
    const std::int64_t intervals = std::int64_t{1} << j;
    const Eigen::Index width = per_axis / intervals;
    for (std::int64_t pos = 0; pos < intervals; ++pos) {
      Eigen::VectorXd h = Eigen::VectorXd::Zero(per_axis);
      h.segment(pos * width, width / 2).setOnes();
      h.segment(pos * width + width / 2, width / 2).setConstant(-1.0);
      uni.values.push_back(std::move(h));
      uni.labels.push_back("[" + dyadic(pos, intervals) + "," + dyadic(pos + 1, intervals) + ")");
    }
  }
  std::vector<std::string> labels;
  Eigen::MatrixXd cols = tensorize(uni, d, per_axis, labels);
  nlohmann::json desc = {{"kind", "haar"}, {"params", {{"levels", levels}, {"d", d}}}};
  return Dictionary::normalized(space, std::move(cols), std::move(labels), DictionaryKind::haar, std::move(desc));
}

Dictionary build_gaussian(Eigen::Index n, Eigen::Index count, std::uint64_t seed, const GridSpace& space) {
  if (count < 1) throw ConfigurationError("gaussian dictionary needs count >= 1");
  space.require_dim(n, "gaussian dictionary");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd cols(n, count);
  for (Eigen::Index j = 0; j < count; ++j)
    for (Eigen::Index i = 0; i < n; ++i) cols(i, j) = gauss(rng);
  std::vector<std::string> labels;
  labels.reserve(count);
  for (Eigen::Index j = 0; j < count; ++j) labels.push_back("g" + std::to_string(j));
  nlohmann::json desc = {{"kind", "gaussian"}, {"params", {{"n", n}, {"count", count}}}, {"seed", seed}};
  return Dictionary::normalized(space, std::move(cols), std::move(labels), DictionaryKind::gaussian,
                                std::move(desc));
}

FunctionVector synthesize(const Dictionary& dict, const SparseRepresentation& rep) {
  FunctionVector f = FunctionVector::Zero(dict.dim());
  for (const auto& [i, x] : rep.terms()) {
    if (i >= dict.size()) throw StructuralError("support index " + std::to_string(i) + " out of range");
    f += x * dict.element(i);
  }
  return f;
}

void write_csv(const Dictionary& dict, std::ostream& out) {
  for (std::size_t j = 0; j < dict.labels().size(); ++j) {
    if (j) out << ',';
    out << '"' << dict.labels()[j] << '"';
  }
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < dict.dim(); ++i) {
    for (Eigen::Index j = 0; j < dict.size(); ++j) {
      if (j) out << ',';
      out << dict.elements()(i, j);
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

}  // namespace

Dictionary read_csv(std::istream& in, const GridSpace& space) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigurationError("dictionary CSV is empty");
  std::vector<std::string> labels = split_csv_line(line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != labels.size()) throw ConfigurationError("dictionary CSV row has wrong number of columns");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        row.push_back(std::stod(c));
      } catch (const std::exception&) {
        throw ConfigurationError("dictionary CSV: cannot parse '" + c + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd cols(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < labels.size(); ++j)
      cols(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  nlohmann::json desc = {{"kind", "custom"}, {"params", nlohmann::json::object()}};
  return Dictionary::normalized(space, std::move(cols), std::move(labels), DictionaryKind::custom,
                                std::move(desc));
}

Dictionary build_from_descriptor(const nlohmann::json& descriptor, const GridSpace& space) {
  try {
    const std::string kind = descriptor.at("kind").get<std::string>();
    const nlohmann::json params = descriptor.value("params", nlohmann::json::object());
    if (kind == "trigonometric")
      return build_trigonometric(params.at("d").get<int>(), params.at("max_freq").get<int>(), space);
    if (kind == "haar") return build_haar(params.at("levels").get<int>(), params.value("d", 1), space);
    if (kind == "gaussian")
      return build_gaussian(params.at("n").get<Eigen::Index>(), params.at("count").get<Eigen::Index>(),
                            descriptor.at("seed").get<std::uint64_t>(), space);
    if (kind == "custom") {
      const std::string path = params.at("path").get<std::string>();
      std::ifstream in(path);
      if (!in) throw ConfigurationError("cannot open dictionary CSV " + path);
      Dictionary d = read_csv(in, space);
      nlohmann::json desc = descriptor;
      return Dictionary(d.space(), d.elements(), d.labels(), DictionaryKind::custom, std::move(desc));
    }
    throw ConfigurationError("unknown dictionary kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("dictionary descriptor: ") + e.what());
  }
}

}  // namespace sparsegreedy
