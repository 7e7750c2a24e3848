#include "sparsegreedy/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "sparsegreedy/bilinear.hpp"
#include "sparsegreedy/combinatorics.hpp"
#include "sparsegreedy/errors.hpp"
#include "sparsegreedy/parallel.hpp"
#include "sparsegreedy/random.hpp"

namespace sparsegreedy {

using nlohmann::json;

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::recovery: return "recovery";
    case ExperimentKind::lebesgue: return "lebesgue";
    case ExperimentKind::rate_bound: return "rate_bound";
    case ExperimentKind::bilinear: return "bilinear";
    case ExperimentKind::analyze: return "analyze";
    case ExperimentKind::decay_demo: return "decay_demo";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "recovery" || name == "recover") return ExperimentKind::recovery;
  if (name == "lebesgue") return ExperimentKind::lebesgue;
  if (name == "rate_bound" || name == "ratebound") return ExperimentKind::rate_bound;
  if (name == "bilinear") return ExperimentKind::bilinear;
  if (name == "analyze") return ExperimentKind::analyze;
  if (name == "decay_demo" || name == "decay") return ExperimentKind::decay_demo;
  throw ConfigurationError("unknown experiment kind '" + name + "'");
}

json json_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

// ---------------------------------------------------------------- config

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw ConfigurationError("experiment config must be a JSON object");
    if (j.contains("kind")) c.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
    if (!j.contains("seed")) throw ConfigurationError("experiment config needs a seed");
    c.seed = j.at("seed").get<std::uint64_t>();
    c.trials = j.value("trials", 1);
    if (c.trials < 1) throw ConfigurationError("trials must be at least 1");

    if (j.contains("dictionary")) c.dictionary = j.at("dictionary");
    if (!c.dictionary.contains("params")) c.dictionary["params"] = json::object();
    c.resample_dictionary = c.dictionary.value("resample", false);
    c.dictionary.erase("resample");
    const std::string dkind = c.dictionary.value("kind", "gaussian");

    const json space = j.value("space", json::object());
    c.space.p = space.value("p", 2.0);
    c.space.d = space.value("d", c.dictionary["params"].value("d", 1));
    if (space.contains("grid")) {
      c.space.grid = space.at("grid").get<Eigen::Index>();
    } else if (dkind == "haar") {
      c.space.grid = Eigen::Index{1} << c.dictionary["params"].value("levels", 1);
    } else if (dkind == "trigonometric") {
      c.space.grid = std::max<Eigen::Index>(4 * c.dictionary["params"].value("max_freq", 1), 3);
    }
    if (c.space.d < 1 || c.space.grid < 1) throw ConfigurationError("space needs d >= 1 and grid >= 1");
    if (!(c.space.p > 1.0) || !std::isfinite(c.space.p)) throw ConfigurationError("space exponent p must lie in (1, inf)");

    const json sig = j.value("signal", json::object());
    c.signal.model = sig.value("model", "sparse");
    if (sig.contains("sparsity")) {
      if (sig.at("sparsity").is_array())
        c.signal.sparsity = sig.at("sparsity").get<std::vector<int>>();
      else
        c.signal.sparsity = {sig.at("sparsity").get<int>()};
    }
    c.signal.noise = sig.value("noise", 0.0);
    c.signal.decay_r = sig.value("decay_r", 1.0);
    if (c.signal.noise < 0.0) throw ConfigurationError("noise level must be nonnegative");
    for (int k : c.signal.sparsity)
      if (k < 0) throw ConfigurationError("sparsity must be nonnegative");
    static const std::vector<std::string> models{"sparse", "dense", "powerlaw", "zero"};
    if (std::find(models.begin(), models.end(), c.signal.model) == models.end())
      throw ConfigurationError("unknown signal model '" + c.signal.model + "'");

    const json alg = j.value("algorithm", json::object());
    c.algorithm.name = alg.value("name", c.space.p == 2.0 ? "womp" : "wcga");
    c.algorithm.policy.t = alg.value("t", 1.0);
    c.algorithm.policy.mode = selection_mode_from_string(alg.value("policy", "strict_max"));
    c.algorithm.solver.kkt_tol = alg.value("kkt_tol", c.algorithm.solver.kkt_tol);
    c.algorithm.solver.residual_tol = alg.value("residual_tol", c.algorithm.solver.residual_tol);
    c.algorithm.solver.max_iters = alg.value("max_solver_iters", c.algorithm.solver.max_iters);
    try {
      c.algorithm.policy.validate();
    } catch (const DomainError& e) {
      throw ConfigurationError(e.what());
    }
    if (c.algorithm.name != "womp" && c.algorithm.name != "wcga" && c.algorithm.name != "tga")
      throw ConfigurationError("unknown algorithm '" + c.algorithm.name + "'");
    if (c.algorithm.name == "womp" && c.space.p != 2.0) throw ConfigurationError("womp needs p = 2");

    c.budget = j.value("budget", "m");
    (void)BudgetExpression(c.budget);  // parse check
    if (j.contains("m_values")) c.m_values = j.at("m_values").get<std::vector<int>>();
    for (int m : c.m_values)
      if (m < 0) throw ConfigurationError("m values must be nonnegative");

    const json orc = j.value("oracle", json::object());
    c.oracle.cap = orc.value("cap", c.oracle.cap);
    c.oracle.kkt_tol = orc.value("kkt_tol", c.oracle.kkt_tol);
    c.oracle_floor = orc.value("floor_check", true);

    const json rb = j.value("rate_bound", json::object());
    c.rate_r = rb.value("r", 0.5);
    c.rate_depth = rb.value("depth", 0);
    if (!(c.rate_r > 0.0 && c.rate_r <= 1.0)) throw ConfigurationError("rate_bound.r must lie in (0, 1]");

    const json an = j.value("analysis", json::object());
    c.analysis.cap = an.value("cap", c.analysis.cap);
    c.analysis.samples = an.value("samples", c.analysis.samples);
    c.analysis.max_sign_bits = an.value("max_sign_bits", c.analysis.max_sign_bits);
    c.analysis.ascent_starts = an.value("ascent_starts", c.analysis.ascent_starts);
    c.analysis.ascent_iters = an.value("ascent_iters", c.analysis.ascent_iters);
    c.analysis.ascent_supports = an.value("ascent_supports", c.analysis.ascent_supports);
    c.analysis.seed = an.value("seed", substream_seed(c.seed, "analysis"));
    c.analysis_request.rip_sparsities = an.value("rip", std::vector<int>{});
    c.analysis_request.K = an.value("K", std::vector<int>{});
    c.analysis_request.D = an.value("D", std::vector<int>{});
    c.analysis_request.r = an.value("r", std::vector<double>{0.5});

    const json bl = j.value("bilinear", json::object());
    if (bl.contains("rows")) c.matrix_rows = bl.at("rows").get<std::pair<int, int>>();
    if (bl.contains("cols")) c.matrix_cols = bl.at("cols").get<std::pair<int, int>>();
    c.matrix_csv = bl.value("matrix_csv", "");
    if (c.matrix_rows.first < 1 || c.matrix_rows.second < c.matrix_rows.first || c.matrix_cols.first < 1 ||
        c.matrix_cols.second < c.matrix_cols.first)
      throw ConfigurationError("bilinear rows/cols must be ranges [lo, hi] with 1 <= lo <= hi");

    c.timing = j.value("timing", false);
    c.output = j.value("output", "");
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("experiment config: ") + e.what());
  }
  return c;
}

json ExperimentConfig::to_json() const {
  json dict = dictionary;
  if (resample_dictionary) dict["resample"] = true;
  json j = {
      {"kind", sparsegreedy::to_string(kind)},
      {"seed", seed},
      {"trials", trials},
      {"space", {{"d", space.d}, {"grid", space.grid}, {"p", space.p}}},
      {"dictionary", dict},
      {"signal",
       {{"model", signal.model}, {"sparsity", signal.sparsity}, {"noise", signal.noise}, {"decay_r", signal.decay_r}}},
      {"algorithm",
       {{"name", algorithm.name},
        {"t", algorithm.policy.t},
        {"policy", sparsegreedy::to_string(algorithm.policy.mode)},
        {"kkt_tol", algorithm.solver.kkt_tol},
        {"residual_tol", algorithm.solver.residual_tol},
        {"max_solver_iters", algorithm.solver.max_iters}}},
      {"budget", budget},
      {"m_values", m_values},
      {"oracle", {{"cap", oracle.cap}, {"kkt_tol", oracle.kkt_tol}, {"floor_check", oracle_floor}}},
      {"rate_bound", {{"r", rate_r}, {"depth", rate_depth}}},
      {"analysis",
       {{"cap", analysis.cap},
        {"samples", analysis.samples},
        {"max_sign_bits", analysis.max_sign_bits},
        {"ascent_starts", analysis.ascent_starts},
        {"ascent_iters", analysis.ascent_iters},
        {"ascent_supports", analysis.ascent_supports},
        {"seed", analysis.seed},
        {"rip", analysis_request.rip_sparsities},
        {"K", analysis_request.K},
        {"D", analysis_request.D},
        {"r", analysis_request.r}}},
      {"bilinear", {{"rows", matrix_rows}, {"cols", matrix_cols}, {"matrix_csv", matrix_csv}}},
      {"timing", timing},
  };
  if (!output.empty()) j["output"] = output;
  return j;
}

// ---------------------------------------------------------------- tables

namespace {

void write_cell(std::ostream& out, const Cell& cell) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (std::isnan(v))
            out << "nan";
          else if (std::isinf(v))
            out << (v > 0 ? "inf" : "-inf");
          else
            out << std::setprecision(17) << v;
        } else if constexpr (std::is_same_v<T, bool>) {
          out << (v ? "true" : "false");
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (v.find_first_of(",\"\n") != std::string::npos) {
            out << '"';
            for (char ch : v) out << (ch == '"' ? "\"\"" : std::string(1, ch));
            out << '"';
          } else {
            out << v;
          }
        } else {
          out << v;
        }
      },
      cell);
}

}  // namespace

void Table::write_csv(std::ostream& out) const {
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      write_cell(out, row[i]);
    }
    out << '\n';
  }
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "result.csv", std::ios::binary);
    if (!csv) throw ConfigurationError("cannot write " + (dir / "result.csv").string());
    result.table.write_csv(csv);
  }
  std::ofstream js(dir / "summary.json", std::ios::binary);
  if (!js) throw ConfigurationError("cannot write " + (dir / "summary.json").string());
  js << result.summary.dump(2) << '\n';
}

// ---------------------------------------------------------------- shared pieces

GridSpace make_space(const ExperimentConfig& cfg) {
  return GridSpace::tensor_grid(cfg.space.d, cfg.space.grid, cfg.space.p);
}

Dictionary make_dictionary(const ExperimentConfig& cfg, std::size_t trial) {
  const GridSpace space = make_space(cfg);
  json desc = cfg.dictionary;
  const std::string kind = desc.value("kind", "gaussian");
  if (kind == "gaussian") {
    if (!desc["params"].contains("n")) desc["params"]["n"] = space.dim();
    if (!desc["params"].contains("count")) throw ConfigurationError("gaussian dictionary needs params.count");
    if (cfg.resample_dictionary)
      desc["seed"] = substream_seed(cfg.seed, "dictionary", trial);
    else if (!desc.contains("seed"))
      desc["seed"] = substream_seed(cfg.seed, "dictionary");
  } else if (kind == "trigonometric" || kind == "haar") {
    if (!desc["params"].contains("d")) desc["params"]["d"] = cfg.space.d;
  }
  return build_from_descriptor(desc, space);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double oracle_slack(double f0_norm) { return 1e-10 * std::max(1.0, f0_norm); }

struct Planted {
  FunctionVector f0;
  std::vector<int> support;
  double eps = 0.0;
};

// uniform on [-1,-0.1] ∪ [0.1,1]
double bounded_coefficient(Rng& rng) {
  std::uniform_real_distribution<double> mag(0.1, 1.0);
  std::bernoulli_distribution sign;
  const double v = mag(rng);
  return sign(rng) ? -v : v;
}

FunctionVector noise_of_norm(const GridSpace& space, double eps, Rng& rng) {
  std::normal_distribution<double> gauss;
  FunctionVector e(space.dim());
  for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = gauss(rng);
  const double n = norm(space, e);
  return n == 0.0 ? FunctionVector(FunctionVector::Zero(e.size())) : FunctionVector(e * (eps / n));
}

Planted plant_sparse(const Dictionary& dict, int K, double eps, std::uint64_t trial_seed, std::uint64_t param) {
  if (K > dict.size()) throw ConfigurationError("planted sparsity exceeds dictionary size");
  Planted out;
  Rng support_rng = make_rng(trial_seed, "support", param);
  Rng coef_rng = make_rng(trial_seed, "coefficients", param);
  out.support = random_subset(static_cast<int>(dict.size()), K, support_rng);
  SparseRepresentation rep;
  for (int i : out.support) rep.set(i, bounded_coefficient(coef_rng));
  out.f0 = synthesize(dict, rep);
  if (eps > 0.0) {
    Rng noise_rng = make_rng(trial_seed, "noise", param);
    out.f0 += noise_of_norm(dict.space(), eps, noise_rng);
    out.eps = eps;
  }
  return out;
}

// frequency of each axis factor, parsed back from the trigonometric labels
std::vector<int> label_frequencies(const std::string& label) {
  std::vector<int> out;
  std::stringstream ss(label);
  std::string part;
  while (std::getline(ss, part, '|')) {
    if (part == "1")
      out.push_back(0);
    else
      out.push_back(std::stoi(part.substr(3)));
  }
  return out;
}

FunctionVector make_signal(const ExperimentConfig& cfg, const Dictionary& dict, std::uint64_t trial_seed,
                           std::uint64_t param, std::vector<int>* support) {
  const SignalModel& s = cfg.signal;
  const GridSpace& space = dict.space();
  if (s.model == "zero") return FunctionVector::Zero(space.dim());
  if (s.model == "dense") {
    Rng rng = make_rng(trial_seed, "dense", param);
    FunctionVector f = noise_of_norm(space, 1.0, rng);
    return f;
  }
  if (s.model == "powerlaw") {
    if (dict.kind() != DictionaryKind::trigonometric)
      throw ConfigurationError("powerlaw signals need a trigonometric dictionary");
    Rng rng = make_rng(trial_seed, "powerlaw", param);
    std::bernoulli_distribution sign;
    SparseRepresentation rep;
    for (Eigen::Index e = 0; e < dict.size(); ++e) {
      double weight = 1.0;
      for (int k : label_frequencies(dict.labels()[e]))
        weight *= std::pow(static_cast<double>(std::max(1, k)), -(s.decay_r + 0.5));
      rep.set(static_cast<int>(e), sign(rng) ? -weight : weight);
    }
    FunctionVector f = synthesize(dict, rep);
    if (s.noise > 0.0) {
      Rng noise_rng = make_rng(trial_seed, "noise", param);
      f += noise_of_norm(space, s.noise, noise_rng);
    }
    return f;
  }
  const int K = s.sparsity.empty() ? 1 : s.sparsity.front();
  Planted p = plant_sparse(dict, K, s.noise, trial_seed, param);
  if (support) *support = p.support;
  return p.f0;
}

GreedyTrace run_algorithm(const AlgorithmSpec& alg, const FunctionVector& f0, const Dictionary& dict,
                          std::size_t max_m) {
  max_m = std::min<std::size_t>(max_m, static_cast<std::size_t>(dict.size()));
  if (alg.name == "womp") return womp(f0, dict, alg.policy, max_m, alg.solver);
  if (alg.name == "wcga") return wcga(f0, dict, alg.policy, max_m, alg.solver);
  return tga(f0, dict, max_m);
}

std::uint64_t trial_seed(const ExperimentConfig& cfg, std::size_t trial) {
  return substream_seed(cfg.seed, "trial", trial);
}

struct TrialOutput {
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> violations;
  json extra = json::object();
};

std::vector<TrialOutput> run_trials(const ExperimentConfig& cfg, unsigned threads,
                                    const std::function<TrialOutput(std::size_t)>& trial) {
  std::vector<TrialOutput> out(static_cast<std::size_t>(cfg.trials));
  parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = trial(i); });
  return out;
}

ExperimentResult assemble(const ExperimentConfig& cfg, std::vector<std::string> columns,
                          std::vector<TrialOutput>& trials) {
  ExperimentResult result;
  result.config = cfg;
  result.table.columns = std::move(columns);
  for (auto& t : trials) {
    for (auto& r : t.rows) result.table.rows.push_back(std::move(r));
    for (auto& v : t.violations) result.violations.push_back(std::move(v));
  }
  result.summary = {{"tool", "sparsegreedy"},
                    {"version", kToolVersion},
                    {"kind", to_string(cfg.kind)},
                    {"config", cfg.to_json()},
                    {"rows", result.table.rows.size()}};
  return result;
}

void finish_summary(ExperimentResult& result) {
  result.summary["violations"] = result.violations.size();
  json msgs = json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(result.violations.size(), 50); ++i)
    msgs.push_back(result.violations[i]);
  result.summary["violation_messages"] = std::move(msgs);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double max_of(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : *std::max_element(v.begin(), v.end());
}

void add_trace_violations(const GreedyTrace& trace, const AlgorithmSpec& alg, const std::string& where,
                          std::vector<std::string>& out) {
  if (alg.name == "tga") return;
  for (auto& v : trace_violations(trace, alg.policy, alg.solver.kkt_tol)) out.push_back(where + ": " + v);
}

OracleConfig single_threaded(OracleConfig o) {
  o.threads = 1;
  return o;
}

}  // namespace

// ---------------------------------------------------------------- recovery

ExperimentResult run_recovery(const ExperimentConfig& cfg, unsigned threads) {
  const BudgetExpression budget(cfg.budget);
  const bool shared = !cfg.resample_dictionary;
  std::optional<Dictionary> fixed;
  if (shared) fixed.emplace(make_dictionary(cfg));
  const OracleConfig oracle = single_threaded(cfg.oracle);

  auto trials = run_trials(cfg, threads, [&](std::size_t t) {
    TrialOutput out;
    const std::uint64_t ts = trial_seed(cfg, t);
    const Dictionary dict = shared ? *fixed : make_dictionary(cfg, t);
    const auto n_elems = static_cast<std::size_t>(dict.size());
    for (std::size_t pi = 0; pi < cfg.signal.sparsity.size(); ++pi) {
      const int K = cfg.signal.sparsity[pi];
      const auto start = Clock::now();
      const std::size_t iters = std::min(budget.evaluate(static_cast<std::size_t>(K)), n_elems);
      std::vector<Cell> row{static_cast<std::int64_t>(t), std::to_string(ts), std::int64_t{K},
                            static_cast<std::int64_t>(iters)};
      try {
        const Planted planted = plant_sparse(dict, K, cfg.signal.noise, ts, pi);
        const double f0_norm = norm(dict.space(), planted.f0);
        const GreedyTrace trace = run_algorithm(cfg.algorithm, planted.f0, dict, iters);
        const std::string where = "trial " + std::to_string(t) + " K=" + std::to_string(K);
        add_trace_violations(trace, cfg.algorithm, where, out.violations);

        const double residual = trace.residual_at(iters);
        const bool contains = std::all_of(planted.support.begin(), planted.support.end(), [&](int i) {
          return std::find(trace.selected.begin(), trace.selected.end(), i) != trace.selected.end();
        });
        const bool recovered = residual <= kExactZero * f0_norm && contains;

        double sigma = 0.0;
        if (planted.eps > 0.0) {
          sigma = binomial_capped(n_elems, K, oracle.cap) <= oracle.cap
                      ? sigma_m_exact(planted.f0, dict, K, oracle).value
                      : std::numeric_limits<double>::quiet_NaN();
        }
        const double ratio = std::isnan(sigma) ? sigma : lebesgue_ratio(residual, sigma, f0_norm);

        std::int64_t checks = 0;
        if (cfg.oracle_floor) {
          // σ_j = 0 for j ≥ K on noiseless planted signals
          const std::size_t last = planted.eps > 0.0 ? iters : std::min<std::size_t>(iters, K > 0 ? K - 1 : 0);
          for (std::size_t j = 1; j <= last; ++j) {
            if (binomial_capped(n_elems, j, oracle.cap) > oracle.cap) break;
            const double s = sigma_m_exact(planted.f0, dict, j, oracle).value;
            ++checks;
            if (trace.residual_at(j) < s - oracle_slack(f0_norm))
              out.violations.push_back(where + ": residual below sigma_" + std::to_string(j));
          }
        }
        row.insert(row.end(), {static_cast<std::int64_t>(trace.iterations()), residual, sigma, ratio, recovered,
                               checks, cfg.timing ? seconds_since(start) : 0.0, std::string()});
      } catch (const EnumerationCapError&) {
        throw;
      } catch (const std::exception& e) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.insert(row.end(), {std::int64_t{0}, nan, nan, nan, false, std::int64_t{0},
                               cfg.timing ? seconds_since(start) : 0.0, std::string(e.what())});
      }
      out.rows.push_back(std::move(row));
    }
    return out;
  });

  ExperimentResult result = assemble(cfg,
                                     {"trial", "seed", "K", "budget", "iterations_used", "residual_norm", "sigma_m",
                                      "lebesgue_ratio", "recovered", "oracle_checks", "wall_time", "error"},
                                     trials);
  json per_k = json::array();
  for (std::size_t pi = 0; pi < cfg.signal.sparsity.size(); ++pi) {
    std::size_t ok = 0, errors = 0;
    std::vector<double> ratios;
    for (std::size_t t = 0; t < trials.size(); ++t) {
      const auto& row = result.table.rows[t * cfg.signal.sparsity.size() + pi];
      if (!std::get<std::string>(row[11]).empty()) ++errors;
      if (std::get<bool>(row[8])) ++ok;
      const double r = std::get<double>(row[7]);
      if (!std::isnan(r)) ratios.push_back(r);
    }
    per_k.push_back({{"K", cfg.signal.sparsity[pi]},
                     {"trials", trials.size()},
                     {"recovered", ok},
                     {"success_rate", static_cast<double>(ok) / static_cast<double>(trials.size())},
                     {"errors", errors},
                     {"max_ratio", json_number(max_of(ratios))},
                     {"median_ratio", json_number(median(ratios))}});
  }
  result.summary["per_sparsity"] = std::move(per_k);
  finish_summary(result);
  return result;
}

// ---------------------------------------------------------------- lebesgue

ExperimentResult run_lebesgue(const ExperimentConfig& cfg, unsigned threads) {
  const BudgetExpression budget(cfg.budget);
  const bool shared = !cfg.resample_dictionary;
  std::optional<Dictionary> fixed;
  if (shared) fixed.emplace(make_dictionary(cfg));
  const OracleConfig oracle = single_threaded(cfg.oracle);
  {
    const Dictionary probe = shared ? *fixed : make_dictionary(cfg, 0);
    for (int m : cfg.m_values) {
      if (binomial_capped(probe.size(), std::min<Eigen::Index>(m, probe.size()), oracle.cap) > oracle.cap)
        throw ConfigurationError("sigma_m oracle cap exceeded for m=" + std::to_string(m) +
                                 "; reduce the dictionary size or m");
    }
  }
  std::size_t max_budget = 0;
  for (int m : cfg.m_values) max_budget = std::max(max_budget, budget.evaluate(static_cast<std::size_t>(m)));

  auto trials = run_trials(cfg, threads, [&](std::size_t t) {
    TrialOutput out;
    const std::uint64_t ts = trial_seed(cfg, t);
    const Dictionary dict = shared ? *fixed : make_dictionary(cfg, t);
    const std::size_t iters_cap = std::min<std::size_t>(max_budget, dict.size());
    const std::string where = "trial " + std::to_string(t);
    std::optional<GreedyTrace> trace;
    FunctionVector f0;
    std::string error;
    const auto start = Clock::now();
    try {
      f0 = make_signal(cfg, dict, ts, 0, nullptr);
      trace = run_algorithm(cfg.algorithm, f0, dict, iters_cap);
      add_trace_violations(*trace, cfg.algorithm, where, out.violations);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double run_time = cfg.timing ? seconds_since(start) : 0.0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int m : cfg.m_values) {
      const std::size_t b = std::min(budget.evaluate(static_cast<std::size_t>(m)), iters_cap);
      std::vector<Cell> row{static_cast<std::int64_t>(t), std::to_string(ts), std::int64_t{m},
                            static_cast<std::int64_t>(b)};
      if (!trace) {
        row.insert(row.end(), {std::int64_t{0}, nan, nan, nan, false, run_time, error});
        out.rows.push_back(std::move(row));
        continue;
      }
      const auto start_m = Clock::now();
      std::string row_error;
      double sigma = nan, ratio = nan;
      const double f0_norm = norm(dict.space(), f0);
      const double residual = trace->residual_at(b);
      try {
        sigma = sigma_m_exact(f0, dict, static_cast<std::size_t>(m), oracle).value;
        ratio = lebesgue_ratio(residual, sigma, f0_norm);
        if (cfg.oracle_floor && trace->residual_at(static_cast<std::size_t>(m)) < sigma - oracle_slack(f0_norm))
          out.violations.push_back(where + ": residual below sigma_" + std::to_string(m));
      } catch (const std::exception& e) {
        row_error = e.what();
      }
      row.insert(row.end(), {static_cast<std::int64_t>(std::min(b, trace->iterations())), residual, sigma, ratio,
                             residual <= kExactZero * f0_norm,
                             cfg.timing ? run_time + seconds_since(start_m) : 0.0, row_error});
      out.rows.push_back(std::move(row));
    }
    return out;
  });

  ExperimentResult result = assemble(cfg,
                                     {"trial", "seed", "m", "budget", "iterations_used", "residual_norm", "sigma_m",
                                      "lebesgue_ratio", "recovered", "wall_time", "error"},
                                     trials);
  json per_m = json::array();
  bool all_finite = true;
  for (std::size_t mi = 0; mi < cfg.m_values.size(); ++mi) {
    std::vector<double> ratios;
    for (std::size_t t = 0; t < trials.size(); ++t) {
      const double r = std::get<double>(result.table.rows[t * cfg.m_values.size() + mi][7]);
      ratios.push_back(r);
      if (!std::isfinite(r)) all_finite = false;
    }
    per_m.push_back({{"m", cfg.m_values[mi]},
                     {"budget", budget.evaluate(static_cast<std::size_t>(cfg.m_values[mi]))},
                     {"max_ratio", json_number(max_of(ratios))},
                     {"median_ratio", json_number(median(ratios))}});
  }
  result.summary["per_m"] = std::move(per_m);
  result.summary["all_ratios_finite"] = all_finite;
  finish_summary(result);
  return result;
}

// ---------------------------------------------------------------- rate bound

ExperimentResult run_rate_bound(const ExperimentConfig& cfg, unsigned threads) {
  if (cfg.resample_dictionary) throw ConfigurationError("rate_bound needs a fixed dictionary for exact V");
  if (cfg.signal.sparsity.size() != 1) throw ConfigurationError("rate_bound takes a single sparsity K");
  const Dictionary dict = make_dictionary(cfg);
  const int K = cfg.signal.sparsity.front();
  if (K < 1 || K > dict.size()) throw ConfigurationError("rate_bound sparsity must lie in [1, N]");
  int max_m = 0;
  for (int m : cfg.m_values) max_m = std::max(max_m, m);
  if (max_m > dict.size()) throw ConfigurationError("rate_bound m exceeds dictionary size");
  const int depth = cfg.rate_depth > 0 ? cfg.rate_depth : std::min<int>(dict.size(), K + max_m);
  if (depth < K + max_m && depth < dict.size())
    throw ConfigurationError("rate_bound depth must cover K + max m");

  AnalysisConfig acfg = cfg.analysis;
  acfg.threads = threads;
  const ConstantEstimate V = ell1_incoherence_V(dict, K, depth, cfg.rate_r, acfg);
  const SmoothnessConstants sc = smoothness_constants(dict.space().p());
  const double t_weak = cfg.algorithm.policy.t;

  auto trials = run_trials(cfg, threads, [&](std::size_t t) {
    TrialOutput out;
    const std::uint64_t ts = trial_seed(cfg, t);
    const std::string where = "trial " + std::to_string(t);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    try {
      const Planted planted = plant_sparse(dict, K, cfg.signal.noise, ts, 0);
      const GreedyTrace trace = run_algorithm(cfg.algorithm, planted.f0, dict, static_cast<std::size_t>(max_m));
      add_trace_violations(trace, cfg.algorithm, where, out.violations);
      const double f0_norm = norm(dict.space(), planted.f0);
      for (int m : cfg.m_values) {
        const double measured = trace.residual_at(static_cast<std::size_t>(m));
        DecayBoundInputs in;
        in.sparsity = static_cast<std::size_t>(K);
        in.r = cfg.rate_r;
        in.smoothness = sc;
        in.V = V.value;
        in.t = t_weak;
        in.eps = planted.eps;
        in.m = static_cast<std::size_t>(m);
        in.k = 0;
        in.norm_fk = trace.residual_at(0);
        const double bound0 = sparse_decay_bound(in);
        // the guarantee holds from every starting point k ≤ m
        double min_slack = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= m; ++k) {
          in.k = static_cast<std::size_t>(k);
          in.norm_fk = trace.residual_at(static_cast<std::size_t>(k));
          min_slack = std::min(min_slack, sparse_decay_bound(in) - measured);
        }
        const bool violation = min_slack < -1e-8;
        if (violation) out.violations.push_back(where + ": decay bound violated at m=" + std::to_string(m));
        if (cfg.oracle_floor && binomial_capped(dict.size(), m, cfg.oracle.cap) <= cfg.oracle.cap &&
            (planted.eps > 0.0 || m < K)) {
          const double s = sigma_m_exact(planted.f0, dict, static_cast<std::size_t>(m), single_threaded(cfg.oracle)).value;
          if (measured < s - oracle_slack(f0_norm))
            out.violations.push_back(where + ": residual below sigma_" + std::to_string(m));
        }
        out.rows.push_back({static_cast<std::int64_t>(t), std::to_string(ts), std::int64_t{K}, std::int64_t{m},
                            planted.eps, measured, bound0, min_slack, V.value, violation, std::string()});
      }
    } catch (const std::exception& e) {
      for (int m : cfg.m_values)
        out.rows.push_back({static_cast<std::int64_t>(t), std::to_string(ts), std::int64_t{K}, std::int64_t{m},
                            cfg.signal.noise, nan, nan, nan, V.value, false, std::string(e.what())});
    }
    return out;
  });

  ExperimentResult result = assemble(
      cfg, {"trial", "seed", "K", "m", "eps", "measured", "bound", "min_slack", "V", "violation", "error"}, trials);
  std::size_t violations = 0, pairs = 0, errors = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (const auto& row : result.table.rows) {
    if (!std::get<std::string>(row[10]).empty()) {
      ++errors;
      continue;
    }
    ++pairs;
    if (std::get<bool>(row[9])) ++violations;
    min_slack = std::min(min_slack, std::get<double>(row[7]));
  }
  result.summary["V"] = to_json(V);
  result.summary["depth"] = depth;
  result.summary["r"] = cfg.rate_r;
  result.summary["decay_constant"] = decay_constant(sc, V.value, t_weak);
  result.summary["smoothness"] = {{"q", sc.q}, {"gamma", sc.gamma}, {"q_dual", sc.q_dual}};
  result.summary["pairs"] = pairs;
  result.summary["bound_violations"] = violations;
  result.summary["errors"] = errors;
  result.summary["min_slack"] = json_number(min_slack);
  finish_summary(result);
  return result;
}

// ---------------------------------------------------------------- decay demo

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  const std::size_t n = lx.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

ExperimentResult run_decay_demo(const ExperimentConfig& cfg, unsigned threads) {
  const Dictionary dict = make_dictionary(cfg);
  int max_m = 0;
  for (int m : cfg.m_values) max_m = std::max(max_m, m);
  max_m = std::min<int>(max_m, dict.size());
  std::vector<double> slopes(static_cast<std::size_t>(cfg.trials), std::numeric_limits<double>::quiet_NaN());

  auto trials = run_trials(cfg, threads, [&](std::size_t t) {
    TrialOutput out;
    const std::uint64_t ts = trial_seed(cfg, t);
    const FunctionVector f0 = make_signal(cfg, dict, ts, 0, nullptr);
    const GreedyTrace trace = run_algorithm(cfg.algorithm, f0, dict, static_cast<std::size_t>(max_m));
    add_trace_violations(trace, cfg.algorithm, "trial " + std::to_string(t), out.violations);
    std::vector<double> xs, ys;
    const double f0_norm = norm(dict.space(), f0);
    for (int m : cfg.m_values) {
      if (m < 1) continue;
      const double r = trace.residual_at(static_cast<std::size_t>(m));
      // residuals at solver precision carry no decay information
      if (r > kExactZero * f0_norm) {
        xs.push_back(m);
        ys.push_back(r);
      }
      out.rows.push_back({static_cast<std::int64_t>(t), std::to_string(ts), std::int64_t{m}, r});
    }
    slopes[t] = fit_loglog_slope(xs, ys);
    return out;
  });

  ExperimentResult result = assemble(cfg, {"trial", "seed", "m", "residual_norm"}, trials);
  json s = json::array();
  std::vector<double> finite;
  for (double v : slopes) {
    s.push_back(json_number(v));
    if (std::isfinite(v)) finite.push_back(v);
  }
  result.summary["slopes"] = std::move(s);
  result.summary["median_slope"] = json_number(median(finite));
  result.summary["note"] = "informational: asymptotic decay rates are not checkable at this scale";
  finish_summary(result);
  return result;
}

// ---------------------------------------------------------------- bilinear

ExperimentResult run_bilinear(const ExperimentConfig& cfg, unsigned threads) {
  std::optional<Matrix2D> given;
  if (!cfg.matrix_csv.empty()) {
    std::ifstream in(cfg.matrix_csv);
    if (!in) throw ConfigurationError("cannot open matrix CSV " + cfg.matrix_csv);
    given.emplace(read_matrix_csv(in));
  }
  auto trials = run_trials(cfg, threads, [&](std::size_t t) {
    TrialOutput out;
    const std::uint64_t ts = trial_seed(cfg, t);
    Rng rng = make_rng(ts, "matrix");
    Eigen::MatrixXd values;
    if (given) {
      values = given->values();
    } else {
      std::uniform_int_distribution<int> rows(cfg.matrix_rows.first, cfg.matrix_rows.second);
      std::uniform_int_distribution<int> cols(cfg.matrix_cols.first, cfg.matrix_cols.second);
      const int r = rows(rng), c = cols(rng);
      std::normal_distribution<double> gauss;
      values.resize(r, c);
      for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) values(i, j) = gauss(rng);
    }
    const Matrix2D f = given ? *given : Matrix2D(values);
    const int M = static_cast<int>(std::min(f.rows(), f.cols()));
    RankOneConfig rcfg;
    rcfg.seed = substream_seed(ts, "restarts");
    const RankOneApproximation approx = greedy_rank_one(f, M, rcfg);
    for (int m = 1; m <= M; ++m) {
      const double theta = theta_M(f, m);
      const double diff = std::abs(approx.residual_norms[m] - theta);
      if (diff > 1e-8)
        out.violations.push_back("trial " + std::to_string(t) + ": greedy rank-one residual differs from the "
                                 "singular-value tail at M=" + std::to_string(m));
      out.rows.push_back({static_cast<std::int64_t>(t), std::to_string(ts), static_cast<std::int64_t>(f.rows()),
                          static_cast<std::int64_t>(f.cols()), std::int64_t{m}, approx.residual_norms[m], theta,
                          diff});
    }
    return out;
  });
  ExperimentResult result =
      assemble(cfg, {"trial", "seed", "rows", "cols", "M", "greedy_residual", "theta", "abs_diff"}, trials);
  double worst = 0.0;
  for (const auto& row : result.table.rows) worst = std::max(worst, std::get<double>(row[7]));
  result.summary["max_abs_diff"] = worst;
  finish_summary(result);
  return result;
}

// ---------------------------------------------------------------- analyze

ExperimentResult run_analyze(const ExperimentConfig& cfg, unsigned threads) {
  const Dictionary dict = make_dictionary(cfg);
  AnalysisConfig acfg = cfg.analysis;
  acfg.threads = threads;
  const PropertyReport report = analyze(dict, cfg.analysis_request, acfg);

  ExperimentResult result;
  result.config = cfg;
  result.table.columns = {"quantity", "s", "K", "D", "r", "value", "method"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto method = [](const ConstantEstimate& c) { return std::string(to_string(c.method)); };
  result.table.rows.push_back({std::string("coherence"), std::int64_t{0}, std::int64_t{0}, std::int64_t{0}, nan,
                               report.coherence, std::string("exact")});
  for (const auto& [s, c] : report.rip)
    result.table.rows.push_back({std::string("rip_delta"), std::int64_t{s}, std::int64_t{0}, std::int64_t{0}, nan,
                                 c.value, method(c)});
  for (const auto& [kd, c] : report.unconditionality)
    result.table.rows.push_back({std::string("U"), std::int64_t{0}, std::int64_t{kd.first}, std::int64_t{kd.second},
                                 nan, c.value, method(c)});
  for (const auto& [kr, c] : report.nikolskii)
    result.table.rows.push_back({std::string("C1"), std::int64_t{0}, std::int64_t{kr.first}, std::int64_t{0},
                                 kr.second, c.value, method(c)});
  for (const auto& [kdr, c] : report.ell1_incoherence)
    result.table.rows.push_back({std::string("V"), std::int64_t{0}, std::int64_t{std::get<0>(kdr)},
                                 std::int64_t{std::get<1>(kdr)}, std::get<2>(kdr), c.value, method(c)});
  result.summary = {{"tool", "sparsegreedy"},
                    {"version", kToolVersion},
                    {"kind", to_string(cfg.kind)},
                    {"config", cfg.to_json()},
                    {"dictionary", dict.descriptor()},
                    {"elements", dict.size()},
                    {"report", to_json(report)}};
  // the implications between the constants, checked where both sides are exact
  for (const auto& [kdr, v] : report.ell1_incoherence) {
    const auto [K, D, r] = kdr;
    const auto c1 = report.nikolskii.find({K, r});
    const auto u = report.unconditionality.find({K, D});
    if (c1 == report.nikolskii.end() || u == report.unconditionality.end()) continue;
    if (v.method != Method::exact || c1->second.method != Method::exact || u->second.method != Method::exact)
      continue;
    if (v.infinite() || c1->second.infinite() || u->second.infinite()) continue;
    const std::string tag = "K=" + std::to_string(K) + " D=" + std::to_string(D) + " r=" + std::to_string(r);
    if (c1->second.value > v.value + 1e-8) result.violations.push_back(tag + ": C1 exceeds V");
    if (u->second.value > v.value * std::pow(K, r) + 1e-8) result.violations.push_back(tag + ": U exceeds V K^r");
    if (v.value > c1->second.value * u->second.value + 1e-8) result.violations.push_back(tag + ": V exceeds C1 U");
  }
  finish_summary(result);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads) {
  switch (cfg.kind) {
    case ExperimentKind::recovery: return run_recovery(cfg, threads);
    case ExperimentKind::lebesgue: return run_lebesgue(cfg, threads);
    case ExperimentKind::rate_bound: return run_rate_bound(cfg, threads);
    case ExperimentKind::bilinear: return run_bilinear(cfg, threads);
    case ExperimentKind::analyze: return run_analyze(cfg, threads);
    case ExperimentKind::decay_demo: return run_decay_demo(cfg, threads);
  }
  throw ConfigurationError("unknown experiment kind");
}

}  // namespace sparsegreedy
