// sgreedy: experiment runner for the greedy approximation library.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "sparsegreedy/errors.hpp"
#include "sparsegreedy/harness.hpp"

namespace sg = sparsegreedy;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitViolation = 3;

int run(sg::ExperimentKind kind, const std::string& config_path, const std::string& out_dir,
        std::optional<std::uint64_t> seed, unsigned threads) {
  nlohmann::json j;
  {
    std::ifstream in(config_path);
    if (!in) throw sg::ConfigurationError("cannot open config " + config_path);
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw sg::ConfigurationError(std::string("config is not valid JSON: ") + e.what());
    }
  }
  if (j.contains("kind") && sg::experiment_kind_from_string(j["kind"].get<std::string>()) != kind)
    throw sg::ConfigurationError("config kind '" + j["kind"].get<std::string>() + "' does not match subcommand");
  j["kind"] = sg::to_string(kind);
  if (seed) j["seed"] = *seed;

  const sg::ExperimentConfig cfg = sg::ExperimentConfig::from_json(j);
  const sg::ExperimentResult result = sg::run_experiment(cfg, threads);

  std::string dir = out_dir.empty() ? cfg.output : out_dir;
  if (dir.empty()) dir = ".";
  sg::write_outputs(result, dir);

  nlohmann::json brief = result.summary;
  brief.erase("config");
  std::cout << brief.dump(2) << '\n';
  for (const auto& v : result.violations) std::cerr << "violation: " << v << '\n';
  return result.violations.empty() ? 0 : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Greedy sparse approximation experiments"};
  app.set_version_flag("--version", sg::kToolVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;

  const std::pair<const char*, sg::ExperimentKind> commands[] = {
      {"analyze", sg::ExperimentKind::analyze},   {"recover", sg::ExperimentKind::recovery},
      {"lebesgue", sg::ExperimentKind::lebesgue}, {"ratebound", sg::ExperimentKind::rate_bound},
      {"bilinear", sg::ExperimentKind::bilinear}, {"decay", sg::ExperimentKind::decay_demo},
  };
  for (const auto& [name, kind] : commands) {
    CLI::App* sub = app.add_subcommand(name, std::string("run a ") + sg::to_string(kind) + " experiment");
    sub->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory for result.csv and summary.json");
    sub->add_option("--seed", seed, "root seed; overrides the config");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  sg::ExperimentKind kind{};
  for (const auto& [name, k] : commands)
    if (app.got_subcommand(name)) kind = k;

  try {
    return run(kind, config_path, out_dir, seed, threads);
  } catch (const sg::ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sg::StructuralError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sg::DomainError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
