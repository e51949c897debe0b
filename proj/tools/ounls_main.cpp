// ounls: command-line front end for the OU-NLS simulator and its scenarios.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ounls/config.hpp"
#include "ounls/io.hpp"

namespace {

using namespace ounls;

struct Options {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void print_report(const ScenarioReport& rep, const std::string& label) {
  for (const auto& c : rep.checks) {
    std::printf("%s %s %s value=%s limit=%s%s%s\n", c.pass ? "PASS" : "FAIL", label.c_str(),
                c.name.c_str(), format_double(c.value).c_str(), format_double(c.limit).c_str(),
                c.detail.empty() ? "" : " ", c.detail.c_str());
  }
  for (const auto& e : rep.ensembles) {
    std::printf("%s %s %s max_coarse=%s max_fine=%s change=%s ceiling=%s\n", e.pass ? "PASS" : "FAIL",
                label.c_str(), e.label.c_str(), format_double(e.coarse.max).c_str(),
                format_double(e.fine.max).c_str(), format_double(e.relative_change).c_str(),
                format_double(e.ceiling).c_str());
  }
  std::fflush(stdout);
}

void apply_common(ScenarioConfig& cfg, const Options& opt) {
  if (opt.seed) {
    cfg.seed = *opt.seed;
    if (auto* r = std::get_if<RandomRecipe>(&cfg.initial)) r->seed = *opt.seed;
  }
  if (opt.threads) cfg.threads = *opt.threads;
  if (!opt.out.empty()) cfg.output = opt.out;
  cfg.validate();
}

int run_single(const std::string& scenario, const Options& opt) {
  // The subcommand decides the scenario even when the config names another.
  std::vector<std::string> overrides = opt.overrides;
  overrides.push_back("run.scenario=" + scenario);
  ScenarioConfig cfg = opt.config.empty() ? parse_config("", overrides)
                                          : parse_config_file(opt.config, overrides);
  apply_common(cfg, opt);
  const std::string start = utc_now();
  const auto rep = run_scenario(cfg);
  emit_report(rep, cfg, cfg.output, start);
  print_report(rep, scenario);
  return rep.pass() ? 0 : 2;
}

int run_all(const Options& opt) {
  if (!opt.config.empty() || !opt.overrides.empty()) {
    throw ConfigError("'all' runs the built-in acceptance configurations; --config and --set do not apply");
  }
  const std::filesystem::path root = opt.out.empty() ? "out" : opt.out;
  bool pass = true;
  int index = 0;
  for (auto cfg : acceptance_configs()) {
    apply_common(cfg, opt);
    char name[64];
    std::snprintf(name, sizeof name, "%02d-%s-%s", index++, cfg.scenario.c_str(),
                  to_string(cfg.model.model).c_str());
    cfg.output = (root / name).string();
    const std::string start = utc_now();
    const auto rep = run_scenario(cfg);
    emit_report(rep, cfg, cfg.output, start);
    print_report(rep, name);
    pass = pass && rep.pass();
  }
  return pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral simulator and verification scenarios for NLS with OU confinement"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  Options opt;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "integrate one configuration and write diagnostics"},
      {"conservation", "mass and energy drift audit at dt and dt/2"},
      {"strichartz", "Strichartz ratio ensembles at two resolutions"},
      {"embeddings", "weighted Sobolev and nonlinear-estimate ensembles"},
      {"scattering", "Cauchy ladder of linear pullbacks (NonDiv)"},
      {"blowup", "focusing Div run with virial certificate and control"},
      {"morawetz", "interaction Morawetz derivative against its bound"},
      {"identity", "OU eigenvalues and the divergence/non-divergence identity"},
      {"all", "every acceptance scenario with the built-in configurations"},
  };
  std::string chosen;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "key-value config file")->check(CLI::ExistingFile);
    sub->add_option("--set", opt.overrides, "override section.key=value (repeatable)");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--seed", opt.seed, "ensemble and random-data seed");
    sub->add_option("--threads", opt.threads, "worker threads for ensembles")->check(CLI::PositiveNumber);
    sub->callback([&chosen, n = name] { chosen = n; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    return chosen == "all" ? run_all(opt) : run_single(chosen, opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
