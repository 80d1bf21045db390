// opgrowth <otoc|scramble|certify|protocol|sweep|graph-cert> [--config FILE] [--seed S] [--out DIR] [--jobs J]

#include <iostream>

#include "CLI11.hpp"
#include "opgrowth/config.hpp"
#include "opgrowth/errors.hpp"
#include "opgrowth/harness.hpp"

using namespace opgrowth;

int main(int argc, char** argv) {
  CLI::App app{"Operator growth experiments"};
  app.require_subcommand(1);
  std::string config_path, out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  struct Sub {
    Mode mode;
    const char* help;
  };
  const Sub subs[] = {{Mode::Otoc, "OTOC against 4(X_i(t)|P_j|X_i(t)) on a time grid"},
                      {Mode::Scramble, "sup average size and scrambling time of one instance"},
                      {Mode::Certify, "inequality suite: otoc, average size, Duhamel split, light-cone envelope"},
                      {Mode::Protocol, "protocol planner, Markov predictor and exact cross-check"},
                      {Mode::Sweep, "scrambling times over an (N, alpha, instance) grid"},
                      {Mode::GraphCert, "volume and surface constants of an interaction graph"}};
  std::vector<std::pair<CLI::App*, Mode>> commands;
  for (const auto& s : subs) {
    CLI::App* sc = app.add_subcommand(mode_name(s.mode), s.help);
    sc->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sc->add_option("--seed", seed, "64-bit seed (overrides the config)");
    sc->add_option("--out", out, std::string("output directory (default $") + kOutEnv + " or ./results)");
    sc->add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1u, 4096u));
    commands.emplace_back(sc, s.mode);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  Mode mode = Mode::Sweep;
  for (const auto& [sc, m] : commands)
    if (sc->parsed()) mode = m;

  ExperimentConfig cfg;
  try {
    cfg = config_path.empty() ? default_config(mode) : load_config(config_path, mode);
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    if (!out.empty()) cfg.out = out;
    cfg.out = resolve_out_dir(cfg.out);
    validate_config(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  const RunResult r = run(cfg, std::cerr);
  for (const auto& f : r.files) std::cout << cfg.out << '/' << f << '\n';
  return r.exit_code;
}
