// cbs: double-scattering coherent backscattering spectra of two driven atoms.

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "cbs/config.hpp"
#include "cbs/run.hpp"

namespace {

struct Subcommand {
  const char* name;
  cbs::RunMode mode;
  const char* help;
};

constexpr Subcommand kSubcommands[] = {
    {"kernels", cbs::RunMode::Kernels, "Tabulate the P0, P1, P2 kernels"},
    {"spectra", cbs::RunMode::Spectra, "Ladder and crossed spectra, lines and totals"},
    {"totals", cbs::RunMode::Totals, "Frequency-integrated ladder and crossed intensities"},
    {"verify", cbs::RunMode::Verify, "Spectra compared against the two-atom master equation"},
    {"sweep", cbs::RunMode::Sweep, "Totals over a grid of Rabi frequencies and detunings"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coherent backscattering spectra from single-atom Bloch equations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cbs::code_version()));

  std::string config_path;
  app.add_option("-c,--config", config_path, "YAML configuration file (flat key: value)")
      ->check(CLI::ExistingFile);

  std::map<std::string, std::optional<std::string>> overrides;
  for (const auto& key : cbs::config_keys()) {
    if (key == "mode") continue;
    auto& slot = overrides[key];
    app.add_option_function<std::string>(
           "--" + key, [&slot](const std::string& v) { slot = v; },
           "Override configuration key '" + key + "'")
        ->group("Configuration overrides");
  }

  std::optional<cbs::RunMode> mode;
  for (const auto& sc : kSubcommands) {
    auto* sub = app.add_subcommand(sc.name, sc.help);
    sub->callback([&mode, m = sc.mode] { mode = m; });
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    cbs::RunConfig cfg = config_path.empty() ? cbs::parse_config("") : cbs::load_config(config_path);
    for (const auto& [key, value] : overrides)
      if (value) cbs::apply_override(cfg, key, *value);
    cfg.mode = *mode;
    cfg.validate();

    const cbs::RunReport report = cbs::run(cfg);
    std::cout << report.summary << '\n';
    for (const auto& f : report.files) std::cout << "wrote " << f.string() << '\n';
    for (const auto& flag : report.flags) std::cerr << "flagged: " << flag << '\n';
    return report.flagged ? 2 : 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
