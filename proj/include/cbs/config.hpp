#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cbs/oracle.hpp"
#include "cbs/phys.hpp"
#include "cbs/transport.hpp"

namespace cbs {

enum class RunMode { Kernels, Spectra, Totals, Verify, Sweep };
enum class Normalization { None, UnitPeak };

std::string_view to_string(RunMode m);
std::string_view to_string(Normalization n);

/// Everything a run needs. Defaults: rabi 0.1, detuning -5, 2001 grid points
/// over 3 W either side of the laser.
struct RunConfig {
  AtomFieldParams params;
  int grid_points = 2001;
  double range_multiplier = 3.0;
  TransportOptions transport;
  RunMode mode = RunMode::Spectra;
  std::vector<double> sweep_rabi;
  std::vector<double> sweep_detuning;
  std::string output_dir = ".";
  std::string prefix = "cbs";
  Normalization normalization = Normalization::None;
  /// Probe offset at which the kernels table tabulates P1 and P2.
  double probe_offset = 0.0;
  OracleOptions oracle;

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
};

/// Every recognised key, in documentation order.
const std::vector<std::string>& config_keys();

/// Flat YAML mapping of key: value. Unknown keys and malformed values throw
/// std::invalid_argument naming the key. An empty document gives the defaults.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Set one key from its textual value (YAML scalar syntax; list keys also
/// accept comma-separated values).
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

}  // namespace cbs
