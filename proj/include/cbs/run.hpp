#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cbs/config.hpp"

namespace cbs {

struct RunReport {
  std::vector<std::filesystem::path> files;
  /// Non-converged quadrature, oracle residuals above tolerance, or an oracle
  /// discrepancy above 1e-3.
  bool flagged = false;
  std::vector<std::string> flags;
  std::string summary;
};

/// Executes cfg.mode and writes the tables plus a <prefix>_meta.json sidecar
/// into cfg.output_dir (created if needed).
RunReport run(const RunConfig& cfg);

/// Version string recorded in the metadata.
std::string_view code_version();

}  // namespace cbs
