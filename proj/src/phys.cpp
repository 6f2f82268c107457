#include "cbs/phys.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cbs {

void AtomFieldParams::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("invalid parameter '" + field + "': " + why);
  };
  if (!std::isfinite(gamma) || gamma <= 0.0) fail("gamma", "must be finite and > 0");
  if (!std::isfinite(rabi) || rabi < 0.0) fail("rabi", "must be finite and >= 0");
  if (!std::isfinite(detuning)) fail("detuning", "must be finite");
  if (!std::isfinite(coupling_mod2) || coupling_mod2 < 0.0)
    fail("coupling_mod2", "must be finite and >= 0");
}

std::string_view to_string(SpectrumLabel label) {
  switch (label) {
    case SpectrumLabel::P0: return "P0";
    case SpectrumLabel::P1: return "P1";
    case SpectrumLabel::P2: return "P2";
    case SpectrumLabel::Ladder: return "Ladder";
    case SpectrumLabel::Crossed: return "Crossed";
    case SpectrumLabel::Oracle: return "Oracle";
  }
  return "?";
}

SpectralDistribution::SpectralDistribution(SpectrumLabel label, std::vector<SpectralLine> lines,
                                           SmoothFn smooth)
    : label_(label), lines_(std::move(lines)), smooth_(std::move(smooth)) {}

cplx SpectralDistribution::line_weight() const {
  cplx total{};
  for (const auto& l : lines_) total += l.weight;
  return total;
}

double saturation(const AtomFieldParams& p) {
  return 0.5 * p.rabi * p.rabi / (p.detuning * p.detuning + 0.25 * p.gamma * p.gamma);
}

double generalized_rabi(const AtomFieldParams& p) { return std::hypot(p.rabi, p.detuning); }

std::vector<SpectralLine> merge_lines(std::vector<SpectralLine> lines, double gamma) {
  std::stable_sort(lines.begin(), lines.end(),
                   [](const SpectralLine& a, const SpectralLine& b) { return a.position < b.position; });
  const double tol = kLineMergeTolerance * gamma;
  std::vector<SpectralLine> merged;
  for (const auto& line : lines) {
    // Clusters are anchored at their first member so merging is order independent.
    if (!merged.empty() && std::abs(line.position - merged.back().position) < tol) {
      merged.back().weight += line.weight;
    } else {
      merged.push_back(line);
    }
  }
  std::erase_if(merged, [](const SpectralLine& l) { return std::abs(l.weight) < kLineDropTolerance; });
  return merged;
}

SpectralDistribution merge_lines(const SpectralDistribution& dist, double gamma) {
  return SpectralDistribution(dist.label(), merge_lines(dist.lines(), gamma), dist.smooth_fn());
}

}  // namespace cbs
