#pragma once

#include <complex>
#include <functional>
#include <string_view>
#include <vector>

namespace cbs {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Physical inputs of the two-atom problem.
///
/// Every frequency in the library is an offset from the laser frequency and is
/// expressed in the same unit as `gamma`. `gamma` is the decay rate of the
/// excited-state population; the dipole coherence decays at gamma/2.
struct AtomFieldParams {
  double rabi = 0.1;
  double detuning = -5.0;
  double gamma = 1.0;
  /// |g|^2 prefactor of the double-scattering intensities.
  double coupling_mod2 = 1.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Weak probe of Rabi amplitude `value` entering the drive as value * exp(-i nu t).
struct ProbeAmplitude {
  cplx value;
  double nu = 0.0;
};

enum class SpectrumLabel { P0, P1, P2, Ladder, Crossed, Oracle };

std::string_view to_string(SpectrumLabel label);

/// Elastic delta line: weight * delta(omega - position).
struct SpectralLine {
  double position = 0.0;
  cplx weight;
};

/// Finite set of delta lines plus a smooth density that can be evaluated at any
/// frequency offset.
class SpectralDistribution {
 public:
  using SmoothFn = std::function<cplx(double)>;

  SpectralDistribution() = default;
  SpectralDistribution(SpectrumLabel label, std::vector<SpectralLine> lines, SmoothFn smooth);

  SpectrumLabel label() const { return label_; }
  const std::vector<SpectralLine>& lines() const { return lines_; }
  cplx smooth(double omega) const { return smooth_ ? smooth_(omega) : cplx{}; }
  const SmoothFn& smooth_fn() const { return smooth_; }

  /// Sum of all line weights.
  cplx line_weight() const;

 private:
  SpectrumLabel label_ = SpectrumLabel::P0;
  std::vector<SpectralLine> lines_;
  SmoothFn smooth_;
};

inline constexpr double kLineMergeTolerance = 1e-9;   // in units of gamma
inline constexpr double kLineDropTolerance = 1e-14;

/// Saturation parameter s = (Omega^2/2) / (delta^2 + gamma^2/4).
double saturation(const AtomFieldParams& params);

/// sqrt(Omega^2 + delta^2), the dressed-state splitting.
double generalized_rabi(const AtomFieldParams& params);

/// Sums lines closer than 1e-9 gamma and drops lines with |weight| < 1e-14.
/// The result is sorted by position.
std::vector<SpectralLine> merge_lines(std::vector<SpectralLine> lines, double gamma = 1.0);
SpectralDistribution merge_lines(const SpectralDistribution& dist, double gamma = 1.0);

}  // namespace cbs
