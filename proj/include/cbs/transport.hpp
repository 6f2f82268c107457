#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "cbs/kernels.hpp"
#include "cbs/phys.hpp"
#include "cbs/quadrature.hpp"

namespace cbs {

/// Detection frequencies (offsets from the laser) plus the special frequencies
/// that are forced onto the grid.
struct FrequencyGrid {
  std::vector<double> points;
  std::vector<double> hints;

  /// n uniform points over [-m W, m W], W = max(gamma, sqrt(rabi^2 + detuning^2)),
  /// with the hints 0, +-W and -detuning merged in.
  static FrequencyGrid make_default(const AtomFieldParams& params, int n = 2001,
                                    double range_multiplier = 3.0);
  static FrequencyGrid uniform(double lo, double hi, int n, std::vector<double> hints = {});
  /// Throws std::invalid_argument unless points are strictly increasing and contain every hint.
  void validate() const;
};

struct TransportOptions {
  QuadOptions quad;
  /// Ordered atom pairs per unordered pair; multiplies both spectra.
  double pair_multiplicity = 2.0;
  int threads = 1;

  void validate() const;
};

struct PointEstimate {
  double value = 0.0;
  double abs_error = 0.0;
  /// |Im| / |Re| of the complex integral before the real part is taken.
  double imag_residue = 0.0;
  long evaluations = 0;
  bool converged = true;
};

struct SpectrumResult {
  SpectralDistribution distribution;
  std::vector<double> values;
  std::vector<double> abs_errors;
  std::vector<double> imag_residues;
  double line_error = 0.0;
  long evaluations = 0;
  bool converged = true;
};

/// Smooth ladder spectrum at one detection offset, in units of |g|^2 times
/// the pair multiplicity (both already applied).
PointEstimate ladder_smooth_at(const KernelSet& k, double omega_d, const TransportOptions& opts);
PointEstimate crossed_smooth_at(const KernelSet& k, double omega_d, const TransportOptions& opts);

/// Elastic lines of the ladder and crossed spectra. Both sit at offset 0.
std::vector<SpectralLine> ladder_lines(const KernelSet& k, const TransportOptions& opts,
                                       PointEstimate* diag = nullptr);
std::vector<SpectralLine> crossed_lines(const KernelSet& k, const TransportOptions& opts,
                                        PointEstimate* diag = nullptr);

SpectrumResult ladder_spectrum(std::shared_ptr<const KernelSet> k, const FrequencyGrid& grid,
                               const TransportOptions& opts = {});
SpectrumResult crossed_spectrum(std::shared_ptr<const KernelSet> k, const FrequencyGrid& grid,
                                const TransportOptions& opts = {});

struct Totals {
  double ladder_elastic = 0.0;
  double ladder_inelastic = 0.0;
  double crossed_elastic = 0.0;
  double crossed_inelastic = 0.0;
  double ladder_error = 0.0;
  double crossed_error = 0.0;
  bool converged = true;

  double ladder() const { return ladder_elastic + ladder_inelastic; }
  double crossed() const { return crossed_elastic + crossed_inelastic; }
};

/// Frequency-integrated intensities: line weights plus the integral of the
/// smooth part over all detection offsets.
Totals integrate_total(const KernelSet& k, const SpectralDistribution& ladder,
                       const SpectralDistribution& crossed, const TransportOptions& opts = {});

struct CbsResult {
  AtomFieldParams params;
  FrequencyGrid grid;
  SpectrumResult ladder;
  SpectrumResult crossed;
  Totals totals;
  bool has_totals = false;

  bool converged() const;
};

CbsResult compute_cbs(const AtomFieldParams& params, const FrequencyGrid& grid,
                      const TransportOptions& opts = {}, bool with_totals = true);

/// Runs fn(i) for i in [0, n) on `threads` workers, static contiguous blocks.
/// Rethrows the first exception.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Values divided by the largest magnitude (unchanged if all zero).
std::vector<double> unit_peak(const std::vector<double>& values);

/// ||a - b||_2 / ||b||_2
double relative_l2(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace cbs
