#pragma once

#include <span>
#include <vector>

#include "cbs/bloch.hpp"
#include "cbs/phys.hpp"
#include "cbs/simd/batch.hpp"

namespace cbs {

/// First-order probe kernel P1(omega; omega2): smooth part plus lines in omega2
/// at 0 and at the probe offset omega.
struct P1Value {
  cplx smooth;
  cplx line_zero;
  cplx line_probe;
};

/// Mixed second-order kernel P2(omega; omega1): smooth part plus lines in
/// omega1 at 0, at the probe offset omega, and at its mirror -omega.
struct P2Value {
  double smooth = 0.0;
  double line_zero = 0.0;
  double line_probe = 0.0;
  double line_mirror = 0.0;
};

/// Resonance fluorescence spectrum for monochromatic driving: one elastic line
/// at 0 plus the inelastic Mollow density.
SpectralDistribution p0_spectrum(const AtomFieldParams& params);
P1Value p1_kernel(const AtomFieldParams& params, double omega, double omega2);
P2Value p2_kernel(const AtomFieldParams& params, double omega, double omega1);

/// The P0, P1, P2 kernels for one set of atom/laser parameters.
///
/// Pointwise queries go through CorrelationTransform. The *_batch members are
/// the fast path used by the transport integrals: they evaluate a whole panel
/// of probe frequencies through the SIMD resolvent kernels and agree with the
/// pointwise path to rounding.
class KernelSet {
 public:
  explicit KernelSet(const AtomFieldParams& params);

  const AtomFieldParams& params() const { return sys_.params; }
  const BlochSystem& system() const { return sys_; }
  const Vec3& steady() const { return s00_; }
  const SpectralDistribution& p0() const { return p0_; }
  const std::vector<double>& resonances() const { return resonances_; }

  /// |<sigma->|^2
  double elastic_weight() const;
  /// (1 + <sigma_z>)/2
  double excited_population() const;

  double p0_smooth(double omega) const;
  P1Value p1(double omega, double omega2) const;
  P2Value p2(double omega, double omega1) const;

  void p0_smooth_batch(std::span<const double> omega, std::span<double> out) const;
  /// out[k] = P2 smooth (nu[k]; omega1)
  void p2_smooth_batch(double omega1, std::span<const double> nu, std::span<double> out) const;
  /// out[k] = P1 smooth (nu[k]; omega2)
  void p1_smooth_batch(double omega2, std::span<const double> nu, std::span<cplx> out) const;
  /// P1 line at omega2 = 0 for each probe offset.
  void p1_line_zero_batch(std::span<const double> nu, std::span<cplx> out) const;
  /// P2 line at omega1 = 0 for each probe offset.
  void p2_line_zero_batch(std::span<const double> nu, std::span<double> out) const;

 private:
  struct GradedBatch;
  void graded_batch(std::span<const double> nu, GradedBatch& gb) const;

  BlochSystem sys_;
  Vec3 s00_{};
  Vec3 d00_{};
  Vec3 mplus_s00_{};
  Vec3 mminus_s00_{};
  Mat3 neg_inv_m0_mplus_{};
  Mat3 neg_inv_m0_mminus_{};
  simd::ShiftedResolvent resolvent_;
  std::vector<double> resonances_;
  SpectralDistribution p0_;
};

}  // namespace cbs
