#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <vector>

#include "cbs/phys.hpp"

namespace cbs {

/// Interatomic coupling g (modulus 1/(k r), phase k r) and the laser phase seen
/// by each atom.
struct TwoAtomCoupling {
  cplx g{0.0, 0.0};
  double theta1 = 0.0;
  double theta2 = 0.0;
  /// Drop the cross-damping term and keep only the coherent exchange.
  bool coherent_only = false;
};

/// Heisenberg-picture generator of two driven atoms on the 15 expectation
/// values <B_a x B_b>, B in {1, sigma-, sigma+, sigma_z}, identity removed:
/// d/dt e = M e + b.
class TwoAtomLiouvillian {
 public:
  static constexpr int kDim = 15;
  using Matrix = Eigen::Matrix<cplx, kDim, kDim>;
  using Vector = Eigen::Matrix<cplx, kDim, 1>;
  using Op = Eigen::Matrix4cd;

  TwoAtomLiouvillian(const AtomFieldParams& params, const TwoAtomCoupling& coupling);

  const AtomFieldParams& params() const { return params_; }
  const TwoAtomCoupling& coupling() const { return coupling_; }
  const Matrix& generator() const { return m_; }
  const Vector& inhomogeneity() const { return b_; }
  const Vector& steady() const { return steady_; }

  /// Stationary <op> for any two-atom operator.
  cplx expect(const Op& op) const;
  /// Stationary density matrix rebuilt from the expectation values.
  Op density_matrix() const;
  std::vector<cplx> eigenvalues() const;

  /// Position in the 15-vector of B_a x B_b (a, b in 0..3, not both 0).
  static int index(int a, int b) { return 4 * a + b - 1; }
  /// Coefficients of op in the 16-element product basis.
  static Eigen::Matrix<cplx, 16, 1> expand(const Op& op);
  static Op basis(int a, int b);
  static Op lower(int atom);

 private:
  AtomFieldParams params_;
  TwoAtomCoupling coupling_;
  Matrix m_;
  Vector b_;
  Vector steady_;
};

/// Throws std::invalid_argument if |g| >= 1, std::domain_error if the
/// generator is not relaxing. Warns on stderr above |g| = 0.05.
TwoAtomLiouvillian build_two_atom(const AtomFieldParams& params, const TwoAtomCoupling& coupling);

/// S_ij(omega): spectrum of <sigma+_i(t) sigma-_j(t + tau)>, smooth part and
/// the elastic line weight <sigma+_i><sigma-_j> at offset 0.
struct DetectedSpectrum {
  std::array<std::array<std::vector<cplx>, 2>, 2> smooth;
  std::array<std::array<cplx, 2>, 2> lines{};
};

DetectedSpectrum detected_spectrum(const TwoAtomLiouvillian& liouv, std::span<const double> omega);

/// Detector field f1 sigma-_1 + f2 sigma-_2: sum_ij conj(f_i) f_j S_ij.
SpectralDistribution phased_sum(const DetectedSpectrum& s, std::span<const double> omega, cplx f1,
                                cplx f2);

struct OracleOptions {
  double g_magnitude = 1e-2;
  /// Second magnitude is g_ratio * g_magnitude; Richardson assumes g_ratio = 2.
  double g_ratio = 2.0;
  int phases = 8;
  bool coherent_only = false;
  int threads = 1;
  double residual_tolerance = 1e-3;

  void validate() const;
};

/// Ladder and crossed |g|^2 coefficients for one unordered atom pair, averaged
/// over coupling phase and laser phase difference.
struct OracleSpectra {
  std::vector<double> omega;
  std::vector<double> ladder;
  std::vector<double> crossed;
  double ladder_line = 0.0;
  double crossed_line = 0.0;
  /// ||c(g1) - c(g2)|| / ||c|| before Richardson elimination.
  double richardson_residual = 0.0;
  /// max |Im| / max |Re| over both spectra.
  double imag_residual = 0.0;
  bool flagged = false;
};

OracleSpectra extract_ladder_crossed(const AtomFieldParams& params, std::span<const double> omega,
                                     const OracleOptions& opts = {});

/// Frequency-integrated ladder and crossed |g|^2 coefficients from stationary
/// equal-time expectations <sigma+_i sigma-_j>, same averaging and
/// normalization as extract_ladder_crossed.
struct OracleTotals {
  double ladder = 0.0;
  double crossed = 0.0;
  double richardson_residual = 0.0;
};

OracleTotals extract_totals(const AtomFieldParams& params, const OracleOptions& opts = {});

}  // namespace cbs
