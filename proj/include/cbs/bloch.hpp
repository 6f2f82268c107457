#pragma once

#include <array>
#include <vector>

#include "cbs/linalg.hpp"
#include "cbs/phys.hpp"

namespace cbs {

/// Optical Bloch equations of one two-level atom in the frame rotating at the
/// laser frequency, acting on s = (<sigma->, <sigma+>, <sigma_z>):
///
///   ds/dt = (m0 + v e^{-i nu t} mplus + conj(v) e^{i nu t} mminus) s + b0
///
/// for the drive Omega/2 + v e^{-i nu t} coupling to sigma+.
struct BlochSystem {
  AtomFieldParams params;
  Mat3 m0{};
  Vec3 b0{};
  Mat3 mplus{};
  Mat3 mminus{};
};

/// Throws std::invalid_argument for invalid params, std::domain_error if m0
/// is not strictly relaxing.
BlochSystem build_bloch(const AtomFieldParams& params);

/// Eigenvalues of m0, sorted by imaginary part.
std::array<cplx, 3> relaxation_eigenvalues(const BlochSystem& sys);

/// Frequency offsets -Im(lambda) at which the resolvent (-i omega - m0)^{-1} peaks.
std::vector<double> resonance_offsets(const BlochSystem& sys);

/// Monochromatic steady state, m0 s + b0 = 0.
Vec3 steady_state(const BlochSystem& sys);

/// Perturbative grade (p, q): coefficient of v^p conj(v)^q. Harmonic n = p - q.
enum class Grade : int { G00 = 0, G10 = 1, G01 = 2, G11 = 3 };

inline constexpr std::array<Grade, 4> kAllGrades{Grade::G00, Grade::G10, Grade::G01, Grade::G11};

constexpr int probe_power(Grade g) { return (g == Grade::G10 || g == Grade::G11) ? 1 : 0; }
constexpr int conj_power(Grade g) { return (g == Grade::G01 || g == Grade::G11) ? 1 : 0; }
constexpr int harmonic(Grade g) { return probe_power(g) - conj_power(g); }
constexpr Grade transpose(Grade g) {
  return g == Grade::G10 ? Grade::G01 : g == Grade::G01 ? Grade::G10 : g;
}

/// Long-time periodic Bloch vector to second order in the probe:
/// s(t) = sum_{pq} v^p conj(v)^q e^{-i(p-q) nu t} S_pq.
struct GradedState {
  double nu = 0.0;
  std::array<Vec3, 4> coeffs{};

  const Vec3& operator[](Grade g) const { return coeffs[static_cast<int>(g)]; }
  Vec3& operator[](Grade g) { return coeffs[static_cast<int>(g)]; }
};

GradedState harmonic_response(const BlochSystem& sys, double nu);

/// Frequency-domain dipole correlation <sigma+(t1) sigma-(t2)> of one atom under
/// the bichromatic drive, split by grade. For grade (p, q) the double Fourier
/// transform is
///
///   delta(omega2 - omega1 - n nu) * [ two_sided(omega2) + sum_lines w delta(omega2 - pos) ]
///
/// in units where the monochromatic spectrum integrates to <sigma+ sigma->.
class CorrelationTransform {
 public:
  CorrelationTransform(const BlochSystem& sys, const GradedState& state);

  const GradedState& state() const { return state_; }

  /// Connected equal-time correlation <d sigma+ d s> at grade g.
  const Vec3& initial(Grade g) const { return initial_[static_cast<int>(g)]; }

  /// One-sided transform int_0^inf dtau e^{i omega tau} of the connected
  /// regression vector, first-order Dyson terms included.
  Vec3 forward(Grade g, double omega) const;

  /// Smooth (connected) part over all tau; the tau < 0 branch comes from
  /// Hermitian symmetry.
  cplx two_sided(Grade g, double omega) const;

  /// Disconnected part <sigma+>(t1) <sigma->(t2), as lines in omega2.
  std::vector<SpectralLine> lines(Grade g) const;

 private:
  Vec3 resolvent(double omega, const Vec3& rhs) const;

  BlochSystem sys_;
  GradedState state_;
  std::array<Vec3, 4> initial_{};
};

/// Component-wise product in the graded algebra, truncated at grade (1,1).
cplx graded_product(const std::array<cplx, 4>& f, const std::array<cplx, 4>& h, Grade g);

/// Connected equal-time vector D_pq from the graded Bloch state, using
/// sigma+ sigma- = (1 + sigma_z)/2, sigma+ sigma+ = 0, sigma+ sigma_z = -sigma+.
std::array<Vec3, 4> connected_initial(const BlochSystem& sys, const GradedState& state);

}  // namespace cbs
