#include "cbs/bloch.hpp"

#include <algorithm>
#include <stdexcept>

namespace cbs {

namespace {

constexpr cplx kI{0.0, 1.0};

int index(Grade g) { return static_cast<int>(g); }

Grade grade_of(int p, int q) {
  if (p == 0 && q == 0) return Grade::G00;
  if (p == 1 && q == 0) return Grade::G10;
  if (p == 0 && q == 1) return Grade::G01;
  return Grade::G11;
}

std::array<cplx, 4> component(const GradedState& s, int c) {
  return {s.coeffs[0][c], s.coeffs[1][c], s.coeffs[2][c], s.coeffs[3][c]};
}

}  // namespace

BlochSystem build_bloch(const AtomFieldParams& params) {
  params.validate();
  const double g = params.gamma;
  const double d = params.detuning;
  const double om = params.rabi;

  BlochSystem sys;
  sys.params = params;
  sys.m0 = {{{kI * d - g / 2, 0.0, kI * om / 2.0},
             {0.0, -kI * d - g / 2, -kI * om / 2.0},
             {kI * om, -kI * om, -g}}};
  sys.b0 = {0.0, 0.0, -g};
  sys.mplus = {{{0.0, 0.0, kI}, {0.0, 0.0, 0.0}, {0.0, -2.0 * kI, 0.0}}};
  sys.mminus = {{{0.0, 0.0, 0.0}, {0.0, 0.0, -kI}, {2.0 * kI, 0.0, 0.0}}};

  for (const cplx& ev : relaxation_eigenvalues(sys))
    if (!(ev.real() < 0.0)) throw std::domain_error("build_bloch: generator is not relaxing");
  return sys;
}

std::array<cplx, 3> relaxation_eigenvalues(const BlochSystem& sys) { return eigenvalues(sys.m0); }

std::vector<double> resonance_offsets(const BlochSystem& sys) {
  std::vector<double> out;
  for (const cplx& ev : relaxation_eigenvalues(sys)) out.push_back(-ev.imag());
  std::sort(out.begin(), out.end());
  return out;
}

Vec3 steady_state(const BlochSystem& sys) { return solve(sys.m0, -sys.b0); }

GradedState harmonic_response(const BlochSystem& sys, double nu) {
  GradedState st;
  st.nu = nu;
  const Mat3 id = identity3();
  st[Grade::G00] = steady_state(sys);
  st[Grade::G10] = solve((-kI * nu) * id + (-1.0) * sys.m0, sys.mplus * st[Grade::G00]);
  st[Grade::G01] = solve((kI * nu) * id + (-1.0) * sys.m0, sys.mminus * st[Grade::G00]);
  st[Grade::G11] =
      solve((-1.0) * sys.m0, sys.mplus * st[Grade::G01] + sys.mminus * st[Grade::G10]);
  return st;
}

cplx graded_product(const std::array<cplx, 4>& f, const std::array<cplx, 4>& h, Grade g) {
  const int p = probe_power(g);
  const int q = conj_power(g);
  cplx acc{};
  for (int a = 0; a <= p; ++a)
    for (int b = 0; b <= q; ++b)
      acc += f[index(grade_of(a, b))] * h[index(grade_of(p - a, q - b))];
  return acc;
}

std::array<Vec3, 4> connected_initial(const BlochSystem& sys, const GradedState& state) {
  const auto x = component(state, 0);
  const auto y = component(state, 1);
  const auto z = component(state, 2);
  std::array<Vec3, 4> d{};
  for (Grade g : kAllGrades) {
    const int i = index(g);
    const double one = g == Grade::G00 ? 1.0 : 0.0;
    d[i][0] = 0.5 * (one + z[i]) - graded_product(y, x, g);
    d[i][1] = -graded_product(y, y, g);
    d[i][2] = -y[i] - graded_product(y, z, g);
  }
  // Grade (0,0) without the (1 + z)/2 - |x|^2 cancellation, which loses all
  // digits in the weak-field limit.
  const AtomFieldParams& p = sys.params;
  const double o2 = p.rabi * p.rabi;
  const double den = p.detuning * p.detuning + p.gamma * p.gamma / 4.0 + o2 / 2.0;
  const double pe = o2 / 4.0 / den;
  d[0][0] = o2 * o2 / (8.0 * den * den);
  d[0][2] = -2.0 * pe * y[0];
  return d;
}

CorrelationTransform::CorrelationTransform(const BlochSystem& sys, const GradedState& state)
    : sys_(sys), state_(state), initial_(connected_initial(sys, state)) {}

Vec3 CorrelationTransform::resolvent(double omega, const Vec3& rhs) const {
  return solve((-kI * omega) * identity3() + (-1.0) * sys_.m0, rhs);
}

Vec3 CorrelationTransform::forward(Grade g, double omega) const {
  const double nu = state_.nu;
  switch (g) {
    case Grade::G00:
      return resolvent(omega, initial(g));
    case Grade::G10:
      return resolvent(omega, initial(g) + sys_.mplus * forward(Grade::G00, omega - nu));
    case Grade::G01:
      return resolvent(omega, initial(g) + sys_.mminus * forward(Grade::G00, omega + nu));
    case Grade::G11:
      return resolvent(omega, initial(g) + sys_.mplus * forward(Grade::G01, omega - nu) +
                                  sys_.mminus * forward(Grade::G10, omega + nu));
  }
  return {};
}

cplx CorrelationTransform::two_sided(Grade g, double omega) const {
  const double shift = harmonic(g) * state_.nu;
  const cplx plus = forward(g, omega)[0];
  const cplx minus = std::conj(forward(transpose(g), omega - shift)[0]);
  return (plus + minus) / (2.0 * kPi);
}

std::vector<SpectralLine> CorrelationTransform::lines(Grade g) const {
  const auto x = component(state_, 0);
  const auto y = component(state_, 1);
  const int p = probe_power(g);
  const int q = conj_power(g);
  std::vector<SpectralLine> out;
  for (int a = 0; a <= p; ++a)
    for (int b = 0; b <= q; ++b) {
      const int c = p - a;
      const int d = q - b;
      out.push_back({(c - d) * state_.nu, y[index(grade_of(a, b))] * x[index(grade_of(c, d))]});
    }
  return merge_lines(std::move(out), sys_.params.gamma);
}

}  // namespace cbs
