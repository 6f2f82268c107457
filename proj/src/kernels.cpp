#include "cbs/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace cbs {

namespace {

constexpr double kInvPi = 1.0 / kPi;
constexpr double kInv2Pi = 0.5 / kPi;

using simd::Batch3;

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernel batch: size mismatch");
}

}  // namespace

SpectralDistribution p0_spectrum(const AtomFieldParams& params) { return KernelSet(params).p0(); }

P1Value p1_kernel(const AtomFieldParams& params, double omega, double omega2) {
  return KernelSet(params).p1(omega, omega2);
}

P2Value p2_kernel(const AtomFieldParams& params, double omega, double omega1) {
  return KernelSet(params).p2(omega, omega1);
}

struct KernelSet::GradedBatch {
  Batch3 s10, s01, s11, d10, d01, d11;
  std::vector<double> minus_nu;
};

KernelSet::KernelSet(const AtomFieldParams& params)
    : sys_(build_bloch(params)),
      s00_(steady_state(sys_)),
      resolvent_(sys_.m0),
      resonances_(resonance_offsets(sys_)) {
  GradedState st;
  st[Grade::G00] = s00_;
  d00_ = connected_initial(sys_, st)[0];
  mplus_s00_ = sys_.mplus * s00_;
  mminus_s00_ = sys_.mminus * s00_;
  const Mat3 neg_inv = (-1.0) * inverse(sys_.m0);
  neg_inv_m0_mplus_ = neg_inv * sys_.mplus;
  neg_inv_m0_mminus_ = neg_inv * sys_.mminus;

  const double w = elastic_weight();
  std::vector<SpectralLine> lines;
  if (w >= kLineDropTolerance) lines.push_back({0.0, w});
  const simd::ShiftedResolvent res = resolvent_;
  const Vec3 d00 = d00_;
  p0_ = SpectralDistribution(SpectrumLabel::P0, std::move(lines), [res, d00](double omega) {
    return cplx(res.apply(omega, d00)[0].real() * kInvPi, 0.0);
  });
}

double KernelSet::elastic_weight() const { return std::norm(s00_[0]); }

double KernelSet::excited_population() const {
  const AtomFieldParams& p = sys_.params;
  const double o2 = p.rabi * p.rabi;
  return o2 / 4.0 / (p.detuning * p.detuning + p.gamma * p.gamma / 4.0 + o2 / 2.0);
}

double KernelSet::p0_smooth(double omega) const {
  const CorrelationTransform ct(sys_, harmonic_response(sys_, 0.0));
  return ct.two_sided(Grade::G00, omega).real();
}

P1Value KernelSet::p1(double omega, double omega2) const {
  const GradedState st = harmonic_response(sys_, omega);
  const CorrelationTransform ct(sys_, st);
  P1Value v;
  v.smooth = ct.two_sided(Grade::G10, omega2);
  // Disconnected part: <sigma+> at grade (1,0) times the elastic <sigma->, and
  // the elastic <sigma+> times the driven <sigma-> at the probe frequency.
  v.line_zero = st[Grade::G10][1] * st[Grade::G00][0];
  v.line_probe = st[Grade::G00][1] * st[Grade::G10][0];
  return v;
}

P2Value KernelSet::p2(double omega, double omega1) const {
  const GradedState st = harmonic_response(sys_, omega);
  const CorrelationTransform ct(sys_, st);
  P2Value v;
  v.smooth = ct.two_sided(Grade::G11, omega1).real();
  v.line_zero = (st[Grade::G11][1] * st[Grade::G00][0] + st[Grade::G00][1] * st[Grade::G11][0]).real();
  v.line_probe = (st[Grade::G01][1] * st[Grade::G10][0]).real();
  v.line_mirror = (st[Grade::G10][1] * st[Grade::G01][0]).real();
  return v;
}

void KernelSet::graded_batch(std::span<const double> nu, GradedBatch& gb) const {
  const std::size_t n = nu.size();
  gb.minus_nu.resize(n);
  for (std::size_t k = 0; k < n; ++k) gb.minus_nu[k] = -nu[k];

  simd::resolve(resolvent_, nu, mplus_s00_, gb.s10);
  simd::resolve(resolvent_, gb.minus_nu, mminus_s00_, gb.s01);
  simd::matvec(neg_inv_m0_mplus_, gb.s01, gb.s11);
  simd::matvec(neg_inv_m0_mminus_, gb.s10, gb.s11, true);

  gb.d10.resize(n);
  gb.d01.resize(n);
  gb.d11.resize(n);
  const cplx x0 = s00_[0], y0 = s00_[1], z0 = s00_[2];
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 a = gb.s10.lane(k);
    const Vec3 b = gb.s01.lane(k);
    const Vec3 c = gb.s11.lane(k);
    gb.d10.set_lane(k, {0.5 * a[2] - (a[1] * x0 + y0 * a[0]), -2.0 * y0 * a[1],
                        -a[1] - (a[1] * z0 + y0 * a[2])});
    gb.d01.set_lane(k, {0.5 * b[2] - (b[1] * x0 + y0 * b[0]), -2.0 * y0 * b[1],
                        -b[1] - (b[1] * z0 + y0 * b[2])});
    gb.d11.set_lane(k, {0.5 * c[2] - (c[1] * x0 + a[1] * b[0] + b[1] * a[0] + y0 * c[0]),
                        -2.0 * (y0 * c[1] + a[1] * b[1]),
                        -c[1] - (c[1] * z0 + a[1] * b[2] + b[1] * a[2] + y0 * c[2])});
  }
}

namespace {

// Per-thread scratch so the quadrature inner loop does not allocate.
struct Scratch {
  Batch3 a, b, c, d;
  std::vector<double> shifted;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

}  // namespace

void KernelSet::p0_smooth_batch(std::span<const double> omega, std::span<double> out) const {
  check_sizes(omega.size(), out.size());
  Batch3& g = scratch().a;
  simd::resolve(resolvent_, omega, d00_, g);
  for (std::size_t k = 0; k < omega.size(); ++k) out[k] = g.re(0)[k] * kInvPi;
}

void KernelSet::p2_smooth_batch(double omega1, std::span<const double> nu,
                                std::span<double> out) const {
  check_sizes(nu.size(), out.size());
  thread_local GradedBatch gb;
  graded_batch(nu, gb);
  Scratch& s = scratch();
  const std::size_t n = nu.size();

  const Vec3 g00 = resolvent_.apply(omega1, d00_);
  const Vec3 push_minus = sys_.mminus * g00;
  const Vec3 push_plus = sys_.mplus * g00;

  // g01(omega1 - nu) and g10(omega1 + nu)
  s.shifted.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    gb.d01.set_lane(k, gb.d01.lane(k) + push_minus);
    s.shifted[k] = omega1 - nu[k];
  }
  simd::resolve(resolvent_, s.shifted, gb.d01, s.a);
  for (std::size_t k = 0; k < n; ++k) {
    gb.d10.set_lane(k, gb.d10.lane(k) + push_plus);
    s.shifted[k] = omega1 + nu[k];
  }
  simd::resolve(resolvent_, s.shifted, gb.d10, s.b);

  simd::matvec(sys_.mplus, s.a, gb.d11, true);
  simd::matvec(sys_.mminus, s.b, gb.d11, true);
  simd::matvec(resolvent_.matrix(omega1), gb.d11, s.c);
  for (std::size_t k = 0; k < n; ++k) out[k] = s.c.re(0)[k] * kInvPi;
}

void KernelSet::p1_smooth_batch(double omega2, std::span<const double> nu,
                                std::span<cplx> out) const {
  check_sizes(nu.size(), out.size());
  thread_local GradedBatch gb;
  graded_batch(nu, gb);
  Scratch& s = scratch();
  const std::size_t n = nu.size();

  s.shifted.resize(n);
  for (std::size_t k = 0; k < n; ++k) s.shifted[k] = omega2 - nu[k];

  // g10(omega2) = R(omega2) [D10 + mplus g00(omega2 - nu)]
  simd::resolve(resolvent_, s.shifted, d00_, s.a);
  simd::matvec(sys_.mplus, s.a, gb.d10, true);
  simd::matvec(resolvent_.matrix(omega2), gb.d10, s.b);

  // g01(omega2 - nu) = R(omega2 - nu) [D01 + mminus g00(omega2)]
  const Vec3 push_minus = sys_.mminus * resolvent_.apply(omega2, d00_);
  for (std::size_t k = 0; k < n; ++k) gb.d01.set_lane(k, gb.d01.lane(k) + push_minus);
  simd::resolve(resolvent_, s.shifted, gb.d01, s.c);

  for (std::size_t k = 0; k < n; ++k)
    out[k] = (s.b.get(0, k) + std::conj(s.c.get(0, k))) * kInv2Pi;
}

void KernelSet::p1_line_zero_batch(std::span<const double> nu, std::span<cplx> out) const {
  check_sizes(nu.size(), out.size());
  Batch3& s10 = scratch().a;
  simd::resolve(resolvent_, nu, mplus_s00_, s10);
  for (std::size_t k = 0; k < nu.size(); ++k) out[k] = s10.get(1, k) * s00_[0];
}

void KernelSet::p2_line_zero_batch(std::span<const double> nu, std::span<double> out) const {
  check_sizes(nu.size(), out.size());
  thread_local GradedBatch gb;
  graded_batch(nu, gb);
  for (std::size_t k = 0; k < nu.size(); ++k)
    out[k] = 2.0 * (std::conj(s00_[0]) * gb.s11.get(0, k)).real();
}

}  // namespace cbs
