#include "cbs/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "cbs/transport.hpp"

namespace cbs {

namespace {

using Op = TwoAtomLiouvillian::Op;
using Mat2 = Eigen::Matrix2cd;

constexpr int kFull = 16;

// Single-atom basis {1, sigma-, sigma+, sigma_z} in the (e, g) ordering.
std::array<Mat2, 4> single_basis() {
  Mat2 id = Mat2::Identity();
  Mat2 lo = Mat2::Zero();
  lo(1, 0) = 1.0;
  Mat2 up = lo.adjoint();
  Mat2 z = up * lo - lo * up;
  return {id, lo, up, z};
}

Op kron(const Mat2& a, const Mat2& b) {
  Op out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

}  // namespace

Op TwoAtomLiouvillian::basis(int a, int b) {
  static const auto ops = single_basis();
  return kron(ops[a], ops[b]);
}

Op TwoAtomLiouvillian::lower(int atom) { return atom == 0 ? basis(1, 0) : basis(0, 1); }

Eigen::Matrix<cplx, 16, 1> TwoAtomLiouvillian::expand(const Op& op) {
  // The product basis is orthogonal under Tr(A^dagger B).
  Eigen::Matrix<cplx, 16, 1> c;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const Op bk = basis(a, b);
      c(4 * a + b) = (bk.adjoint() * op).trace() / (bk.adjoint() * bk).trace();
    }
  return c;
}

TwoAtomLiouvillian::TwoAtomLiouvillian(const AtomFieldParams& params,
                                       const TwoAtomCoupling& coupling)
    : params_(params), coupling_(coupling) {
  params.validate();
  const double gamma = params.gamma;
  const cplx i(0.0, 1.0);
  const Op s1 = lower(0), s2 = lower(1);
  const Op p1 = s1.adjoint(), p2 = s2.adjoint();
  const cplx o1 = params.rabi * std::exp(i * coupling.theta1);
  const cplx o2 = params.rabi * std::exp(i * coupling.theta2);
  const cplx kappa = -0.5 * gamma * coupling.g;
  const double exchange = kappa.real();
  const double cross = coupling.coherent_only ? 0.0 : -2.0 * kappa.imag();

  const Op h = -params.detuning * (p1 * s1 + p2 * s2) + 0.5 * o1 * p1 + 0.5 * std::conj(o1) * s1 +
               0.5 * o2 * p2 + 0.5 * std::conj(o2) * s2 + exchange * (p1 * s2 + p2 * s1);
  const std::array<Op, 2> jumps{s1, s2};
  const double rates[2][2] = {{gamma, cross}, {cross, gamma}};

  auto adjoint_generator = [&](const Op& a) {
    Op out = i * (h * a - a * h);
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        if (rates[x][y] == 0.0) continue;
        const Op ld = jumps[x].adjoint();
        const Op prod = ld * jumps[y];
        out += rates[x][y] * (ld * a * jumps[y] - 0.5 * (prod * a + a * prod));
      }
    return out;
  };

  Eigen::Matrix<cplx, kFull, kFull> full;
  for (int k = 0; k < kFull; ++k) full.row(k) = expand(adjoint_generator(basis(k / 4, k % 4))).transpose();
  m_ = full.block<kDim, kDim>(1, 1);
  b_ = full.block<kDim, 1>(1, 0);
  steady_ = m_.partialPivLu().solve(-b_);
}

cplx TwoAtomLiouvillian::expect(const Op& op) const {
  const auto c = expand(op);
  cplx v = c(0);
  for (int k = 1; k < kFull; ++k) v += c(k) * steady_(k - 1);
  return v;
}

Op TwoAtomLiouvillian::density_matrix() const {
  Op rho = Op::Zero();
  for (int k = 0; k < kFull; ++k) {
    const Op bk = basis(k / 4, k % 4);
    const cplx e = k == 0 ? cplx(1.0) : steady_(k - 1);
    rho += e * bk.adjoint() / (bk.adjoint() * bk).trace();
  }
  return rho;
}

std::vector<cplx> TwoAtomLiouvillian::eigenvalues() const {
  Eigen::ComplexEigenSolver<Matrix> es(m_, false);
  std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + kDim);
  return ev;
}

TwoAtomLiouvillian build_two_atom(const AtomFieldParams& params, const TwoAtomCoupling& coupling) {
  params.validate();
  const double mod = std::abs(coupling.g);
  if (!(mod < 1.0)) throw std::invalid_argument("invalid parameter 'g': |g| must be < 1");
  static std::atomic<bool> warned{false};
  if (mod > 0.05 && !warned.exchange(true))
    std::cerr << "warning: |g| = " << mod << " is outside the weak-coupling regime (|g| <= 0.05)\n";
  TwoAtomLiouvillian l(params, coupling);
  for (const cplx& ev : l.eigenvalues())
    if (!(ev.real() < 0.0)) throw std::domain_error("two-atom generator is not relaxing");
  return l;
}

DetectedSpectrum detected_spectrum(const TwoAtomLiouvillian& liouv, std::span<const double> omega) {
  using Vector = TwoAtomLiouvillian::Vector;
  using Matrix = TwoAtomLiouvillian::Matrix;
  const int lower_idx[2] = {TwoAtomLiouvillian::index(1, 0), TwoAtomLiouvillian::index(0, 1)};

  // Connected equal-time vectors <d sigma+_i d B_k>.
  std::array<Vector, 2> d0;
  std::array<cplx, 2> up_mean, low_mean;
  for (int a = 0; a < 2; ++a) {
    const Op up = TwoAtomLiouvillian::lower(a).adjoint();
    up_mean[a] = liouv.expect(up);
    low_mean[a] = std::conj(up_mean[a]);
    for (int k = 1; k < 16; ++k) {
      const Op bk = TwoAtomLiouvillian::basis(k / 4, k % 4);
      d0[a](k - 1) = liouv.expect(up * bk) - up_mean[a] * liouv.steady()(k - 1);
    }
  }

  DetectedSpectrum out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      out.smooth[a][b].resize(omega.size());
      out.lines[a][b] = up_mean[a] * low_mean[b];
    }

  const Matrix& m = liouv.generator();
  Eigen::Matrix<cplx, TwoAtomLiouvillian::kDim, 2> rhs;
  rhs.col(0) = d0[0];
  rhs.col(1) = d0[1];
  const cplx i(0.0, 1.0);
  for (std::size_t k = 0; k < omega.size(); ++k) {
    const Matrix shifted = -i * omega[k] * Matrix::Identity() - m;
    const Eigen::Matrix<cplx, TwoAtomLiouvillian::kDim, 2> g = shifted.partialPivLu().solve(rhs);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) out.smooth[a][b][k] = g(lower_idx[b], a);
  }
  // Two-sided transform: add the tau < 0 branch by Hermitian symmetry.
  for (std::size_t k = 0; k < omega.size(); ++k) {
    std::array<std::array<cplx, 2>, 2> one;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) one[a][b] = out.smooth[a][b][k];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        out.smooth[a][b][k] = (one[a][b] + std::conj(one[b][a])) / (2.0 * kPi);
  }
  return out;
}

SpectralDistribution phased_sum(const DetectedSpectrum& s, std::span<const double> omega, cplx f1,
                                cplx f2) {
  const cplx f[2] = {f1, f2};
  std::vector<double> w(omega.begin(), omega.end());
  std::vector<cplx> v(omega.size(), 0.0);
  cplx line = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const cplx c = std::conj(f[a]) * f[b];
      line += c * s.lines[a][b];
      for (std::size_t k = 0; k < omega.size(); ++k) v[k] += c * s.smooth[a][b][k];
    }
  // Smooth part is tabulated: exact at the given offsets, linear in between.
  auto smooth = [w, v](double x) -> cplx {
    if (w.empty()) return 0.0;
    if (x <= w.front()) return v.front();
    if (x >= w.back()) return v.back();
    const auto it = std::upper_bound(w.begin(), w.end(), x);
    const std::size_t hi = it - w.begin(), lo = hi - 1;
    const double t = (x - w[lo]) / (w[hi] - w[lo]);
    return (1.0 - t) * v[lo] + t * v[hi];
  };
  return SpectralDistribution(SpectrumLabel::Oracle, merge_lines({{0.0, line}}), smooth);
}

void OracleOptions::validate() const {
  if (!(g_magnitude > 0.0 && g_magnitude < 1.0))
    throw std::invalid_argument("invalid parameter 'oracle_g': must be in (0, 1)");
  if (!(g_ratio > 1.0) || !(g_ratio * g_magnitude < 1.0))
    throw std::invalid_argument("invalid parameter 'oracle_g_ratio': must be > 1 with ratio * g < 1");
  if (phases < 3) throw std::invalid_argument("invalid parameter 'oracle_phases': must be >= 3");
  if (threads < 1) throw std::invalid_argument("invalid parameter 'threads': must be >= 1");
  if (!(residual_tolerance > 0.0))
    throw std::invalid_argument("invalid parameter 'oracle_residual_tolerance': must be > 0");
}

namespace {

struct PhaseAverage {
  std::vector<cplx> ladder, crossed;
  cplx ladder_line = 0.0, crossed_line = 0.0;
};

PhaseAverage average(const AtomFieldParams& params, std::span<const double> omega, double mod,
                     const OracleOptions& opts) {
  const int n = opts.phases;
  const std::size_t cfgs = static_cast<std::size_t>(n) * n;
  std::vector<DetectedSpectrum> spectra(cfgs);
  std::vector<double> thetas(cfgs);
  parallel_for(cfgs, opts.threads, [&](std::size_t c) {
    const double phi = 2.0 * kPi * static_cast<double>(c / n) / n;
    const double theta = 2.0 * kPi * static_cast<double>(c % n) / n;
    TwoAtomCoupling cp;
    cp.g = std::polar(mod, phi);
    cp.theta2 = theta;
    cp.coherent_only = opts.coherent_only;
    spectra[c] = detected_spectrum(build_two_atom(params, cp), omega);
    thetas[c] = theta;
  });

  PhaseAverage avg;
  avg.ladder.assign(omega.size(), 0.0);
  avg.crossed.assign(omega.size(), 0.0);
  const cplx i(0.0, 1.0);
  for (std::size_t c = 0; c < cfgs; ++c) {
    const DetectedSpectrum& s = spectra[c];
    const cplx e = std::exp(i * thetas[c]);
    for (std::size_t k = 0; k < omega.size(); ++k) {
      avg.ladder[k] += s.smooth[0][0][k] + s.smooth[1][1][k];
      avg.crossed[k] += s.smooth[0][1][k] * e + s.smooth[1][0][k] * std::conj(e);
    }
    avg.ladder_line += s.lines[0][0] + s.lines[1][1];
    avg.crossed_line += s.lines[0][1] * e + s.lines[1][0] * std::conj(e);
  }
  const double inv = 1.0 / static_cast<double>(cfgs);
  for (auto& v : avg.ladder) v *= inv;
  for (auto& v : avg.crossed) v *= inv;
  avg.ladder_line *= inv;
  avg.crossed_line *= inv;
  return avg;
}

}  // namespace

OracleSpectra extract_ladder_crossed(const AtomFieldParams& params, std::span<const double> omega,
                                     const OracleOptions& opts) {
  params.validate();
  opts.validate();
  const std::size_t n = omega.size();
  const double g1 = opts.g_magnitude, g2 = opts.g_ratio * opts.g_magnitude;
  const double field = 0.5 * params.gamma;

  const DetectedSpectrum base = detected_spectrum(build_two_atom(params, {}), omega);
  const PhaseAverage a1 = average(params, omega, g1, opts);
  const PhaseAverage a2 = average(params, omega, g2, opts);

  // c(g) = (X(g) - X(0)) / (|g| gamma / 2)^2 = c + O(|g|^2); eliminate the O(|g|^2) term.
  const double s1 = 1.0 / (g1 * g1 * field * field), s2 = 1.0 / (g2 * g2 * field * field);
  const double r2 = opts.g_ratio * opts.g_ratio;
  auto richardson = [&](cplx c1, cplx c2) { return (r2 * c1 - c2) / (r2 - 1.0); };

  OracleSpectra out;
  out.omega.assign(omega.begin(), omega.end());
  out.ladder.resize(n);
  out.crossed.resize(n);
  double diff = 0.0, norm = 0.0, max_im = 0.0, max_re = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const cplx b = base.smooth[0][0][k] + base.smooth[1][1][k];
    const cplx l1 = (a1.ladder[k] - b) * s1, l2 = (a2.ladder[k] - b) * s2;
    const cplx c1 = a1.crossed[k] * s1, c2 = a2.crossed[k] * s2;
    const cplx l = richardson(l1, l2), c = richardson(c1, c2);
    out.ladder[k] = l.real();
    out.crossed[k] = c.real();
    diff += std::norm(l1 - l2) + std::norm(c1 - c2);
    norm += std::norm(l) + std::norm(c);
    max_im = std::max({max_im, std::abs(l.imag()), std::abs(c.imag())});
    max_re = std::max({max_re, std::abs(l.real()), std::abs(c.real())});
  }
  const cplx bl = base.lines[0][0] + base.lines[1][1];
  out.ladder_line = richardson((a1.ladder_line - bl) * s1, (a2.ladder_line - bl) * s2).real();
  out.crossed_line = richardson(a1.crossed_line * s1, a2.crossed_line * s2).real();
  out.richardson_residual = norm > 0.0 ? std::sqrt(diff / norm) : std::sqrt(diff);
  out.imag_residual = max_re > 0.0 ? max_im / max_re : max_im;
  out.flagged = !(out.richardson_residual <= opts.residual_tolerance) ||
                !(out.imag_residual <= opts.residual_tolerance);
  return out;
}

OracleTotals extract_totals(const AtomFieldParams& params, const OracleOptions& opts) {
  params.validate();
  opts.validate();
  const Op s1 = TwoAtomLiouvillian::lower(0), s2 = TwoAtomLiouvillian::lower(1);
  const Op n11 = s1.adjoint() * s1 + s2.adjoint() * s2;
  const Op c12 = s1.adjoint() * s2, c21 = s2.adjoint() * s1;
  const int n = opts.phases;
  const cplx i(0.0, 1.0);

  auto averaged = [&](double mod) {
    const std::size_t cfgs = static_cast<std::size_t>(n) * n;
    std::vector<cplx> lad(cfgs), cro(cfgs);
    parallel_for(cfgs, opts.threads, [&](std::size_t c) {
      TwoAtomCoupling cp;
      cp.g = std::polar(mod, 2.0 * kPi * static_cast<double>(c / n) / n);
      cp.theta2 = 2.0 * kPi * static_cast<double>(c % n) / n;
      cp.coherent_only = opts.coherent_only;
      const TwoAtomLiouvillian l = build_two_atom(params, cp);
      const cplx e = std::exp(i * cp.theta2);
      lad[c] = l.expect(n11);
      cro[c] = l.expect(c12) * e + l.expect(c21) * std::conj(e);
    });
    cplx a = 0.0, b = 0.0;
    for (std::size_t c = 0; c < cfgs; ++c) {
      a += lad[c];
      b += cro[c];
    }
    return std::pair{a / static_cast<double>(cfgs), b / static_cast<double>(cfgs)};
  };

  const double field = 0.5 * params.gamma;
  const double g1 = opts.g_magnitude, g2 = opts.g_ratio * g1;
  const cplx base = build_two_atom(params, {}).expect(n11);
  const auto [l1, c1] = averaged(g1);
  const auto [l2, c2] = averaged(g2);
  const double s1n = 1.0 / (g1 * g1 * field * field), s2n = 1.0 / (g2 * g2 * field * field);
  const double r2 = opts.g_ratio * opts.g_ratio;
  const double lad1 = ((l1 - base) * s1n).real(), lad2 = ((l2 - base) * s2n).real();
  const double cr1 = (c1 * s1n).real(), cr2 = (c2 * s2n).real();
  OracleTotals t;
  t.ladder = (r2 * lad1 - lad2) / (r2 - 1.0);
  t.crossed = (r2 * cr1 - cr2) / (r2 - 1.0);
  const double norm = std::hypot(t.ladder, t.crossed);
  t.richardson_residual = norm > 0.0 ? std::hypot(lad1 - lad2, cr1 - cr2) / norm : 0.0;
  return t;
}

}  // namespace cbs
