#include "cbs/transport.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace cbs {

namespace {

double tail_scale(const KernelSet& k) {
  return std::max(k.params().gamma, generalized_rabi(k.params()));
}

double prefactor(const KernelSet& k, const TransportOptions& opts) {
  return opts.pair_multiplicity * k.params().coupling_mod2;
}

std::vector<double> shifted_resonances(const KernelSet& k, std::initializer_list<double> shifts) {
  std::vector<double> pts;
  for (double s : shifts) {
    pts.push_back(s);
    for (double f : k.resonances()) pts.push_back(s + f);
  }
  return pts;
}

// Each component below is a separate real integrand.
struct Scratch {
  std::vector<double> a, b, mirrored;
  std::vector<cplx> ca, cb;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

}  // namespace

FrequencyGrid FrequencyGrid::uniform(double lo, double hi, int n, std::vector<double> hints) {
  if (n < 3) throw std::invalid_argument("invalid parameter 'grid_points': must be >= 3");
  if (!(hi > lo)) throw std::invalid_argument("grid range must satisfy lo < hi");
  FrequencyGrid g;
  std::vector<double> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = lo + (hi - lo) * i / (n - 1);
  pts.front() = lo;
  pts.back() = hi;
  std::vector<double> kept;
  for (double h : hints)
    if (h >= lo && h <= hi) kept.push_back(h);
  // Hints snap onto existing points when they coincide within rounding.
  for (double& h : kept) {
    auto it = std::lower_bound(pts.begin(), pts.end(), h);
    for (auto c : {it, it == pts.begin() ? it : std::prev(it)})
      if (c != pts.end() && std::abs(*c - h) < 1e-9) h = *c;
  }
  pts.insert(pts.end(), kept.begin(), kept.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  g.points = std::move(pts);
  g.hints = std::move(kept);
  return g;
}

FrequencyGrid FrequencyGrid::make_default(const AtomFieldParams& params, int n,
                                          double range_multiplier) {
  params.validate();
  if (!(range_multiplier > 0.0))
    throw std::invalid_argument("invalid parameter 'range_multiplier': must be > 0");
  const double w = std::max(params.gamma, generalized_rabi(params));
  const double half = range_multiplier * w;
  return uniform(-half, half, n, {0.0, w, -w, -params.detuning});
}

void FrequencyGrid::validate() const {
  if (points.size() < 3) throw std::invalid_argument("frequency grid needs at least 3 points");
  for (std::size_t i = 1; i < points.size(); ++i)
    if (!(points[i] > points[i - 1]))
      throw std::invalid_argument("frequency grid must be strictly increasing");
  for (double h : hints)
    if (!std::binary_search(points.begin(), points.end(), h))
      throw std::invalid_argument("frequency grid is missing a hint point");
}

void TransportOptions::validate() const {
  quad.validate();
  if (!(pair_multiplicity >= 0.0) || !std::isfinite(pair_multiplicity))
    throw std::invalid_argument("invalid parameter 'pair_multiplicity': must be >= 0");
  if (threads < 1) throw std::invalid_argument("invalid parameter 'threads': must be >= 1");
}

PointEstimate ladder_smooth_at(const KernelSet& k, double omega_d, const TransportOptions& opts) {
  PointEstimate est;
  const double x00sq = k.elastic_weight();

  double direct = 0.0;
  if (x00sq > 0.0) {
    const double zero = 0.0;
    double p2 = 0.0;
    k.p2_smooth_batch(omega_d, {&zero, 1}, {&p2, 1});
    direct += x00sq * p2;
  }
  // Inelastic P0 photon rescattered elastically at its own frequency.
  const GradedState up = harmonic_response(k.system(), omega_d);
  const GradedState down = harmonic_response(k.system(), -omega_d);
  direct += k.p0_smooth(omega_d) * std::norm(up[Grade::G10][0]) +
            k.p0_smooth(-omega_d) * std::norm(down[Grade::G01][0]);

  const BatchIntegrand f = [&](std::span<const double> nu, std::span<double> out) {
    Scratch& s = scratch();
    s.a.resize(nu.size());
    k.p0_smooth_batch(nu, s.a);
    k.p2_smooth_batch(omega_d, nu, out);
    for (std::size_t i = 0; i < nu.size(); ++i) out[i] *= s.a[i];
  };
  const QuadResult q = integrate_real_line(
      f, 1, shifted_resonances(k, {0.0, omega_d, -omega_d}), tail_scale(k), opts.quad);

  const double pre = prefactor(k, opts);
  est.value = pre * (direct + q.value[0]);
  est.abs_error = pre * q.abs_error[0];
  est.evaluations = q.evaluations;
  est.converged = q.converged;
  return est;
}

PointEstimate crossed_smooth_at(const KernelSet& k, double omega_d, const TransportOptions& opts) {
  PointEstimate est;
  const double zero = 0.0;
  cplx a_zero;
  k.p1_smooth_batch(omega_d, {&zero, 1}, {&a_zero, 1});
  const P1Value at_probe = k.p1(omega_d, omega_d);
  const double direct = 2.0 * (a_zero * std::conj(at_probe.line_probe)).real();

  // conj A(omega_d - nu) A(nu) is paired with its mirror nu -> omega_d - nu,
  // which is its complex conjugate; integrate the pair over nu >= omega_d / 2.
  const BatchIntegrand f = [&](std::span<const double> nu, std::span<double> out) {
    Scratch& s = scratch();
    const std::size_t n = nu.size();
    s.mirrored.resize(n);
    s.ca.resize(n);
    s.cb.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.mirrored[i] = omega_d - nu[i];
    k.p1_smooth_batch(omega_d, nu, s.ca);
    k.p1_smooth_batch(omega_d, s.mirrored, s.cb);
    for (std::size_t i = 0; i < n; ++i) {
      const cplx v = std::conj(s.cb[i]) * s.ca[i] + std::conj(s.ca[i]) * s.cb[i];
      out[i] = v.real();
      out[n + i] = v.imag();
    }
  };
  const QuadResult q = integrate_half_line(f, 2, 0.5 * omega_d,
                                           shifted_resonances(k, {0.0, omega_d}), tail_scale(k),
                                           opts.quad);

  const double pre = prefactor(k, opts);
  const double re = direct + q.value[0];
  est.value = pre * re;
  est.abs_error = pre * q.abs_error[0];
  est.imag_residue = re != 0.0 ? std::abs(q.value[1]) / std::abs(re) : std::abs(q.value[1]);
  est.evaluations = q.evaluations;
  est.converged = q.converged;
  return est;
}

std::vector<SpectralLine> ladder_lines(const KernelSet& k, const TransportOptions& opts,
                                       PointEstimate* diag) {
  const double x00sq = k.elastic_weight();
  const P2Value at_zero = k.p2(0.0, 0.0);
  const double direct = x00sq * (at_zero.line_zero + at_zero.line_probe + at_zero.line_mirror);

  const BatchIntegrand f = [&](std::span<const double> nu, std::span<double> out) {
    Scratch& s = scratch();
    s.a.resize(nu.size());
    k.p0_smooth_batch(nu, s.a);
    k.p2_line_zero_batch(nu, out);
    for (std::size_t i = 0; i < nu.size(); ++i) out[i] *= s.a[i];
  };
  const QuadResult q =
      integrate_real_line(f, 1, shifted_resonances(k, {0.0}), tail_scale(k), opts.quad);
  const double pre = prefactor(k, opts);
  if (diag) {
    diag->value = pre * (direct + q.value[0]);
    diag->abs_error = pre * q.abs_error[0];
    diag->evaluations = q.evaluations;
    diag->converged = q.converged;
  }
  return merge_lines({{0.0, cplx(pre * (direct + q.value[0]), 0.0)}}, k.params().gamma);
}

std::vector<SpectralLine> crossed_lines(const KernelSet& k, const TransportOptions& opts,
                                        PointEstimate* diag) {
  const P1Value at_zero = k.p1(0.0, 0.0);
  const cplx a_nu = at_zero.line_probe;
  const double direct =
      std::norm(a_nu) + 2.0 * (at_zero.line_zero * std::conj(a_nu)).real();

  // Re a0(nu) conj A(-nu; 0)
  const BatchIntegrand f = [&](std::span<const double> nu, std::span<double> out) {
    Scratch& s = scratch();
    const std::size_t n = nu.size();
    s.mirrored.resize(n);
    s.ca.resize(n);
    s.cb.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.mirrored[i] = -nu[i];
    k.p1_line_zero_batch(nu, s.ca);
    k.p1_smooth_batch(0.0, s.mirrored, s.cb);
    for (std::size_t i = 0; i < n; ++i) out[i] = (s.ca[i] * std::conj(s.cb[i])).real();
  };
  const QuadResult q =
      integrate_real_line(f, 1, shifted_resonances(k, {0.0}), tail_scale(k), opts.quad);
  const double pre = prefactor(k, opts);
  const double w = pre * (direct + 2.0 * q.value[0]);
  if (diag) {
    diag->value = w;
    diag->abs_error = pre * 2.0 * q.abs_error[0];
    diag->evaluations = q.evaluations;
    diag->converged = q.converged;
  }
  return merge_lines({{0.0, cplx(w, 0.0)}}, k.params().gamma);
}

namespace {

using PointFn = PointEstimate (*)(const KernelSet&, double, const TransportOptions&);

SpectrumResult spectrum(std::shared_ptr<const KernelSet> k, const FrequencyGrid& grid,
                        const TransportOptions& opts, SpectrumLabel label, PointFn point,
                        std::vector<SpectralLine> lines, const PointEstimate& line_diag) {
  if (!k) throw std::invalid_argument("kernel set must not be null");
  opts.validate();
  grid.validate();
  SpectrumResult res;
  const std::size_t n = grid.points.size();
  std::vector<PointEstimate> pts(n);
  parallel_for(n, opts.threads,
               [&](std::size_t i) { pts[i] = point(*k, grid.points[i], opts); });
  res.values.resize(n);
  res.abs_errors.resize(n);
  res.imag_residues.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    res.values[i] = pts[i].value;
    res.abs_errors[i] = pts[i].abs_error;
    res.imag_residues[i] = pts[i].imag_residue;
    res.evaluations += pts[i].evaluations;
    res.converged = res.converged && pts[i].converged;
  }
  res.line_error = line_diag.abs_error;
  res.evaluations += line_diag.evaluations;
  res.converged = res.converged && line_diag.converged;
  const TransportOptions captured = opts;
  res.distribution = SpectralDistribution(label, std::move(lines), [k, captured, point](double w) {
    return cplx(point(*k, w, captured).value, 0.0);
  });
  return res;
}

}  // namespace

SpectrumResult ladder_spectrum(std::shared_ptr<const KernelSet> k, const FrequencyGrid& grid,
                               const TransportOptions& opts) {
  if (!k) throw std::invalid_argument("kernel set must not be null");
  PointEstimate diag;
  auto lines = ladder_lines(*k, opts, &diag);
  return spectrum(std::move(k), grid, opts, SpectrumLabel::Ladder, &ladder_smooth_at,
                  std::move(lines), diag);
}

SpectrumResult crossed_spectrum(std::shared_ptr<const KernelSet> k, const FrequencyGrid& grid,
                                const TransportOptions& opts) {
  if (!k) throw std::invalid_argument("kernel set must not be null");
  PointEstimate diag;
  auto lines = crossed_lines(*k, opts, &diag);
  return spectrum(std::move(k), grid, opts, SpectrumLabel::Crossed, &crossed_smooth_at,
                  std::move(lines), diag);
}

Totals integrate_total(const KernelSet& k, const SpectralDistribution& ladder,
                       const SpectralDistribution& crossed, const TransportOptions& opts) {
  opts.validate();
  Totals t;
  t.ladder_elastic = ladder.line_weight().real();
  t.crossed_elastic = crossed.line_weight().real();

  // The outer integrand carries the inner quadrature noise, so it gets a
  // looser budget than the inner integrals.
  QuadOptions outer = opts.quad;
  outer.abs_tol *= 10.0;
  outer.rel_tol *= 10.0;

  std::vector<double> breaks{0.0};
  const auto& f = k.resonances();
  for (double a : f) {
    breaks.push_back(a);
    for (double b : f) breaks.push_back(a + b);
  }

  auto outer_integral = [&](PointFn point, double& value, double& err) {
    bool inner_ok = true;
    const BatchIntegrand g = [&](std::span<const double> w, std::span<double> out) {
      std::vector<PointEstimate> pts(w.size());
      parallel_for(w.size(), opts.threads, [&](std::size_t i) { pts[i] = point(k, w[i], opts); });
      for (std::size_t i = 0; i < w.size(); ++i) {
        out[i] = pts[i].value;
        inner_ok = inner_ok && pts[i].converged;
      }
    };
    const QuadResult q = integrate_real_line(g, 1, breaks, tail_scale(k), outer);
    value = q.value[0];
    err = q.abs_error[0];
    t.converged = t.converged && q.converged && inner_ok;
  };
  outer_integral(&ladder_smooth_at, t.ladder_inelastic, t.ladder_error);
  outer_integral(&crossed_smooth_at, t.crossed_inelastic, t.crossed_error);
  return t;
}

bool CbsResult::converged() const {
  return ladder.converged && crossed.converged && (!has_totals || totals.converged);
}

CbsResult compute_cbs(const AtomFieldParams& params, const FrequencyGrid& grid,
                      const TransportOptions& opts, bool with_totals) {
  auto k = std::make_shared<const KernelSet>(params);
  CbsResult r;
  r.params = params;
  r.grid = grid;
  r.ladder = ladder_spectrum(k, grid, opts);
  r.crossed = crossed_spectrum(k, grid, opts);
  if (with_totals) {
    r.totals = integrate_total(*k, r.ladder.distribution, r.crossed.distribution, opts);
    r.has_totals = true;
  }
  return r;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

std::vector<double> unit_peak(const std::vector<double>& values) {
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return values;
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] / peak;
  return out;
}

double relative_l2(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("relative_l2: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : INFINITY;
  return std::sqrt(num / den);
}

}  // namespace cbs
