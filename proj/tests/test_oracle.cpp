#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <memory>
#include <random>

#include "cbs/bloch.hpp"
#include "cbs/kernels.hpp"
#include "cbs/oracle.hpp"
#include "cbs/transport.hpp"
#include "support/common.hpp"

using namespace cbs;
using cbs::testing::params;
using cbs::testing::rel_err;

namespace {

double nearest(const std::vector<cplx>& set, cplx z) {
  double d = 1e300;
  for (const cplx& s : set) d = std::min(d, std::abs(s - z));
  return d;
}

std::vector<double> small_grid(const AtomFieldParams& p, int n) {
  return FrequencyGrid::make_default(p, n).points;
}

struct Compared {
  double ladder = 0.0, crossed = 0.0, ladder_line = 0.0, crossed_line = 0.0;
};

Compared compare(const AtomFieldParams& p, int n, const OracleOptions& oo = {}) {
  const auto grid = FrequencyGrid::make_default(p, n);
  const auto res = compute_cbs(p, grid, {}, false);
  const auto ora = extract_ladder_crossed(p, grid.points, oo);
  CHECK_FALSE(ora.flagged);
  auto line = [](const SpectrumResult& s) { return s.distribution.line_weight().real(); };
  return {relative_l2(unit_peak(res.ladder.values), unit_peak(ora.ladder)),
          relative_l2(unit_peak(res.crossed.values), unit_peak(ora.crossed)),
          std::abs(line(res.ladder) - ora.ladder_line) / std::abs(ora.ladder_line),
          std::abs(line(res.crossed) - ora.crossed_line) / std::abs(ora.crossed_line)};
}

}  // namespace

TEST_CASE("uncoupled atoms radiate independently") {
  const auto p = params(3.0, -1.5);
  TwoAtomCoupling c;
  c.theta2 = 0.9;
  const auto l = build_two_atom(p, c);
  const KernelSet k(p);
  const std::vector<double> w{-6.0, -1.0, 0.0, 0.3, 4.0};
  const auto s = detected_spectrum(l, w);
  const cplx ph = std::polar(1.0, 0.9);
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(rel_err(s.smooth[0][0][i], k.p0_smooth(w[i])) < 1e-10);
    CHECK(rel_err(s.smooth[1][1][i], k.p0_smooth(w[i])) < 1e-10);
    CHECK(std::abs(s.smooth[0][1][i]) < 1e-12);
  }
  CHECK(rel_err(s.lines[0][0], k.elastic_weight()) < 1e-12);
  // <sigma+_1><sigma-_2> picks up the relative laser phase.
  CHECK(rel_err(s.lines[0][1], k.elastic_weight() * ph) < 1e-12);
}

TEST_CASE("uncoupled generator spectrum is built from single-atom rates") {
  const auto p = params(2.0, 1.0);
  const auto single = relaxation_eigenvalues(build_bloch(p));
  std::vector<cplx> want(single.begin(), single.end());
  for (const cplx& a : single)
    for (const cplx& b : single) want.push_back(a + b);
  const auto got = build_two_atom(p, {}).eigenvalues();
  REQUIRE(got.size() == 15);
  for (const cplx& e : got) CHECK(nearest(want, e) < 1e-9);
  for (const cplx& e : want) CHECK(nearest(got, e) < 1e-9);
}

TEST_CASE("weak coupling moves eigenvalues continuously") {
  const auto p = params(10.0, -5.0);
  const auto base = build_two_atom(p, {}).eigenvalues();
  for (double g : {1e-3, 1e-2}) {
    TwoAtomCoupling c;
    c.g = std::polar(g, 0.4);
    const auto l = build_two_atom(p, c);
    const auto ev = l.eigenvalues();
    double shift = 0.0;
    for (const cplx& e : ev) {
      CHECK(e.real() < 0.0);
      shift = std::max(shift, nearest(base, e));
    }
    // Generator perturbation is of order gamma |g|.
    CHECK(shift < 10.0 * g);
  }
}

TEST_CASE("stationary two-atom state is a density matrix") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * M_PI);
  for (int t = 0; t < 8; ++t) {
    const auto p = cbs::testing::random_params(rng);
    TwoAtomCoupling c;
    c.g = std::polar(0.03, ph(rng));
    c.theta2 = ph(rng);
    const auto rho = build_two_atom(p, c).density_matrix();
    CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
    CHECK((rho - rho.adjoint()).norm() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
  }
}

TEST_CASE("coupling strength is bounded") {
  TwoAtomCoupling c;
  c.g = 1.0;
  CHECK_THROWS_AS(build_two_atom(params(1.0, 0.0), c), std::invalid_argument);
  OracleOptions o;
  o.phases = 1;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);
  o = {};
  o.g_magnitude = 0.0;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);
}

TEST_CASE("no drive: oracle extraction vanishes") {
  // Dividing by |g|^2 (gamma/2)^2 lifts rounding to about 1e-12.
  const std::vector<double> w{-1.0, 0.0, 1.0};
  const auto ora = extract_ladder_crossed(params(0.0, -5.0), w);
  for (double v : ora.ladder) CHECK(std::abs(v) < 1e-10);
  for (double v : ora.crossed) CHECK(std::abs(v) < 1e-10);
  CHECK(std::abs(ora.ladder_line) < 1e-10);
  const auto tot = extract_totals(params(0.0, -5.0));
  CHECK(std::abs(tot.ladder) < 1e-10);
  CHECK(std::abs(tot.crossed) < 1e-10);
}

TEST_CASE("oracle agrees with the transport spectra") {
  std::vector<AtomFieldParams> sets{params(0.1, -5.0), params(10.0, -5.0)};
  std::mt19937_64 rng(5);
  for (int t = 0; t < 3; ++t) sets.push_back(cbs::testing::random_params(rng));
  for (const auto& p : sets) {
    CAPTURE(p.rabi);
    CAPTURE(p.detuning);
    const auto c = compare(p, 61);
    CHECK(c.ladder <= 1e-3);
    CHECK(c.crossed <= 1e-3);
    CHECK(c.ladder_line <= 1e-3);
    CHECK(c.crossed_line <= 1e-3);
  }
}

TEST_CASE("oracle extraction is stable under its own discretisation") {
  for (const auto& p : {params(0.1, -5.0), params(10.0, -5.0)}) {
    const auto w = small_grid(p, 41);
    OracleOptions base;
    OracleOptions bigger = base;
    bigger.g_magnitude *= 2.0;
    OracleOptions finer = base;
    finer.phases = 12;
    const auto a = extract_ladder_crossed(p, w, base);
    const auto b = extract_ladder_crossed(p, w, bigger);
    const auto c = extract_ladder_crossed(p, w, finer);
    CHECK(relative_l2(b.ladder, a.ladder) <= 1e-3);
    CHECK(relative_l2(b.crossed, a.crossed) <= 1e-3);
    CHECK(relative_l2(c.ladder, a.ladder) <= 1e-3);
    CHECK(relative_l2(c.crossed, a.crossed) <= 1e-3);
    CHECK(a.imag_residual <= 1e-6);
  }
}

TEST_CASE("frequency-integrated intensities agree with the oracle") {
  for (double om : {0.1, 1.0, 10.0})
    for (double d : {0.0, -5.0, 2.0}) {
      const auto p = params(om, d);
      const auto res = compute_cbs(p, FrequencyGrid::uniform(-1.0, 1.0, 3));
      const auto ora = extract_totals(p);
      CAPTURE(om);
      CAPTURE(d);
      REQUIRE(res.totals.converged);
      const double scale = std::max(std::abs(ora.ladder), std::abs(ora.crossed));
      CHECK(std::abs(res.totals.ladder() - ora.ladder) <= 1e-3 * scale);
      CHECK(std::abs(res.totals.crossed() - ora.crossed) <= 1e-3 * scale);
    }
}

TEST_CASE("cross damping is part of the coupling") {
  // Keeping only the coherent exchange changes the extracted spectra at first
  // order, so the full dipole-dipole coupling is required for agreement.
  const auto p = params(10.0, -5.0);
  const auto w = small_grid(p, 41);
  OracleOptions coh;
  coh.coherent_only = true;
  const auto full = extract_ladder_crossed(p, w);
  const auto part = extract_ladder_crossed(p, w, coh);
  const double dl = relative_l2(part.ladder, full.ladder);
  const double dc = relative_l2(part.crossed, full.crossed);
  MESSAGE("coherent-only relative change: ladder " << dl << ", crossed " << dc);
  CHECK(std::max(dl, dc) > 1e-2);
}
