#include "cbs/run.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include "json.hpp"
#include <sstream>
#include <stdexcept>

#include "cbs/kernels.hpp"
#include "cbs/simd/batch.hpp"

#ifndef CBS_VERSION
#define CBS_VERSION "0.0.0"
#endif

namespace cbs {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kVerifyTolerance = 1e-3;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void row(const std::vector<double>& values) {
    if (values.size() != header_.size()) throw std::logic_error("table row width mismatch");
    rows_.push_back(values);
  }

  void write(const fs::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << header_[i];
    out << '\n';
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << num(r[i]);
      out << '\n';
    }
    if (!out) throw std::runtime_error("error while writing " + path.string());
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

json config_json(const RunConfig& c) {
  return {
      {"rabi", c.params.rabi},
      {"detuning", c.params.detuning},
      {"gamma", c.params.gamma},
      {"coupling_mod2", c.params.coupling_mod2},
      {"pair_multiplicity", c.transport.pair_multiplicity},
      {"grid_points", c.grid_points},
      {"range_multiplier", c.range_multiplier},
      {"abs_tol", c.transport.quad.abs_tol},
      {"rel_tol", c.transport.quad.rel_tol},
      {"max_panels", c.transport.quad.max_panels},
      {"mode", std::string(to_string(c.mode))},
      {"sweep_rabi", c.sweep_rabi},
      {"sweep_detuning", c.sweep_detuning},
      {"output_dir", c.output_dir},
      {"prefix", c.prefix},
      {"normalization", std::string(to_string(c.normalization))},
      {"probe_offset", c.probe_offset},
      {"oracle_g", c.oracle.g_magnitude},
      {"oracle_g_ratio", c.oracle.g_ratio},
      {"oracle_phases", c.oracle.phases},
      {"oracle_coherent_only", c.oracle.coherent_only},
      {"oracle_residual_tolerance", c.oracle.residual_tolerance},
      {"threads", c.transport.threads},
  };
}

json spectrum_diag(const SpectrumResult& s) {
  double max_err = 0.0, max_im = 0.0;
  for (double e : s.abs_errors) max_err = std::max(max_err, e);
  for (double r : s.imag_residues) max_im = std::max(max_im, r);
  return {{"converged", s.converged},
          {"max_abs_error", max_err},
          {"line_abs_error", s.line_error},
          {"max_imag_residue", max_im},
          {"integrand_evaluations", s.evaluations}};
}

json totals_json(const Totals& t) {
  return {{"ladder_elastic", t.ladder_elastic},     {"ladder_inelastic", t.ladder_inelastic},
          {"ladder_total", t.ladder()},             {"ladder_abs_error", t.ladder_error},
          {"crossed_elastic", t.crossed_elastic},   {"crossed_inelastic", t.crossed_inelastic},
          {"crossed_total", t.crossed()},           {"crossed_abs_error", t.crossed_error},
          {"converged", t.converged}};
}

double line_at_zero(const SpectralDistribution& d) { return d.line_weight().real(); }

void write_totals(const fs::path& path, const Totals& t) {
  Table tab({"ladder_elastic", "ladder_inelastic", "ladder_total", "ladder_abs_error",
             "crossed_elastic", "crossed_inelastic", "crossed_total", "crossed_abs_error",
             "contrast"});
  tab.row({t.ladder_elastic, t.ladder_inelastic, t.ladder(), t.ladder_error, t.crossed_elastic,
           t.crossed_inelastic, t.crossed(), t.crossed_error,
           t.ladder() != 0.0 ? t.crossed() / t.ladder() : 0.0});
  tab.write(path);
}

std::vector<double> normalized(const std::vector<double>& v, Normalization n) {
  return n == Normalization::UnitPeak ? unit_peak(v) : v;
}

struct Context {
  const RunConfig& cfg;
  RunReport& report;
  json& meta;

  fs::path path(const std::string& suffix) const {
    return fs::path(cfg.output_dir) / (cfg.prefix + suffix);
  }
  void flag(const std::string& why) {
    report.flagged = true;
    report.flags.push_back(why);
  }
  void wrote(const fs::path& p) { report.files.push_back(p); }
};

void run_kernels(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const KernelSet k(cfg.params);
  const FrequencyGrid grid = FrequencyGrid::make_default(cfg.params, cfg.grid_points, cfg.range_multiplier);
  const std::size_t n = grid.points.size();
  const double nu = cfg.probe_offset;

  std::vector<double> p0(n), p2(n);
  std::vector<cplx> p1(n);
  k.p0_smooth_batch(grid.points, p0);
  for (std::size_t i = 0; i < n; ++i) {
    k.p2_smooth_batch(grid.points[i], {&nu, 1}, {&p2[i], 1});
    k.p1_smooth_batch(grid.points[i], {&nu, 1}, {&p1[i], 1});
  }
  const std::vector<double> p0n = normalized(p0, cfg.normalization);
  const std::vector<double> p2n = normalized(p2, cfg.normalization);

  Table tab({"omega_offset_over_gamma", "p0_inel", "p1_inel_re", "p1_inel_im", "p2_inel"});
  for (std::size_t i = 0; i < n; ++i)
    tab.row({grid.points[i], p0n[i], p1[i].real(), p1[i].imag(), p2n[i]});
  tab.write(ctx.path("_kernels.csv"));
  ctx.wrote(ctx.path("_kernels.csv"));

  const P1Value v1 = k.p1(nu, 0.0);
  const P2Value v2 = k.p2(nu, 0.0);
  Table lines({"kernel", "position", "weight_re", "weight_im"});
  // kernel column: 0 = P0, 1 = P1, 2 = P2
  lines.row({0.0, 0.0, k.elastic_weight(), 0.0});
  lines.row({1.0, 0.0, v1.line_zero.real(), v1.line_zero.imag()});
  lines.row({1.0, nu, v1.line_probe.real(), v1.line_probe.imag()});
  lines.row({2.0, 0.0, v2.line_zero, 0.0});
  lines.row({2.0, nu, v2.line_probe, 0.0});
  lines.row({2.0, -nu, v2.line_mirror, 0.0});
  lines.write(ctx.path("_kernel_lines.csv"));
  ctx.wrote(ctx.path("_kernel_lines.csv"));

  ctx.meta["kernels"] = {{"probe_offset", nu},
                         {"grid_size", n},
                         {"elastic_weight", k.elastic_weight()},
                         {"excited_population", k.excited_population()},
                         {"saturation", saturation(cfg.params)}};
  ctx.report.summary = "kernels tabulated at " + std::to_string(n) + " offsets";
}

void write_lines(Context& ctx, const CbsResult& r, const OracleSpectra* o) {
  std::vector<std::string> head{"position", "ladder_weight", "crossed_weight"};
  std::vector<double> row{0.0, line_at_zero(r.ladder.distribution), line_at_zero(r.crossed.distribution)};
  if (o) {
    head.insert(head.end(), {"oracle_ladder_weight", "oracle_crossed_weight"});
    row.insert(row.end(), {o->ladder_line, o->crossed_line});
  }
  Table tab(head);
  tab.row(row);
  tab.write(ctx.path("_lines.csv"));
  ctx.wrote(ctx.path("_lines.csv"));
}

void run_spectra(Context& ctx, bool with_oracle) {
  const RunConfig& cfg = ctx.cfg;
  const FrequencyGrid grid = FrequencyGrid::make_default(cfg.params, cfg.grid_points, cfg.range_multiplier);
  const CbsResult r = compute_cbs(cfg.params, grid, cfg.transport, true);
  if (!r.ladder.converged) ctx.flag("ladder quadrature did not converge");
  if (!r.crossed.converged) ctx.flag("crossed quadrature did not converge");
  if (!r.totals.converged) ctx.flag("totals quadrature did not converge");

  std::unique_ptr<OracleSpectra> o;
  if (with_oracle) {
    o = std::make_unique<OracleSpectra>(extract_ladder_crossed(cfg.params, grid.points, cfg.oracle));
    // The oracle describes one unordered pair at unit |g|^2.
    const double scale = cfg.params.coupling_mod2 * cfg.transport.pair_multiplicity / 2.0;
    for (auto& v : o->ladder) v *= scale;
    for (auto& v : o->crossed) v *= scale;
    o->ladder_line *= scale;
    o->crossed_line *= scale;
  }

  const auto lad = normalized(r.ladder.values, cfg.normalization);
  const auto cro = normalized(r.crossed.values, cfg.normalization);
  std::vector<std::string> head{"omega_D_offset_over_gamma", "ladder_inel", "crossed_inel"};
  std::vector<double> olad, ocro;
  if (o) {
    head.insert(head.end(), {"oracle_ladder_inel", "oracle_crossed_inel"});
    olad = normalized(o->ladder, cfg.normalization);
    ocro = normalized(o->crossed, cfg.normalization);
  }
  Table tab(head);
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    std::vector<double> row{grid.points[i], lad[i], cro[i]};
    if (o) row.insert(row.end(), {olad[i], ocro[i]});
    tab.row(row);
  }
  tab.write(ctx.path("_spectra.csv"));
  ctx.wrote(ctx.path("_spectra.csv"));
  write_lines(ctx, r, o.get());
  write_totals(ctx.path("_totals.csv"), r.totals);
  ctx.wrote(ctx.path("_totals.csv"));

  ctx.meta["grid"] = {{"size", grid.points.size()},
                      {"lo", grid.points.front()},
                      {"hi", grid.points.back()},
                      {"hints", grid.hints}};
  ctx.meta["diagnostics"] = {{"ladder", spectrum_diag(r.ladder)},
                             {"crossed", spectrum_diag(r.crossed)}};
  ctx.meta["totals"] = totals_json(r.totals);
  std::ostringstream s;
  s << "I_L = " << num(r.totals.ladder()) << ", I_C = " << num(r.totals.crossed());

  if (o) {
    const double dl = relative_l2(unit_peak(r.ladder.values), unit_peak(o->ladder));
    const double dc = relative_l2(unit_peak(r.crossed.values), unit_peak(o->crossed));
    ctx.meta["oracle"] = {{"ladder_relative_l2", dl},
                          {"crossed_relative_l2", dc},
                          {"tolerance", kVerifyTolerance},
                          {"richardson_residual", o->richardson_residual},
                          {"imag_residual", o->imag_residual},
                          {"flagged", o->flagged},
                          {"ladder_line", o->ladder_line},
                          {"crossed_line", o->crossed_line}};
    if (o->flagged) ctx.flag("oracle extraction residual above tolerance");
    if (!(dl <= kVerifyTolerance)) ctx.flag("ladder disagrees with oracle");
    if (!(dc <= kVerifyTolerance)) ctx.flag("crossed disagrees with oracle");
    s << "; oracle relative L2: ladder " << num(dl) << ", crossed " << num(dc);
  }
  ctx.report.summary = s.str();
}

void run_totals(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const KernelSet k(cfg.params);
  PointEstimate dl, dc;
  const auto ll = ladder_lines(k, cfg.transport, &dl);
  const auto cl = crossed_lines(k, cfg.transport, &dc);
  const SpectralDistribution ld(SpectrumLabel::Ladder, ll, nullptr);
  const SpectralDistribution cd(SpectrumLabel::Crossed, cl, nullptr);
  const Totals t = integrate_total(k, ld, cd, cfg.transport);
  if (!t.converged || !dl.converged || !dc.converged) ctx.flag("totals quadrature did not converge");
  write_totals(ctx.path("_totals.csv"), t);
  ctx.wrote(ctx.path("_totals.csv"));
  Table tab({"position", "ladder_weight", "crossed_weight"});
  tab.row({0.0, line_at_zero(ld), line_at_zero(cd)});
  tab.write(ctx.path("_lines.csv"));
  ctx.wrote(ctx.path("_lines.csv"));
  ctx.meta["totals"] = totals_json(t);
  ctx.report.summary = "I_L = " + num(t.ladder()) + ", I_C = " + num(t.crossed());
}

void run_sweep(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  struct Point {
    AtomFieldParams p;
    Totals t;
  };
  std::vector<Point> pts;
  for (double om : cfg.sweep_rabi)
    for (double de : cfg.sweep_detuning) {
      Point pt;
      pt.p = cfg.params;
      pt.p.rabi = om;
      pt.p.detuning = de;
      pt.p.validate();
      pts.push_back(pt);
    }
  TransportOptions inner = cfg.transport;
  inner.threads = 1;
  parallel_for(pts.size(), cfg.transport.threads, [&](std::size_t i) {
    const KernelSet k(pts[i].p);
    const SpectralDistribution ld(SpectrumLabel::Ladder, ladder_lines(k, inner), nullptr);
    const SpectralDistribution cd(SpectrumLabel::Crossed, crossed_lines(k, inner), nullptr);
    pts[i].t = integrate_total(k, ld, cd, inner);
  });
  Table tab({"rabi", "detuning", "saturation", "ladder_elastic", "ladder_inelastic",
             "crossed_elastic", "crossed_inelastic", "contrast", "converged"});
  int bad = 0;
  for (const auto& pt : pts) {
    const Totals& t = pt.t;
    if (!t.converged) ++bad;
    tab.row({pt.p.rabi, pt.p.detuning, saturation(pt.p), t.ladder_elastic, t.ladder_inelastic,
             t.crossed_elastic, t.crossed_inelastic, t.ladder() != 0.0 ? t.crossed() / t.ladder() : 0.0,
             t.converged ? 1.0 : 0.0});
  }
  if (bad) ctx.flag(std::to_string(bad) + " sweep points did not converge");
  tab.write(ctx.path("_sweep.csv"));
  ctx.wrote(ctx.path("_sweep.csv"));
  ctx.meta["sweep"] = {{"points", pts.size()}, {"non_converged", bad}};
  ctx.report.summary = std::to_string(pts.size()) + " sweep points";
}

}  // namespace

std::string_view code_version() { return CBS_VERSION; }

RunReport run(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  RunReport report;
  json meta;
  meta["config"] = config_json(cfg);
  meta["code_version"] = std::string(code_version());
  meta["simd_backend"] = std::string(simd::to_string(simd::active_backend()));
  Context ctx{cfg, report, meta};

  const auto t0 = std::chrono::steady_clock::now();
  switch (cfg.mode) {
    case RunMode::Kernels: run_kernels(ctx); break;
    case RunMode::Spectra: run_spectra(ctx, false); break;
    case RunMode::Verify: run_spectra(ctx, true); break;
    case RunMode::Totals: run_totals(ctx); break;
    case RunMode::Sweep: run_sweep(ctx); break;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  meta["wall_time_seconds"] = wall;
  meta["flagged"] = report.flagged;
  meta["flags"] = report.flags;
  std::vector<std::string> files;
  for (const auto& f : report.files) files.push_back(f.filename().string());
  meta["outputs"] = files;
  const fs::path mp = ctx.path("_meta.json");
  std::ofstream out(mp);
  if (!out) throw std::runtime_error("cannot write " + mp.string());
  out << meta.dump(2) << '\n';
  report.files.push_back(mp);
  return report;
}

}  // namespace cbs
