#pragma once

#include <functional>
#include <span>
#include <vector>

namespace cbs {

struct QuadOptions {
  double abs_tol = 1e-14;
  double rel_tol = 1e-10;
  int max_panels = 4000;

  void validate() const;
};

/// Per-component value, estimated absolute error, and cost. `converged` is
/// false when the panel budget ran out before the tolerance was met.
struct QuadResult {
  std::vector<double> value;
  std::vector<double> abs_error;
  long evaluations = 0;
  bool converged = true;
};

/// Vector-valued integrand evaluated on a batch of nodes. For n nodes and m
/// components, f(x, out) fills out[c * n + k] with component c at x[k].
using BatchIntegrand = std::function<void(std::span<const double> x, std::span<double> out)>;

/// Integral over the whole real line. The line is cut at the breakpoints; the
/// two outer pieces are mapped to [0, 1) with x = b +- L t / (1 - t), L = tail_scale.
/// Panels are bisected in order of decreasing error estimate until
/// sum(err) <= max(abs_tol, rel_tol * int |f|) for every component.
QuadResult integrate_real_line(const BatchIntegrand& f, int components,
                               std::vector<double> breakpoints, double tail_scale,
                               const QuadOptions& opts = {});

/// Integral over [a, +inf) with the same tail map and the given interior breakpoints.
QuadResult integrate_half_line(const BatchIntegrand& f, int components, double a,
                               std::vector<double> breakpoints, double tail_scale,
                               const QuadOptions& opts = {});

/// Integral over the finite interval [a, b].
QuadResult integrate_interval(const BatchIntegrand& f, int components, double a, double b,
                              const QuadOptions& opts = {});

/// Sorted, deduplicated copy (points closer than tol collapse to the first).
std::vector<double> unique_sorted(std::vector<double> pts, double tol = 1e-9);

}  // namespace cbs
