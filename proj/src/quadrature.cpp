#include "cbs/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <queue>
#include <stdexcept>

namespace cbs {

namespace {

// Gauss-Kronrod 10/21 nodes on [-1, 1] (QUADPACK qk21): x_k >= 0, descending.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980688760, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};
constexpr int kNodes = 21;

enum class Map { Finite, Upper, Lower };

// A piece of the real line: finite [a, b], or a tail from `a` in the mapped
// variable t in [lo, hi] subset [0, 1).
struct Piece {
  Map map = Map::Finite;
  double a = 0.0;
  double scale = 1.0;
};

struct Panel {
  Panel(int pc, double a, double b) : piece(pc), lo(a), hi(b) {}

  int piece = 0;
  double lo = 0.0;
  double hi = 0.0;
  double err = 0.0;  // max over components
  std::vector<double> value, abs_value, error;
};

struct ByError {
  bool operator()(const Panel* x, const Panel* y) const {
    if (x->err != y->err) return x->err < y->err;
    return x->lo > y->lo;  // deterministic tie-break
  }
};

class Integrator {
 public:
  Integrator(const BatchIntegrand& f, int m, std::vector<Piece> pieces, const QuadOptions& opts)
      : f_(f), m_(m), pieces_(std::move(pieces)), opts_(opts) {}

  QuadResult run(const std::vector<std::pair<int, std::pair<double, double>>>& initial) {
    std::vector<Panel> first;
    for (const auto& [piece, range] : initial) first.push_back({piece, range.first, range.second});
    evaluate(first);
    for (auto& p : first) push(std::move(p));

    QuadResult res;
    while (true) {
      std::vector<double> total(m_, 0.0), abs_total(m_, 0.0), err(m_, 0.0);
      summarize(total, abs_total, err);
      bool done = true;
      for (int c = 0; c < m_; ++c) {
        const double tol = std::max(opts_.abs_tol, opts_.rel_tol * abs_total[c]);
        if (!(err[c] <= tol)) done = false;
      }
      if (done || static_cast<int>(store_.size()) >= opts_.max_panels || heap_.empty()) {
        res.value = total;
        res.abs_error = err;
        res.converged = done;
        break;
      }
      Panel* worst = heap_.top();
      heap_.pop();
      const double mid = 0.5 * (worst->lo + worst->hi);
      if (!(mid > worst->lo && mid < worst->hi)) {
        // Cannot bisect further in floating point; keep the estimate.
        frozen_.push_back(worst);
        continue;
      }
      std::vector<Panel> halves{{worst->piece, worst->lo, mid}, {worst->piece, mid, worst->hi}};
      retire(worst);
      evaluate(halves);
      for (auto& p : halves) push(std::move(p));
    }
    res.evaluations = evaluations_;
    return res;
  }

 private:
  void push(Panel&& p) {
    store_.push_back(std::make_unique<Panel>(std::move(p)));
    heap_.push(store_.back().get());
  }

  void retire(Panel* p) { p->piece = -1; }

  // Sum over live panels in creation order, so the result does not depend on
  // heap layout.
  void summarize(std::vector<double>& total, std::vector<double>& abs_total,
                 std::vector<double>& err) const {
    for (const auto& p : store_) {
      if (p->piece < 0) continue;
      for (int c = 0; c < m_; ++c) {
        total[c] += p->value[c];
        abs_total[c] += p->abs_value[c];
        err[c] += p->error[c];
      }
    }
  }

  void evaluate(std::vector<Panel>& panels) {
    const std::size_t n = panels.size() * kNodes;
    x_.resize(n);
    t_.resize(n);
    jac_.resize(n);
    for (std::size_t i = 0; i < panels.size(); ++i) {
      const Panel& p = panels[i];
      const double c = 0.5 * (p.lo + p.hi), h = 0.5 * (p.hi - p.lo);
      for (int k = 0; k < kNodes; ++k) {
        const double u = k < 10 ? -kXgk[k] : k == 10 ? 0.0 : kXgk[20 - k];
        const double t = c + h * u;
        const std::size_t j = i * kNodes + k;
        map_node(pieces_[p.piece], t, x_[j], jac_[j]);
      }
    }
    out_.assign(n * m_, 0.0);
    f_(x_, out_);
    evaluations_ += static_cast<long>(n);

    for (std::size_t i = 0; i < panels.size(); ++i) {
      Panel& p = panels[i];
      const double h = 0.5 * (p.hi - p.lo);
      p.value.assign(m_, 0.0);
      p.abs_value.assign(m_, 0.0);
      p.error.assign(m_, 0.0);
      p.err = 0.0;
      for (int c = 0; c < m_; ++c) {
        const double* y = &out_[c * n + i * kNodes];
        const double* jac = &jac_[i * kNodes];
        auto val = [&](int k) { return y[k] * jac[k]; };
        double kron = kWgk[10] * val(10);
        double gauss = 0.0;
        double absk = kWgk[10] * std::abs(val(10));
        for (int j = 0; j < 10; ++j) {
          const double s = val(j) + val(20 - j);
          kron += kWgk[j] * s;
          absk += kWgk[j] * (std::abs(val(j)) + std::abs(val(20 - j)));
          if (j % 2 == 1) gauss += kWg[j / 2] * s;
        }
        const double mean = 0.5 * kron;
        double asc = kWgk[10] * std::abs(val(10) - mean);
        for (int j = 0; j < 10; ++j)
          asc += kWgk[j] * (std::abs(val(j) - mean) + std::abs(val(20 - j) - mean));
        asc *= std::abs(h);
        double e = std::abs((kron - gauss) * h);
        if (asc != 0.0 && e != 0.0) e = asc * std::min(1.0, std::pow(200.0 * e / asc, 1.5));
        const double absv = absk * std::abs(h);
        const double eps = 50.0 * std::numeric_limits<double>::epsilon();
        if (absv > std::numeric_limits<double>::min() / eps) e = std::max(eps * absv, e);
        if (!std::isfinite(kron)) e = std::numeric_limits<double>::infinity();
        p.value[c] = kron * h;
        p.abs_value[c] = absv;
        p.error[c] = e;
        p.err = std::max(p.err, e);
      }
    }
  }

  static void map_node(const Piece& pc, double t, double& x, double& jac) {
    switch (pc.map) {
      case Map::Finite:
        x = t;
        jac = 1.0;
        return;
      case Map::Upper: {
        const double r = 1.0 / (1.0 - t);
        x = pc.a + pc.scale * t * r;
        jac = pc.scale * r * r;
        return;
      }
      case Map::Lower: {
        const double r = 1.0 / (1.0 - t);
        x = pc.a - pc.scale * t * r;
        jac = pc.scale * r * r;
        return;
      }
    }
  }

  const BatchIntegrand& f_;
  int m_;
  std::vector<Piece> pieces_;
  QuadOptions opts_;
  std::vector<std::unique_ptr<Panel>> store_;
  std::priority_queue<Panel*, std::vector<Panel*>, ByError> heap_;
  std::vector<Panel*> frozen_;
  std::vector<double> x_, t_, jac_, out_;
  long evaluations_ = 0;
};

void check_common(int components, const QuadOptions& opts) {
  if (components < 1) throw std::invalid_argument("integrand must have at least one component");
  opts.validate();
}

}  // namespace

void QuadOptions::validate() const {
  if (!(abs_tol > 0.0)) throw std::invalid_argument("invalid parameter 'abs_tol': must be > 0");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("invalid parameter 'rel_tol': must be > 0");
  if (max_panels < 1) throw std::invalid_argument("invalid parameter 'max_panels': must be >= 1");
}

std::vector<double> unique_sorted(std::vector<double> pts, double tol) {
  std::erase_if(pts, [](double v) { return !std::isfinite(v); });
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double v : pts)
    if (out.empty() || v - out.back() >= tol) out.push_back(v);
  return out;
}

QuadResult integrate_real_line(const BatchIntegrand& f, int components,
                               std::vector<double> breakpoints, double tail_scale,
                               const QuadOptions& opts) {
  check_common(components, opts);
  if (!(tail_scale > 0.0)) throw std::invalid_argument("tail scale must be > 0");
  breakpoints = unique_sorted(std::move(breakpoints));
  if (breakpoints.empty()) breakpoints.push_back(0.0);

  std::vector<Piece> pieces{{Map::Finite, 0.0, 1.0},
                            {Map::Upper, breakpoints.back(), tail_scale},
                            {Map::Lower, breakpoints.front(), tail_scale}};
  std::vector<std::pair<int, std::pair<double, double>>> initial;
  initial.push_back({2, {0.0, 1.0}});
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    initial.push_back({0, {breakpoints[i], breakpoints[i + 1]}});
  initial.push_back({1, {0.0, 1.0}});
  return Integrator(f, components, std::move(pieces), opts).run(initial);
}

QuadResult integrate_half_line(const BatchIntegrand& f, int components, double a,
                               std::vector<double> breakpoints, double tail_scale,
                               const QuadOptions& opts) {
  check_common(components, opts);
  if (!(tail_scale > 0.0)) throw std::invalid_argument("tail scale must be > 0");
  std::erase_if(breakpoints, [a](double v) { return !(v > a); });
  breakpoints.push_back(a);
  breakpoints = unique_sorted(std::move(breakpoints));
  if (breakpoints.front() != a) breakpoints.front() = a;

  std::vector<Piece> pieces{{Map::Finite, 0.0, 1.0}, {Map::Upper, breakpoints.back(), tail_scale}};
  std::vector<std::pair<int, std::pair<double, double>>> initial;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    initial.push_back({0, {breakpoints[i], breakpoints[i + 1]}});
  initial.push_back({1, {0.0, 1.0}});
  return Integrator(f, components, std::move(pieces), opts).run(initial);
}

QuadResult integrate_interval(const BatchIntegrand& f, int components, double a, double b,
                              const QuadOptions& opts) {
  check_common(components, opts);
  if (!(b >= a)) throw std::invalid_argument("interval must satisfy a <= b");
  if (a == b) {
    QuadResult r;
    r.value.assign(components, 0.0);
    r.abs_error.assign(components, 0.0);
    return r;
  }
  std::vector<Piece> pieces{{Map::Finite, 0.0, 1.0}};
  return Integrator(f, components, std::move(pieces), opts).run({{0, {a, b}}});
}

}  // namespace cbs
