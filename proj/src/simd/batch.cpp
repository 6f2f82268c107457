#include "cbs/simd/batch.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace cbs::simd {

void Batch3::resize(std::size_t n) {
  n_ = n;
  for (int c = 0; c < 3; ++c) {
    re_[c].resize(n);
    im_[c].resize(n);
  }
}

ShiftedResolvent::ShiftedResolvent(const Mat3& m) {
  const cplx t1 = m[0][0] + m[1][1] + m[2][2];
  const Mat3 m2 = m * m;
  const cplx tr2 = m2[0][0] + m2[1][1] + m2[2][2];
  const cplx t2 = 0.5 * (t1 * t1 - tr2);
  const cplx t3 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                  m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                  m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  b1 = m + (-t1) * identity3();
  b2 = m2 + (-t1) * m + t2 * identity3();
  c2 = -t1;
  c1 = t2;
  c0 = -t3;
}

Vec3 ShiftedResolvent::apply(double omega, const Vec3& rhs) const {
  const cplx s(0.0, -omega);
  const cplx det = ((s + c2) * s + c1) * s + c0;
  const Vec3 num = (s * s) * rhs + s * (b1 * rhs) + b2 * rhs;
  return (1.0 / det) * num;
}

Mat3 ShiftedResolvent::matrix(double omega) const {
  Mat3 r{};
  for (int c = 0; c < 3; ++c) {
    Vec3 e{};
    e[c] = 1.0;
    const Vec3 col = apply(omega, e);
    for (int i = 0; i < 3; ++i) r[i][c] = col[i];
  }
  return r;
}

std::string_view to_string(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const detail::KernelTable* table_for(Backend b) {
  return b == Backend::Avx2 ? detail::avx2_table() : &detail::scalar_table();
}

Backend initial_backend() {
  if (const char* env = std::getenv("CBS_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Backend::Scalar;
    if (v == "avx2" && backend_available(Backend::Avx2)) return Backend::Avx2;
  }
  return best_backend();
}

std::atomic<Backend>& active() {
  static std::atomic<Backend> backend{initial_backend()};
  return backend;
}

const detail::KernelTable& table() { return *table_for(active().load(std::memory_order_relaxed)); }

}  // namespace

bool backend_available(Backend b) {
  if (b == Backend::Scalar) return true;
  return detail::avx2_table() != nullptr && cpu_has_avx2();
}

Backend best_backend() { return backend_available(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar; }

Backend active_backend() { return active().load(); }

void set_backend(Backend b) {
  if (!backend_available(b))
    throw std::invalid_argument("SIMD backend '" + std::string(to_string(b)) + "' is not available");
  active().store(b);
}

namespace detail {

ResolventCoeffs flatten(const ShiftedResolvent& r) {
  ResolventCoeffs c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      c.b1_re[3 * i + j] = r.b1[i][j].real();
      c.b1_im[3 * i + j] = r.b1[i][j].imag();
      c.b2_re[3 * i + j] = r.b2[i][j].real();
      c.b2_im[3 * i + j] = r.b2[i][j].imag();
    }
  c.c_re[0] = r.c0.real();
  c.c_im[0] = r.c0.imag();
  c.c_re[1] = r.c1.real();
  c.c_im[1] = r.c1.imag();
  c.c_re[2] = r.c2.real();
  c.c_im[2] = r.c2.imag();
  return c;
}

MatCoeffs flatten(const Mat3& m) {
  MatCoeffs c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      c.re[3 * i + j] = m[i][j].real();
      c.im[3 * i + j] = m[i][j].imag();
    }
  return c;
}

}  // namespace detail

void resolve(const ShiftedResolvent& r, std::span<const double> omega, const Batch3& rhs,
             Batch3& out) {
  if (rhs.size() != omega.size()) throw std::invalid_argument("resolve: batch size mismatch");
  out.resize(omega.size());
  table().resolve_var(detail::flatten(r), omega.data(), omega.size(), rhs, out);
}

void resolve(const ShiftedResolvent& r, std::span<const double> omega, const Vec3& rhs,
             Batch3& out) {
  out.resize(omega.size());
  table().resolve_fixed(detail::flatten(r), omega.data(), omega.size(), rhs, out);
}

void matvec(const Mat3& m, const Batch3& in, Batch3& out, bool accumulate) {
  if (accumulate && out.size() != in.size())
    throw std::invalid_argument("matvec: batch size mismatch");
  if (&in == &out) throw std::invalid_argument("matvec: aliasing input and output");
  out.resize(in.size());
  table().matvec(detail::flatten(m), in, out, accumulate);
}

}  // namespace cbs::simd
