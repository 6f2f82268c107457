// AVX2/FMA variant of the batched kernels, four lanes per register. This
// translation unit is the only one compiled with -mavx2 -mfma; it is reached
// through the dispatch table only after a runtime CPU check.

#include <immintrin.h>

#include "cbs/simd/batch.hpp"

namespace cbs::simd::detail {

namespace {

constexpr std::size_t kWidth = 4;

struct CReg {
  __m256d re, im;
};

inline CReg load(const Batch3& b, int c, std::size_t k) {
  return {_mm256_loadu_pd(b.re(c) + k), _mm256_loadu_pd(b.im(c) + k)};
}

inline void store(Batch3& b, int c, std::size_t k, const CReg& v) {
  _mm256_storeu_pd(b.re(c) + k, v.re);
  _mm256_storeu_pd(b.im(c) + k, v.im);
}

inline void mat_apply(const double* m_re, const double* m_im, const CReg b[3], CReg out[3]) {
  for (int r = 0; r < 3; ++r) {
    __m256d re = _mm256_setzero_pd();
    __m256d im = _mm256_setzero_pd();
    for (int k = 0; k < 3; ++k) {
      const __m256d mr = _mm256_set1_pd(m_re[3 * r + k]);
      const __m256d mi = _mm256_set1_pd(m_im[3 * r + k]);
      re = _mm256_fmadd_pd(mr, b[k].re, re);
      re = _mm256_fnmadd_pd(mi, b[k].im, re);
      im = _mm256_fmadd_pd(mr, b[k].im, im);
      im = _mm256_fmadd_pd(mi, b[k].re, im);
    }
    out[r] = {re, im};
  }
}

inline void finish(const ResolventCoeffs& c, __m256d w, const CReg b[3], const CReg u[3],
                   const CReg t[3], CReg out[3]) {
  const __m256d w2 = _mm256_mul_pd(w, w);
  const __m256d neg_w2 = _mm256_sub_pd(_mm256_setzero_pd(), w2);
  // p_re = -w2 c2re + w c1im + c0re
  __m256d p_re = _mm256_set1_pd(c.c_re[0]);
  p_re = _mm256_fmadd_pd(neg_w2, _mm256_set1_pd(c.c_re[2]), p_re);
  p_re = _mm256_fmadd_pd(w, _mm256_set1_pd(c.c_im[1]), p_re);
  // p_im = w2 w - w2 c2im - w c1re + c0im
  __m256d p_im = _mm256_set1_pd(c.c_im[0]);
  p_im = _mm256_fmadd_pd(w2, w, p_im);
  p_im = _mm256_fmadd_pd(neg_w2, _mm256_set1_pd(c.c_im[2]), p_im);
  p_im = _mm256_fnmadd_pd(w, _mm256_set1_pd(c.c_re[1]), p_im);
  const __m256d norm = _mm256_fmadd_pd(p_re, p_re, _mm256_mul_pd(p_im, p_im));
  const __m256d inv = _mm256_div_pd(_mm256_set1_pd(1.0), norm);
  for (int r = 0; r < 3; ++r) {
    __m256d n_re = _mm256_fmadd_pd(neg_w2, b[r].re, t[r].re);
    n_re = _mm256_fmadd_pd(w, u[r].im, n_re);
    __m256d n_im = _mm256_fmadd_pd(neg_w2, b[r].im, t[r].im);
    n_im = _mm256_fnmadd_pd(w, u[r].re, n_im);
    const __m256d o_re = _mm256_fmadd_pd(n_re, p_re, _mm256_mul_pd(n_im, p_im));
    const __m256d o_im = _mm256_fmsub_pd(n_im, p_re, _mm256_mul_pd(n_re, p_im));
    out[r] = {_mm256_mul_pd(o_re, inv), _mm256_mul_pd(o_im, inv)};
  }
}

void resolve_var(const ResolventCoeffs& c, const double* omega, std::size_t n, const Batch3& rhs,
                 Batch3& out) {
  const std::size_t vec_end = n - n % kWidth;
  for (std::size_t k = 0; k < vec_end; k += kWidth) {
    CReg b[3], u[3], t[3], o[3];
    for (int r = 0; r < 3; ++r) b[r] = load(rhs, r, k);
    mat_apply(c.b1_re, c.b1_im, b, u);
    mat_apply(c.b2_re, c.b2_im, b, t);
    finish(c, _mm256_loadu_pd(omega + k), b, u, t, o);
    for (int r = 0; r < 3; ++r) store(out, r, k, o[r]);
  }
  resolve_var_scalar(c, omega, vec_end, n, rhs, out);
}

void resolve_fixed(const ResolventCoeffs& c, const double* omega, std::size_t n, const Vec3& rhs,
                   Batch3& out) {
  CReg b[3], u[3], t[3];
  for (int r = 0; r < 3; ++r)
    b[r] = {_mm256_set1_pd(rhs[r].real()), _mm256_set1_pd(rhs[r].imag())};
  mat_apply(c.b1_re, c.b1_im, b, u);
  mat_apply(c.b2_re, c.b2_im, b, t);
  const std::size_t vec_end = n - n % kWidth;
  for (std::size_t k = 0; k < vec_end; k += kWidth) {
    CReg o[3];
    finish(c, _mm256_loadu_pd(omega + k), b, u, t, o);
    for (int r = 0; r < 3; ++r) store(out, r, k, o[r]);
  }
  resolve_fixed_scalar(c, omega, vec_end, n, rhs, out);
}

void matvec(const MatCoeffs& m, const Batch3& in, Batch3& out, bool accumulate) {
  const std::size_t n = in.size();
  const std::size_t vec_end = n - n % kWidth;
  for (std::size_t k = 0; k < vec_end; k += kWidth) {
    CReg b[3], o[3];
    for (int r = 0; r < 3; ++r) b[r] = load(in, r, k);
    mat_apply(m.re, m.im, b, o);
    for (int r = 0; r < 3; ++r) {
      if (accumulate) {
        const CReg prev = load(out, r, k);
        o[r] = {_mm256_add_pd(prev.re, o[r].re), _mm256_add_pd(prev.im, o[r].im)};
      }
      store(out, r, k, o[r]);
    }
  }
  matvec_scalar(m, vec_end, n, in, out, accumulate);
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable t{&resolve_var, &resolve_fixed, &matvec};
  return &t;
}

}  // namespace cbs::simd::detail
