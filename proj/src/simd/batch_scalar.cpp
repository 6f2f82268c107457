// Portable reference for the batched kernels. The AVX2 variant reproduces this
// arithmetic lane by lane (up to FMA contraction).

#include "cbs/simd/batch.hpp"

namespace cbs::simd::detail {

namespace {

struct Lane {
  double re, im;
};

// Resolvent numerator and denominator for s = -i w:
//   num = -w^2 b - i w (b1 b) + b2 b
//   det = i w^3 - c2 w^2 - i c1 w + c0
inline void finish_lane(const ResolventCoeffs& c, double w, const Lane b[3], const Lane u[3],
                        const Lane t[3], Lane out[3]) {
  const double w2 = w * w;
  const double p_re = -w2 * c.c_re[2] + w * c.c_im[1] + c.c_re[0];
  const double p_im = w2 * w - w2 * c.c_im[2] - w * c.c_re[1] + c.c_im[0];
  const double inv = 1.0 / (p_re * p_re + p_im * p_im);
  for (int r = 0; r < 3; ++r) {
    const double n_re = -w2 * b[r].re + w * u[r].im + t[r].re;
    const double n_im = -w2 * b[r].im - w * u[r].re + t[r].im;
    out[r].re = (n_re * p_re + n_im * p_im) * inv;
    out[r].im = (n_im * p_re - n_re * p_im) * inv;
  }
}

inline void mat_apply(const double* m_re, const double* m_im, const Lane b[3], Lane out[3]) {
  for (int r = 0; r < 3; ++r) {
    double re = 0.0, im = 0.0;
    for (int k = 0; k < 3; ++k) {
      re += m_re[3 * r + k] * b[k].re - m_im[3 * r + k] * b[k].im;
      im += m_re[3 * r + k] * b[k].im + m_im[3 * r + k] * b[k].re;
    }
    out[r] = {re, im};
  }
}

void resolve_var_table(const ResolventCoeffs& c, const double* omega, std::size_t n,
                       const Batch3& rhs, Batch3& out) {
  resolve_var_scalar(c, omega, 0, n, rhs, out);
}

void resolve_fixed_table(const ResolventCoeffs& c, const double* omega, std::size_t n,
                         const Vec3& rhs, Batch3& out) {
  resolve_fixed_scalar(c, omega, 0, n, rhs, out);
}

void matvec_table(const MatCoeffs& m, const Batch3& in, Batch3& out, bool accumulate) {
  matvec_scalar(m, 0, in.size(), in, out, accumulate);
}

}  // namespace

void resolve_var_scalar(const ResolventCoeffs& c, const double* omega, std::size_t begin,
                        std::size_t end, const Batch3& rhs, Batch3& out) {
  for (std::size_t k = begin; k < end; ++k) {
    Lane b[3], u[3], t[3], o[3];
    for (int r = 0; r < 3; ++r) b[r] = {rhs.re(r)[k], rhs.im(r)[k]};
    mat_apply(c.b1_re, c.b1_im, b, u);
    mat_apply(c.b2_re, c.b2_im, b, t);
    finish_lane(c, omega[k], b, u, t, o);
    for (int r = 0; r < 3; ++r) {
      out.re(r)[k] = o[r].re;
      out.im(r)[k] = o[r].im;
    }
  }
}

void resolve_fixed_scalar(const ResolventCoeffs& c, const double* omega, std::size_t begin,
                          std::size_t end, const Vec3& rhs, Batch3& out) {
  Lane b[3], u[3], t[3];
  for (int r = 0; r < 3; ++r) b[r] = {rhs[r].real(), rhs[r].imag()};
  mat_apply(c.b1_re, c.b1_im, b, u);
  mat_apply(c.b2_re, c.b2_im, b, t);
  for (std::size_t k = begin; k < end; ++k) {
    Lane o[3];
    finish_lane(c, omega[k], b, u, t, o);
    for (int r = 0; r < 3; ++r) {
      out.re(r)[k] = o[r].re;
      out.im(r)[k] = o[r].im;
    }
  }
}

void matvec_scalar(const MatCoeffs& m, std::size_t begin, std::size_t end, const Batch3& in,
                   Batch3& out, bool accumulate) {
  for (std::size_t k = begin; k < end; ++k) {
    Lane b[3], o[3];
    for (int r = 0; r < 3; ++r) b[r] = {in.re(r)[k], in.im(r)[k]};
    mat_apply(m.re, m.im, b, o);
    for (int r = 0; r < 3; ++r) {
      if (accumulate) {
        out.re(r)[k] += o[r].re;
        out.im(r)[k] += o[r].im;
      } else {
        out.re(r)[k] = o[r].re;
        out.im(r)[k] = o[r].im;
      }
    }
  }
}

const KernelTable& scalar_table() {
  static const KernelTable t{&resolve_var_table, &resolve_fixed_table, &matvec_table};
  return t;
}

#if !defined(CBS_HAVE_AVX2)
const KernelTable* avx2_table() { return nullptr; }
#endif

}  // namespace cbs::simd::detail
