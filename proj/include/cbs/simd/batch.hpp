#pragma once

// Batched complex 3-vector kernels. Every lane is one frequency node; the
// physics layers evaluate spectral kernels at whole quadrature panels at once.
//
// Two backends implement the same arithmetic: a portable scalar reference and
// an AVX2/FMA variant. The active backend is chosen at runtime from the CPU
// features (override with CBS_SIMD=scalar|avx2 or set_backend()).

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "cbs/linalg.hpp"

namespace cbs::simd {

/// Structure-of-arrays batch of complex 3-vectors.
class Batch3 {
 public:
  Batch3() = default;
  explicit Batch3(std::size_t n) { resize(n); }

  void resize(std::size_t n);
  std::size_t size() const { return n_; }

  double* re(int c) { return re_[c].data(); }
  double* im(int c) { return im_[c].data(); }
  const double* re(int c) const { return re_[c].data(); }
  const double* im(int c) const { return im_[c].data(); }

  cplx get(int c, std::size_t k) const { return {re_[c][k], im_[c][k]}; }
  void set(int c, std::size_t k, cplx v) {
    re_[c][k] = v.real();
    im_[c][k] = v.imag();
  }
  Vec3 lane(std::size_t k) const { return {get(0, k), get(1, k), get(2, k)}; }
  void set_lane(std::size_t k, const Vec3& v) {
    for (int c = 0; c < 3; ++c) set(c, k, v[c]);
  }

 private:
  std::size_t n_ = 0;
  std::array<std::vector<double>, 3> re_, im_;
};

/// (-i omega - M)^{-1} for a fixed 3x3 matrix M, in Cayley-Hamilton form:
/// with s = -i omega, adj(s - M) = s^2 + s b1 + b2 and
/// det(s - M) = s^3 + c2 s^2 + c1 s + c0.
struct ShiftedResolvent {
  ShiftedResolvent() = default;
  explicit ShiftedResolvent(const Mat3& m);

  Mat3 b1{};
  Mat3 b2{};
  cplx c2, c1, c0;

  Vec3 apply(double omega, const Vec3& rhs) const;
  Mat3 matrix(double omega) const;
};

enum class Backend { Scalar, Avx2 };

std::string_view to_string(Backend b);
bool backend_available(Backend b);
Backend best_backend();
Backend active_backend();
/// Throws std::invalid_argument if the backend is not available on this CPU/build.
void set_backend(Backend b);

/// out[k] = R(omega[k]) rhs[k]
void resolve(const ShiftedResolvent& r, std::span<const double> omega, const Batch3& rhs,
             Batch3& out);
/// out[k] = R(omega[k]) rhs
void resolve(const ShiftedResolvent& r, std::span<const double> omega, const Vec3& rhs,
             Batch3& out);
/// out[k] = m in[k], or out[k] += m in[k] when accumulating.
void matvec(const Mat3& m, const Batch3& in, Batch3& out, bool accumulate = false);

namespace detail {

// Flattened operands shared by both backends.
struct ResolventCoeffs {
  double b1_re[9], b1_im[9], b2_re[9], b2_im[9];
  double c_re[3], c_im[3];  // c0, c1, c2
};
struct MatCoeffs {
  double re[9], im[9];
};

ResolventCoeffs flatten(const ShiftedResolvent& r);
MatCoeffs flatten(const Mat3& m);

struct KernelTable {
  void (*resolve_var)(const ResolventCoeffs&, const double* omega, std::size_t n, const Batch3& rhs,
                      Batch3& out);
  void (*resolve_fixed)(const ResolventCoeffs&, const double* omega, std::size_t n, const Vec3& rhs,
                        Batch3& out);
  void (*matvec)(const MatCoeffs&, const Batch3& in, Batch3& out, bool accumulate);
};

const KernelTable& scalar_table();
/// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_table();

// Lane-range entry points of the scalar reference, also used for the tails of
// the vector loops.
void resolve_var_scalar(const ResolventCoeffs& c, const double* omega, std::size_t begin,
                        std::size_t end, const Batch3& rhs, Batch3& out);
void resolve_fixed_scalar(const ResolventCoeffs& c, const double* omega, std::size_t begin,
                          std::size_t end, const Vec3& rhs, Batch3& out);
void matvec_scalar(const MatCoeffs& m, std::size_t begin, std::size_t end, const Batch3& in,
                   Batch3& out, bool accumulate);

}  // namespace detail
}  // namespace cbs::simd
