#pragma once

#include <array>

#include "cbs/phys.hpp"

namespace cbs {

using Vec3 = std::array<cplx, 3>;
using Mat3 = std::array<std::array<cplx, 3>, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(cplx s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec3 operator-(const Vec3& a) { return {-a[0], -a[1], -a[2]}; }

inline Vec3 operator*(const Mat3& m, const Vec3& v) {
  Vec3 r{};
  for (int i = 0; i < 3; ++i) r[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
  return r;
}

Mat3 operator*(const Mat3& a, const Mat3& b);
Mat3 operator+(const Mat3& a, const Mat3& b);
Mat3 operator*(cplx s, const Mat3& a);
Mat3 identity3();

/// (sigma-, sigma+, sigma_z) -> conj(sigma+, sigma-, sigma_z).
inline Vec3 swap_conj(const Vec3& v) { return {std::conj(v[1]), std::conj(v[0]), std::conj(v[2])}; }

/// Gaussian elimination with partial pivoting. Throws std::domain_error when
/// the matrix is numerically singular.
Vec3 solve(const Mat3& a, const Vec3& b);
Mat3 inverse(const Mat3& a);

std::array<cplx, 3> eigenvalues(const Mat3& a);

double max_abs(const Vec3& v);

}  // namespace cbs
