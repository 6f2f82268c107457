#include "cbs/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace cbs {

Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

Mat3 operator+(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = a[i][j] + b[i][j];
  return r;
}

Mat3 operator*(cplx s, const Mat3& a) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = s * a[i][j];
  return r;
}

Mat3 identity3() {
  Mat3 r{};
  for (int i = 0; i < 3; ++i) r[i][i] = 1.0;
  return r;
}

Vec3 solve(const Mat3& a_in, const Vec3& b_in) {
  Mat3 a = a_in;
  Vec3 b = b_in;
  double scale = 0.0;
  for (const auto& row : a)
    for (const auto& x : row) scale = std::max(scale, std::abs(x));
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (!(std::abs(a[piv][col]) > 1e-300) || std::abs(a[piv][col]) <= 1e-14 * scale)
      throw std::domain_error("solve: singular 3x3 system");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = col + 1; r < 3; ++r) {
      const cplx f = a[r][col] / a[col][col];
      for (int c = col; c < 3; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  Vec3 x{};
  for (int r = 2; r >= 0; --r) {
    cplx acc = b[r];
    for (int c = r + 1; c < 3; ++c) acc -= a[r][c] * x[c];
    x[r] = acc / a[r][r];
  }
  return x;
}

Mat3 inverse(const Mat3& a) {
  Mat3 inv{};
  for (int c = 0; c < 3; ++c) {
    Vec3 e{};
    e[c] = 1.0;
    const Vec3 col = solve(a, e);
    for (int r = 0; r < 3; ++r) inv[r][c] = col[r];
  }
  return inv;
}

std::array<cplx, 3> eigenvalues(const Mat3& a) {
  Eigen::Matrix3cd m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = a[i][j];
  Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(m, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalues: no convergence");
  std::array<cplx, 3> ev{es.eigenvalues()(0), es.eigenvalues()(1), es.eigenvalues()(2)};
  std::sort(ev.begin(), ev.end(), [](cplx x, cplx y) {
    return x.imag() != y.imag() ? x.imag() < y.imag() : x.real() < y.real();
  });
  return ev;
}

double max_abs(const Vec3& v) {
  return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
}

}  // namespace cbs
