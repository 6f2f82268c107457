#include <doctest.h>

#include <random>
#include <stdexcept>
#include <vector>

#include "cbs/linalg.hpp"
#include "cbs/simd/batch.hpp"
#include "support/common.hpp"

using namespace cbs;
using cbs::testing::rel_err;

namespace {

Mat3 random_mat(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Mat3 m;
  for (auto& row : m)
    for (auto& x : row) x = {n(rng), n(rng)};
  return m;
}

// Random matrix with eigenvalues in the open left half plane.
Mat3 relaxing_mat(std::mt19937_64& rng) {
  Mat3 m = random_mat(rng);
  double shift = 0.0;
  for (const cplx& ev : eigenvalues(m)) shift = std::max(shift, ev.real());
  for (int i = 0; i < 3; ++i) m[i][i] -= shift + 0.3;
  return m;
}

simd::Batch3 random_batch(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d;
  simd::Batch3 b(n);
  for (std::size_t k = 0; k < n; ++k)
    for (int c = 0; c < 3; ++c) b.set(c, k, {d(rng), d(rng)});
  return b;
}

double batch_rel_diff(const simd::Batch3& a, const simd::Batch3& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double scale = 0.0;
    for (int c = 0; c < 3; ++c) scale = std::max({scale, std::abs(a.get(c, k)), std::abs(b.get(c, k))});
    for (int c = 0; c < 3; ++c)
      worst = std::max(worst, std::abs(a.get(c, k) - b.get(c, k)) / scale);
  }
  return worst;
}

struct BackendGuard {
  simd::Backend saved = simd::active_backend();
  ~BackendGuard() { simd::set_backend(saved); }
};

}  // namespace

TEST_CASE("solve agrees with the inverse") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const Mat3 a = random_mat(rng);
    const Vec3 b{cplx(1.0, 2.0), cplx(-0.5, 0.0), cplx(0.0, 3.0)};
    const Vec3 x = solve(a, b);
    const Vec3 r = a * x - b;
    CHECK(max_abs(r) < 1e-12 * (1.0 + max_abs(x)));
    const Vec3 y = inverse(a) * b;
    for (int i = 0; i < 3; ++i) CHECK(rel_err(x[i], y[i]) < 1e-10);
  }
}

TEST_CASE("solve rejects a singular matrix") {
  Mat3 a{};
  a[0][0] = 1.0;
  a[1][1] = 1.0;
  CHECK_THROWS_AS(solve(a, {1.0, 1.0, 1.0}), std::domain_error);
}

TEST_CASE("eigenvalues of a triangular matrix are its diagonal, sorted") {
  Mat3 a{};
  a[0][0] = cplx(-1.0, 2.0);
  a[1][1] = cplx(-0.5, -3.0);
  a[2][2] = cplx(-2.0, 0.0);
  a[0][1] = 4.0;
  a[1][2] = cplx(0.0, 1.0);
  const auto ev = eigenvalues(a);
  CHECK(rel_err(ev[0], cplx(-0.5, -3.0)) < 1e-12);
  CHECK(rel_err(ev[1], cplx(-2.0, 0.0)) < 1e-12);
  CHECK(rel_err(ev[2], cplx(-1.0, 2.0)) < 1e-12);
}

TEST_CASE("Cayley-Hamilton resolvent matches direct elimination") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> w(-30.0, 30.0);
  for (int t = 0; t < 40; ++t) {
    const Mat3 m = relaxing_mat(rng);
    const simd::ShiftedResolvent r(m);
    const Vec3 rhs{cplx(0.3, -1.0), cplx(2.0, 0.5), cplx(-1.0, 0.0)};
    for (int k = 0; k < 10; ++k) {
      const double omega = w(rng);
      Mat3 shifted = (-1.0) * m;
      for (int i = 0; i < 3; ++i) shifted[i][i] += cplx(0.0, -omega);
      const Vec3 want = solve(shifted, rhs);
      const Vec3 got = r.apply(omega, rhs);
      const Mat3 rm = r.matrix(omega);
      const Vec3 via_matrix = rm * rhs;
      for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(got[i] - want[i]) <= 1e-11 * max_abs(want));
        CHECK(std::abs(via_matrix[i] - want[i]) <= 1e-11 * max_abs(want));
      }
    }
  }
}

TEST_CASE("batch lanes round trip") {
  simd::Batch3 b(5);
  b.set_lane(3, {cplx(1, 2), cplx(3, 4), cplx(5, 6)});
  CHECK(b.lane(3)[1] == cplx(3, 4));
  CHECK(b.re(2)[3] == 5.0);
  CHECK(b.im(0)[3] == 2.0);
  CHECK(b.size() == 5);
}

TEST_CASE("scalar batch kernels agree with the pointwise resolvent") {
  BackendGuard guard;
  simd::set_backend(simd::Backend::Scalar);
  std::mt19937_64 rng(7);
  const Mat3 m = relaxing_mat(rng);
  const simd::ShiftedResolvent r(m);
  const std::size_t n = 37;
  std::vector<double> omega(n);
  for (std::size_t k = 0; k < n; ++k) omega[k] = -20.0 + 40.0 * k / (n - 1);
  const simd::Batch3 rhs = random_batch(rng, n);
  simd::Batch3 out;
  simd::resolve(r, omega, rhs, out);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 want = r.apply(omega[k], rhs.lane(k));
    for (int c = 0; c < 3; ++c) CHECK(rel_err(out.get(c, k), want[c]) < 1e-12);
  }
  const Vec3 fixed{cplx(1.0, 0.0), cplx(0.0, -1.0), cplx(0.5, 0.5)};
  simd::resolve(r, omega, fixed, out);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 want = r.apply(omega[k], fixed);
    for (int c = 0; c < 3; ++c) CHECK(rel_err(out.get(c, k), want[c]) < 1e-12);
  }
  simd::Batch3 prod;
  simd::matvec(m, rhs, prod);
  simd::matvec(m, rhs, prod, true);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 want = 2.0 * (m * rhs.lane(k));
    for (int c = 0; c < 3; ++c) CHECK(rel_err(prod.get(c, k), want[c]) < 1e-13);
  }
}

TEST_CASE("AVX2 kernels match the scalar reference") {
  if (!simd::backend_available(simd::Backend::Avx2)) {
    MESSAGE("AVX2 backend not available on this machine/build; skipping");
    return;
  }
  BackendGuard guard;
  std::mt19937_64 rng(13);
  for (std::size_t n : {1u, 3u, 4u, 5u, 8u, 21u, 42u, 1001u}) {
    const Mat3 m = relaxing_mat(rng);
    const simd::ShiftedResolvent r(m);
    std::vector<double> omega(n);
    std::uniform_real_distribution<double> w(-50.0, 50.0);
    for (auto& x : omega) x = w(rng);
    const simd::Batch3 rhs = random_batch(rng, n);
    const Vec3 fixed{cplx(0.2, 1.0), cplx(-1.0, 0.1), cplx(0.0, 2.0)};

    simd::Batch3 s_var, s_fix, s_mv, a_var, a_fix, a_mv;
    simd::set_backend(simd::Backend::Scalar);
    simd::resolve(r, omega, rhs, s_var);
    simd::resolve(r, omega, fixed, s_fix);
    simd::matvec(m, rhs, s_mv);
    simd::matvec(m, s_var, s_mv, true);
    simd::set_backend(simd::Backend::Avx2);
    simd::resolve(r, omega, rhs, a_var);
    simd::resolve(r, omega, fixed, a_fix);
    simd::matvec(m, rhs, a_mv);
    simd::matvec(m, a_var, a_mv, true);

    CHECK(batch_rel_diff(s_var, a_var) < 1e-13);
    CHECK(batch_rel_diff(s_fix, a_fix) < 1e-13);
    CHECK(batch_rel_diff(s_mv, a_mv) < 1e-13);
  }
}

TEST_CASE("backend selection") {
  BackendGuard guard;
  CHECK(simd::backend_available(simd::Backend::Scalar));
  CHECK(simd::backend_available(simd::best_backend()));
  simd::set_backend(simd::Backend::Scalar);
  CHECK(simd::active_backend() == simd::Backend::Scalar);
  CHECK(simd::to_string(simd::Backend::Avx2) == "avx2");
  if (!simd::backend_available(simd::Backend::Avx2))
    CHECK_THROWS_AS(simd::set_backend(simd::Backend::Avx2), std::invalid_argument);
}

TEST_CASE("batch argument checks") {
  const simd::ShiftedResolvent r(identity3());
  simd::Batch3 rhs(3), out;
  std::vector<double> omega(4, 0.0);
  CHECK_THROWS_AS(simd::resolve(r, omega, rhs, out), std::invalid_argument);
  CHECK_THROWS_AS(simd::matvec(identity3(), rhs, rhs), std::invalid_argument);
  simd::Batch3 small(2);
  CHECK_THROWS_AS(simd::matvec(identity3(), rhs, small, true), std::invalid_argument);
}
