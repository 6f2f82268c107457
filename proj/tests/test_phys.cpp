#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "cbs/phys.hpp"
#include "support/common.hpp"

using namespace cbs;
using cbs::testing::params;

namespace {

std::string error_of(const AtomFieldParams& p) {
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("saturation closed values") {
  CHECK(saturation(params(0.0, 3.0)) == 0.0);
  CHECK(saturation(params(1.0, 0.0)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(saturation(params(0.1, -5.0)) == doctest::Approx(0.005 / 25.25).epsilon(1e-15));
  CHECK(saturation(params(0.1, -5.0)) == doctest::Approx(0.000198020).epsilon(1e-6));
}

TEST_CASE("saturation grows with drive and falls with detuning") {
  double last = -1.0;
  for (double om : {0.0, 0.1, 0.5, 1.0, 3.0, 10.0}) {
    const double s = saturation(params(om, 1.5));
    CHECK(s > last);
    last = s;
  }
  last = std::numeric_limits<double>::infinity();
  for (double de : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    const double s = saturation(params(2.0, -de));
    CHECK(s < last);
    CHECK(s == doctest::Approx(saturation(params(2.0, de))));
    last = s;
  }
}

TEST_CASE("generalized Rabi frequency") {
  CHECK(generalized_rabi(params(10.0, -5.0)) == doctest::Approx(std::sqrt(125.0)));
  CHECK(generalized_rabi(params(0.0, 0.0)) == 0.0);
}

TEST_CASE("parameter validation names the field") {
  CHECK(error_of(params(0.1, -5.0)).empty());
  CHECK(error_of(params(-1.0, 0.0)).find("'rabi'") != std::string::npos);
  CHECK(error_of(params(1.0, 0.0, 0.0)).find("'gamma'") != std::string::npos);
  CHECK(error_of(params(1.0, 0.0, -2.0)).find("'gamma'") != std::string::npos);
  CHECK(error_of(params(1.0, std::nan(""))).find("'detuning'") != std::string::npos);
  AtomFieldParams p = params(1.0, 0.0);
  p.coupling_mod2 = -0.5;
  CHECK(error_of(p).find("'coupling_mod2'") != std::string::npos);
}

TEST_CASE("merge_lines sums coincident lines") {
  const auto out = merge_lines({{0.0, 1.0}, {0.0, 2.0}});
  REQUIRE(out.size() == 1);
  CHECK(out[0].position == 0.0);
  CHECK(out[0].weight == cplx(3.0, 0.0));
}

TEST_CASE("merge_lines drops cancelled lines") {
  CHECK(merge_lines({{0.0, 1.0}, {1e-12, -1.0}}).empty());
}

TEST_CASE("merge_lines keeps distinct lines") {
  const auto out = merge_lines({{5.0, 2.0}, {0.0, 1.0}});
  REQUIRE(out.size() == 2);
  CHECK(out[0].position == 0.0);
  CHECK(out[0].weight == cplx(1.0));
  CHECK(out[1].position == 5.0);
  CHECK(out[1].weight == cplx(2.0));
}

TEST_CASE("merge_lines keeps the smooth part") {
  const SpectralDistribution d(SpectrumLabel::P0, {{0.0, 1.0}, {0.0, 0.5}},
                               [](double w) { return cplx(w * w, 0.0); });
  const SpectralDistribution m = merge_lines(d);
  CHECK(m.label() == SpectrumLabel::P0);
  REQUIRE(m.lines().size() == 1);
  CHECK(m.line_weight() == cplx(1.5));
  CHECK(m.smooth(3.0) == cplx(9.0));
}

TEST_CASE("line positions closer than the tolerance scale with gamma") {
  CHECK(merge_lines({{0.0, 1.0}, {5e-9, 1.0}}, 1.0).size() == 2);
  CHECK(merge_lines({{0.0, 1.0}, {5e-9, 1.0}}, 10.0).size() == 1);
}

TEST_CASE("labels print") {
  CHECK(to_string(SpectrumLabel::Ladder) == "Ladder");
  CHECK(to_string(SpectrumLabel::Oracle) == "Oracle");
}
