#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cobay/basis.hpp"

using cobay::BasisSet;
using cobay::BetaBasis;
using cobay::basis_eval;

namespace {
constexpr double kSupport = 6.0;
const BetaBasis kCentered{50.0, 50.0, 6.0, 0.0};
}  // namespace

TEST_CASE("beta basis matches log-gamma reference values") {
  // Beta(50, 50) pdf at 0.5 divided by the scale, independently computed
  // with 40-digit arithmetic.
  CHECK(basis_eval(kCentered, 3.0, kSupport) ==
        Catch::Approx(1.3264872897863127).epsilon(1e-13));
  CHECK(basis_eval(kCentered, 2.5, kSupport) ==
        Catch::Approx(0.33359130980395296).epsilon(1e-13));

  // Low-order case with a closed form: Beta(2,2) pdf 6u(1-u) at u=1/4, /2.
  CHECK(basis_eval(BetaBasis{2.0, 2.0, 2.0, 0.0}, 0.5, 2.0) ==
        Catch::Approx(0.5625).epsilon(1e-14));
}

TEST_CASE("beta basis is zero outside its support") {
  CHECK(basis_eval(kCentered, 7.0, kSupport) == 0.0);     // beyond T_phi
  CHECK(basis_eval(kCentered, 6.0, kSupport) == 0.0);     // u = 1 boundary
  CHECK(basis_eval(kCentered, 0.0, kSupport) == 0.0);     // u = 0 boundary
  CHECK(basis_eval(kCentered, -1.0, kSupport) == 0.0);    // negative lag

  const BetaBasis shifted{50.0, 50.0, 6.0, -2.0};
  CHECK(basis_eval(shifted, -0.5, kSupport) == 0.0);      // negative lag wins
  CHECK(basis_eval(shifted, 4.0, kSupport) == 0.0);       // u = 1
  CHECK(basis_eval(shifted, 1.0, kSupport) ==
        Catch::Approx(1.3264872897863127).epsilon(1e-13));  // peak moved to lag 1
  CHECK(basis_eval(shifted, 0.0, kSupport) > 0.0);        // lag 0 inside (0,1) in u

  // A basis overhanging the truncation bound loses the overhang: shift +1
  // puts u < 1 mass out to lag 7, but lags beyond T_phi = 6 are zeroed.
  const BetaBasis overhang{50.0, 50.0, 6.0, 1.0};
  CHECK(basis_eval(overhang, 6.5, kSupport) == 0.0);
  CHECK(basis_eval(overhang, 4.0, kSupport) ==
        Catch::Approx(1.3264872897863127).epsilon(1e-13));
}

TEST_CASE("symmetric beta is symmetric about its peak") {
  for (double d : {0.3, 0.9, 1.7, 2.4}) {
    CHECK(basis_eval(kCentered, 3.0 - d, kSupport) ==
          Catch::Approx(basis_eval(kCentered, 3.0 + d, kSupport)).epsilon(1e-12));
  }
}

TEST_CASE("basis values are finite and non-negative across the support") {
  for (double x = -1.0; x <= 7.0; x += 0.01) {
    const double v = basis_eval(kCentered, x, kSupport);
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
}

TEST_CASE("basis set agrees with single evaluation and validates input") {
  const BasisSet set({BetaBasis{50.0, 50.0, 6.0, -2.0}, kCentered}, kSupport);
  REQUIRE(set.size() == 2);
  CHECK(set.support_bound() == kSupport);
  for (double x : {0.5, 1.0, 2.5, 3.0, 5.9}) {
    CHECK(set.eval(0, x) == basis_eval(set.basis(0), x, kSupport));
    CHECK(set.eval(1, x) == basis_eval(set.basis(1), x, kSupport));
  }

  CHECK_NOTHROW(BasisSet({}, 1.0));  // background-rate-only model
  CHECK(BasisSet({}, 1.0).size() == 0);
  CHECK_THROWS_AS(BasisSet({kCentered}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(BasisSet({BetaBasis{0.0, 50.0, 6.0, 0.0}}, 6.0), std::invalid_argument);
  CHECK_THROWS_AS(BasisSet({BetaBasis{50.0, -1.0, 6.0, 0.0}}, 6.0), std::invalid_argument);
  CHECK_THROWS_AS(BasisSet({BetaBasis{50.0, 50.0, 0.0, 0.0}}, 6.0), std::invalid_argument);
}
