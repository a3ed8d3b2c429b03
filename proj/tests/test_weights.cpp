#include <doctest.h>

#include "momlab/weights.hpp"

using namespace momlab;

TEST_CASE("eta_hat is the Fourier transform of eta") {
  for (auto spec : {"expK:1", "expK:2", "selfconv:gauss", "selfconv:sech"}) {
    Weight w = make_weight(spec);
    for (double xi : {0.0, 0.3, 1.1}) {
      Integral r = integrate([&](double t) { return 2 * w.eta(t) * std::cos(kTwoPi * xi * t); }, 0, 60, 1e-12);
      CHECK(r.value == doctest::Approx(w.eta_hat(xi)).epsilon(1e-9));
    }
  }
}

TEST_CASE("beta_q against independent quadrature") {
  // Values from an mpmath evaluation of the same integral at 30 digits.
  struct Row {
    const char* spec;
    double beta;
  };
  for (Row r : {Row{"expK:1", -3.28549543730950311811650392421},
                Row{"expK:2", -1.3323710411493134359890969343},
                Row{"selfconv:gauss", -1.3854860719849773755911586893},
                Row{"selfconv:sech", -1.23201405266733107991694929064}}) {
    BetaValue b = beta_q(spectral(make_weight(r.spec)), 3, 1e-11);
    CHECK(std::abs(b.value - r.beta) < 1e-9);
  }
}

TEST_CASE("alpha is the L2 norm squared") {
  CHECK(spectral(make_weight("expK:1")).alpha() == doctest::Approx(1.0));
  CHECK(spectral(make_weight("expK:2")).alpha() == doctest::Approx(0.5));
  for (auto spec : {"selfconv:gauss", "selfconv:sech"}) {
    Weight w = make_weight(spec);
    Integral r = integrate([&](double t) { return 2 * w.eta(t) * w.eta(t); }, 0, 60, 1e-13);
    CHECK(spectral(w).alpha() == doctest::Approx(r.value).epsilon(1e-9));
  }
}

TEST_CASE("weight grammar") {
  CHECK_THROWS_AS(make_weight("expK:0.5"), ValidationError);
  CHECK_THROWS_AS(make_weight("bump"), ValidationError);
  CHECK_FALSE(make_weight("classical").even);
}

TEST_CASE("kernel transforms") {
  Kernel t = make_kernel("triangle"), i = make_kernel("indicator");
  CHECK(t.phi_hat(0) == doctest::Approx(2 * t.half_integral()));
  CHECK(i.phi_hat(0) == doctest::Approx(2 * i.half_integral()));
  CHECK(t.phi_hat(1.0) == doctest::Approx(0).epsilon(1e-15));
  for (double xi : {0.2, 0.7, 3.3, 40.0}) {
    CHECK(std::abs(t.phi_hat(xi)) <= t.hat_envelope(xi) + 1e-15);
    CHECK(std::abs(i.phi_hat(xi)) <= i.hat_envelope(xi) + 1e-15);
  }
}
