#include <doctest.h>

#include "momlab/explicit_formula.hpp"

using namespace momlab;

TEST_CASE("log derivative at 3/2") {
  CharacterGroup g(3);
  cplx v = log_derivative(LFunction(g, g.position(2)), 1.5);
  CHECK(std::abs(v.real() - -0.249505336683898139811) < 1e-8);
  CHECK(std::abs(v.imag()) < 1e-10);
}

TEST_CASE("expK:1 at x = 1 is the zeta log derivative at 3/2") {
  LambdaTable tab = sieve_lambda(10'000'000);
  PsiValue v = psi_eta_ap(1.0, 1, 1, make_weight("expK:1"), tab);
  double err = std::abs(v.value.real() - 1.50523535578826791942);
  CHECK(err <= v.bound);
  CHECK(v.bound < 2e-3);
}

TEST_CASE("progression sums match direct evaluation") {
  Weight w = make_weight("selfconv:sech");
  std::vector<double> ts = {2.0, 4.5, 7.0};
  ProgressionSums::Options o;
  o.X = 2'000'000;
  o.exec = Exec::serial;
  ProgressionSums serial(12, w, ts, o);
  o.exec = Exec::parallel;
  ProgressionSums par(12, w, ts, o);
  LambdaTable tab = sieve_lambda(o.X);
  for (size_t k = 0; k < ts.size(); ++k)
    for (int a : {1, 5, 7, 11}) {
      PsiValue d = psi_eta_ap(std::exp(ts[k]), 12, a, w, tab);
      CHECK(serial.psi_ap(12, a, k).value.real() ==
            doctest::Approx(d.value.real()).epsilon(1e-12));
      CHECK(par.psi_ap(12, a, k).value.real() ==
            doctest::Approx(serial.psi_ap(12, a, k).value.real()).epsilon(1e-13));
    }
}

TEST_CASE("prime side equals zero side") {
  CharacterGroup g(5);
  Weight w = make_weight("expK:1");
  ZeroStore store;
  ensure_all_zeros(store, g, 200.0, default_cache_root());
  LambdaTable tab = sieve_lambda(20'000'000);
  for (int c : {2, 4}) {
    int pos = g.position(c);
    for (double t : {1.0, 3.0}) {
      PsiValue p = psi_eta_char(std::exp(t), g, pos, w, tab, true);
      PsiValue z = psi_eta_zero_side(std::exp(t), g, pos, w, store, 200.0);
      CHECK(std::abs(p.value - z.value) <= p.bound + z.bound);
      CHECK(p.bound + z.bound < 0.05);
    }
  }
}
