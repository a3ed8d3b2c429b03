#include <doctest.h>

#include "momlab/combinatorics.hpp"

using namespace momlab;

TEST_CASE("Gaussian moments") {
  CHECK(mu(2) == 1);
  CHECK(mu(4) == 3);
  CHECK(mu(6) == 15);
  CHECK(mu(3) == 0);
}

TEST_CASE("nu constants") {
  CHECK(nu(2) == 2);
  CHECK(nu(3) == 6);
  CHECK(nu(4) == 96);
  CHECK(nu_prime(2) == 0);
  CHECK(nu_dprime(2) == Rational(8, 3));
}

TEST_CASE("enumerated F classes against the closed forms") {
  CHECK(enumerate_class(2, 2, InvolutionClass::F).count == 2);
  CHECK(enumerate_class(3, 2, InvolutionClass::F).count == 8);
  for (auto [s, n] : std::vector<std::pair<int, int>>{{2, 2}, {2, 3}, {2, 4}, {4, 2}, {4, 3}, {3, 2}, {3, 4}})
    CHECK(BigInt(enumerate_classes(s, n).F) == f_formula(s, n));
}

TEST_CASE("serial and parallel enumeration agree") {
  EnumerationOptions a, b;
  a.exec = Exec::serial;
  b.exec = Exec::parallel;
  ClassCounts x = enumerate_classes(4, 3, a), y = enumerate_classes(4, 3, b);
  CHECK(x.F == y.F);
  CHECK(x.G == y.G);
  CHECK(x.I == y.I);
  CHECK(x.scanned == double_factorial_odd(12));
}

TEST_CASE("enumeration budget") {
  EnumerationOptions o;
  o.budget = 100;
  CHECK_THROWS_AS(enumerate_classes(4, 4, o), BudgetError);
  CHECK_THROWS_AS(f_formula(3, 3), ValidationError);
}

TEST_CASE("odd s closed form and the F/G partition") {
  ClassCounts c = enumerate_classes(5, 2);
  CHECK(c.F == 160);
  CHECK(BigInt(c.F) == f_formula(5, 2));
  for (auto [s, n] : std::vector<std::pair<int, int>>{{3, 2}, {3, 4}, {5, 2}, {7, 2}, {4, 3}}) {
    ClassCounts k = enumerate_classes(s, n);
    CHECK(k.overlap_FG == 0);
    CHECK(k.F + k.G == k.I);
  }
}

TEST_CASE("counts do not depend on the row labelling") {
  EnumerationOptions o;
  o.row_perm = {2, 0, 4, 1, 3};
  ClassCounts a = enumerate_classes(5, 2), b = enumerate_classes(5, 2, o);
  CHECK(a.F == b.F);
  CHECK(a.G == b.G);
  CHECK(a.I == b.I);
  o.row_perm = {0, 0, 1, 2, 3};
  CHECK_THROWS_AS(enumerate_classes(5, 2, o), ValidationError);
}
