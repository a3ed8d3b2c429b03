#include <doctest.h>

#include <map>
#include <set>

#include "momlab/arith.hpp"

using namespace momlab;

TEST_CASE("euler phi and factorization") {
  CHECK(euler_phi(1) == 1);
  CHECK(euler_phi(12) == 4);
  CHECK(euler_phi(101) == 100);
  CHECK(euler_phi(1000) == 400);
  auto f = factorize(360);
  REQUIRE(f.size() == 3);
  CHECK(f[0].first == 2);
  CHECK(f[0].second == 3);
}

TEST_CASE("von Mangoldt table against trial division") {
  LambdaTable tab = sieve_lambda(2000);
  std::map<uint64_t, double> got;
  for (size_t i = 0; i < tab.size(); ++i) got[tab.n[i]] = tab.lambda[i];
  for (uint64_t n = 2; n <= 2000; ++n) {
    uint64_t p = 2;
    while (n % p) ++p;
    uint64_t m = n;
    while (m % p == 0) m /= p;
    double expect = m == 1 ? std::log(double(p)) : 0.0;
    CHECK(got[n] == doctest::Approx(expect).epsilon(1e-15));
  }
}

TEST_CASE("conductors mod 12") {
  CharacterGroup g(12);
  std::multiset<int> c;
  for (const auto& ch : g.characters()) c.insert(ch.conductor);
  CHECK(c == std::multiset<int>{1, 3, 4, 12});
}

TEST_CASE("character tables are orthogonal") {
  for (int q = 1; q <= 30; ++q) CHECK(verify_orthogonality(CharacterGroup(q)));
}

TEST_CASE("Conrey labels mod 5") {
  CharacterGroup g(5);
  // chi_5(2, .) has order 4 and chi_5(4, .) is the real character.
  CHECK(g.at(g.position(2)).order == 4);
  CHECK(g.at(g.position(4)).order == 2);
  CHECK(g.at(g.position(4)).parity == 0);
  CHECK(g.conj(g.position(2)) == g.position(3));
  CHECK(std::abs(g.value(g.position(4), 2) + 1.0) < 1e-15);
}

TEST_CASE("closed character sum matches brute force") {
  std::vector<PrimePower> pps = {{2, 1}, {2, 3}, {3, 1}, {3, 2}, {5, 1}, {7, 1}, {11, 1}};
  for (int q : {8, 9, 12, 15, 20, 36}) {
    CharacterGroup g(q);
    for (int c = 0; c < g.phi(); ++c)
      for (auto a : pps)
        for (auto b : pps)
          CHECK(std::abs(sq_closed(g, c, a, b) - sq_brute(g, c, a.value(), b.value())) < 1e-9);
  }
  CHECK_THROWS_AS(sq_closed(CharacterGroup(5), 0, {4, 1}, {3, 1}), ValidationError);
}

TEST_CASE("mean log conductor") {
  for (int q : {3, 12, 60, 128, 199}) CHECK(std::abs(conductor_moments(q).mean_residual) < 1e-12);
}
