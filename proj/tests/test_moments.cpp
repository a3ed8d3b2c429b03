#include <doctest.h>

#include <random>

#include "momlab/moments.hpp"

using namespace momlab;

TEST_CASE("residue side equals character side") {
  LambdaTable tab = sieve_lambda(1'000'000);
  Weight w = make_weight("expK:1");
  for (int q : {5, 7, 12}) {
    double x = std::exp(6.0);
    double m2 = moment_residue_side(x, q, 2, w, tab).value;
    for (int n = 1; n <= 4; ++n) {
      MomentValue a = moment_residue_side(x, q, n, w, tab);
      MomentValue b = moment_character_side(x, q, n, w, tab);
      double scale = std::max(std::abs(a.value), std::pow(m2, n / 2.0));
      CHECK(std::abs(a.value - b.value) <= 1e-12 * scale);
      CHECK(std::abs(b.imag) <= 1e-12 * scale);
    }
    CHECK(std::abs(moment_residue_side(x, q, 1, w, tab).value) < 1e-12);
  }
}

TEST_CASE("tuple enumeration") {
  CharacterGroup g(7);
  CHECK(tuple_count(g, 2) == 5);
  uint64_t seen = 0;
  for_each_tuple(g, 3, [&](const std::vector<int>& t) {
    int p = t[0];
    for (size_t i = 1; i < t.size(); ++i) p = g.product(p, t[i]);
    CHECK(p == g.principal());
    ++seen;
  });
  CHECK(seen == tuple_count(g, 3));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<double> u(g.phi());
  for (double& v : u) v = U(rng);
  double brute = 0;
  for_each_tuple(g, 4, [&](const std::vector<int>& t) {
    double p = 1;
    for (int c : t) p *= u[c];
    brute += p;
  });
  CHECK(tuple_product_sum(g, 4, u) == doctest::Approx(brute).epsilon(1e-13));
}

TEST_CASE("exact delta") {
  CHECK(delta_exact(std::vector<long long>{3}) == 0);
  CHECK(delta_exact(std::vector<long long>{2, -2}) == 1);
  CHECK(delta_exact(std::vector<long long>{2, 0}) == 0);
  CHECK(delta_exact(std::vector<long long>{1, 1, -2}) == 1);
  CHECK(delta_exact(std::vector<long long>{1, -1, 2, -2}) == 1);
  CHECK(delta_exact(std::vector<long long>{1, -1, 2, 0}) == 0);
  CHECK(delta_exact(std::vector<long long>{1, 1, 1, -3}) == 1);

  SymKey a = {{1, 1}}, b = {{2, 1}};
  SymKey ab = sym_add(a, b);
  CHECK(delta_exact(std::vector<SymKey>{ab, sym_neg(a), sym_neg(b)}) == 1);
  CHECK(delta_exact(std::vector<SymKey>{ab, sym_neg(a), a}) == 0);
  CHECK(delta_exact(std::vector<SymKey>{ab, sym_neg(ab)}) == 1);
  CHECK(sym_add(ab, sym_neg(ab)).empty());
}

TEST_CASE("triangle kernel at integer T reproduces the exact delta") {
  Kernel K = make_kernel("triangle");
  for (auto sg : std::vector<std::vector<long long>>{{1, -1}, {2, 1}, {1, 1, -2}, {3, -1, -2}})
    CHECK(delta_smoothed(sg, K, 1.0) == doctest::Approx(delta_exact(sg)).epsilon(1e-12));
}

TEST_CASE("spectral mean") {
  Weight w = make_weight("selfconv:sech");
  for (int q : {3, 5, 8}) {
    CharacterGroup g(q);
    double Tz = auto_zero_height(w, q, 1e-10);
    ZeroStore store;
    ensure_all_zeros(store, g, Tz, default_cache_root());
    ZeroFamily fam(g, w, store, Tz);
    SpectralMean m2 = spectral_mean(fam, 2), m3 = spectral_mean(fam, 3);
    CHECK(m3.value == 0);
    // For n = 2 the diagonal is everything: phi^-2 sum_chi b(chi).
    CHECK(m2.value == doctest::Approx(diagonal_lower_bound(fam, 2)).epsilon(1e-12));
    SpectralWeight h = spectral(w);
    double b = 0;
    for (int c = 0; c < g.phi(); ++c)
      if (c != g.principal()) b += b_chi(store, g, c, h, Tz).value;
    CHECK(m2.value == doctest::Approx(b / (g.phi() * double(g.phi()))).epsilon(1e-12));
    CHECK(spectral_mean(fam, 4).value >= diagonal_lower_bound(fam, 4) - 1e-15);
  }
}

TEST_CASE("main terms") {
  MainTerms m = main_terms(3, 2, 2, make_weight("expK:1"));
  CHECK(m.V_n == doctest::Approx(2 * std::pow(std::log(3.0), 2) / 8).epsilon(1e-12));
  CHECK(m.alpha == doctest::Approx(1.0));
  CHECK(std::abs(m.beta - -3.28549543730950311812) < 1e-9);
}

TEST_CASE("power mean bound") {
  std::vector<double> d = {0.3, -0.1, -0.2};
  double eps = 1e-3;
  std::vector<double> e = {0.3 + eps, -0.1 - eps, -0.2 + eps};
  for (int n = 1; n <= 5; ++n)
    CHECK(std::abs(power_mean(e, n) - power_mean(d, n)) <= power_mean_bound(d, n, eps));
}
