#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "momlab/zeros.hpp"

using namespace momlab;

// Reference values computed independently with mpmath at 30 digits.

TEST_CASE("L(2) for the character mod 3") {
  CharacterGroup g(3);
  LFunction L(g, g.position(2));
  cplx v = L.L(2.0);
  CHECK(std::abs(v.real() - 0.781302412896486296867) < 1e-12);
  CHECK(std::abs(v.imag()) < 1e-12);
}

TEST_CASE("rotated L is real on the critical line") {
  CharacterGroup g(5);
  LFunction L(g, g.position(2));
  for (double t : {1.0, 7.5, 33.3}) {
    cplx r = L.rotated(t);
    CHECK(std::abs(r.imag()) < 1e-9 * (1 + std::abs(r.real())));
  }
}

TEST_CASE("first zeros") {
  auto z3 = compute_zeros(3, 2, 10.0);
  REQUIRE_FALSE(z3.empty());
  CHECK(std::abs(z3[0] - 8.03973715568146668171) < 1e-8);
  auto z4 = compute_zeros(4, 3, 10.0);
  REQUIRE_FALSE(z4.empty());
  CHECK(std::abs(z4[0] - 6.02094890469759665490) < 1e-8);
}

TEST_CASE("complex pair passes the count check") {
  ZeroPair p = compute_zero_pair(5, 2, 60.0);
  CHECK(p.check.pass);
  CHECK(p.chi.conrey == 2);
  CHECK(p.conj.conrey == 3);
  CHECK(p.chi.gamma != p.conj.gamma);
}

namespace {

// Heights are written with 15 significant digits.
bool same_heights(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > 1e-14 * a[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("TSV round trip") {
  ZeroList l{7, 3, compute_zeros(7, 3, 30.0), "computed", 30.0};
  std::istringstream in(zeros_tsv({&l}));
  ZeroStore s = parse_zeros(in, "mem");
  const ZeroList* back = s.find(7, 3);
  REQUIRE(back);
  CHECK(same_heights(back->gamma, l.gamma));
}

TEST_CASE("store rejects unsorted heights") {
  ZeroStore s;
  CHECK_THROWS_AS(s.insert(ZeroList{5, 2, {3.0, 2.0}, "ingested", 0}), ValidationError);
  CHECK_THROWS_AS(s.insert(ZeroList{5, 2, {-1.0}, "ingested", 0}), ValidationError);
}

TEST_CASE("cache detects tampering") {
  auto root = (std::filesystem::temp_directory_path() / "momlab-test-cache").string();
  std::filesystem::remove_all(root);
  ZeroList l{4, 3, {6.020948904697597, 10.24377030416374}, "computed", 11.0};
  cache_store(root, l);
  ZeroList back;
  REQUIRE(cache_load(root, 4, 3, back));
  CHECK(same_heights(back.gamma, l.gamma));
  CHECK(back.T_cert == 11.0);
  {
    std::ofstream o(cache_path(root, 4, 3), std::ios::app);
    o << "4\t3\t12.5\n";
  }
  CHECK_FALSE(cache_load(root, 4, 3, back));
  std::filesystem::remove_all(root);
}
