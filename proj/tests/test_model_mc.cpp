#include <doctest.h>

#include "momlab/model_mc.hpp"

using namespace momlab;

TEST_CASE("Philox known answers") {
  auto z = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  CHECK(z == Philox4x32::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  auto o = Philox4x32::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                             {0xffffffff, 0xffffffff});
  CHECK(o == Philox4x32::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
}

TEST_CASE("streams are reproducible and distinct") {
  PhiloxStream a(9, 3), b(9, 3), c(9, 4);
  for (int i = 0; i < 10; ++i) {
    double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x != c.uniform());
    CHECK(x >= 0);
    CHECK(x < 1);
  }
}

namespace {

struct Fixture {
  CharacterGroup g{5};
  Weight w = make_weight("expK:1");
  ZeroStore store;
  ZeroFamily* fam = nullptr;
  Fixture() {
    ensure_all_zeros(store, g, 100.0, default_cache_root());
    fam = new ZeroFamily(g, w, store, 100.0);
  }
  ~Fixture() { delete fam; }
};

}  // namespace

TEST_CASE("H through residues equals the tuple sum") {
  Fixture f;
  for (double X : {0.0, 1.7, 250.0}) {
    auto W = model_w_time(*f.fam, X);
    for (int n = 2; n <= 4; ++n) {
      cplx a = h_orthogonal(f.g, W, n), b = h_direct(f.g, W, n);
      CHECK(std::abs(a - b) < 1e-14);
      CHECK(std::abs(a.imag()) < 1e-14);
    }
  }
}

TEST_CASE("sampling is deterministic across execution modes") {
  Fixture f;
  auto s = sample_H(*f.fam, 2, ModelMode::li, 11, 200, 1e4, 1e10, Exec::serial);
  auto p = sample_H(*f.fam, 2, ModelMode::li, 11, 200, 1e4, 1e10, Exec::parallel);
  CHECK(s.values == p.values);
  for (double v : s.values) CHECK(v >= 0);
  CHECK(sample_H(*f.fam, 2, ModelMode::li, 12, 200).values != s.values);
}

TEST_CASE("LI sample mean approaches the exact mean") {
  Fixture f;
  auto b = sample_H(*f.fam, 2, ModelMode::li, 1, 20000);
  MomentsRecord r = estimate_moments(b.values, {2}, 50, 1);
  SumWithBound exact = model_mean_exact(*f.fam, f.w);
  CHECK(std::abs(r.mean - exact.value) < 5 * r.mean_se + exact.bound);
}

TEST_CASE("moments of a constant batch vanish") {
  MomentsRecord r = estimate_moments(std::vector<double>(100, 2.5), {1, 2, 3}, 20, 0);
  CHECK(r.mean == 2.5);
  for (const auto& m : r.moments) CHECK(m.value == 0);
}

TEST_CASE("mode names") {
  CHECK(parse_model_mode("time") == ModelMode::time);
  CHECK(to_string(ModelMode::li) == "li");
  CHECK_THROWS_AS(parse_model_mode("gue"), ValidationError);
}
