#include "momlab/arith.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <string>

namespace momlab {

Factorization factorize(int64_t n) {
  Factorization f;
  for (int64_t p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    int e = 0;
    while (n % p == 0) n /= p, ++e;
    f.push_back({p, e});
  }
  if (n > 1) f.push_back({n, 1});
  return f;
}

int64_t euler_phi(int64_t n) {
  int64_t r = n;
  for (auto [p, e] : factorize(n)) r = r / p * (p - 1);
  return r;
}

int64_t ipow(int64_t b, int e) {
  int64_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

int64_t powmod(int64_t b, int64_t e, int64_t m) {
  __int128 r = 1 % m, x = ((b % m) + m) % m;
  while (e > 0) {
    if (e & 1) r = r * x % m;
    x = x * x % m;
    e >>= 1;
  }
  return static_cast<int64_t>(r);
}

bool is_prime(int64_t n) {
  if (n < 2) return false;
  for (int64_t p = 2; p * p <= n; ++p)
    if (n % p == 0) return false;
  return true;
}

std::vector<int64_t> divisors(int64_t n) {
  std::vector<int64_t> d;
  for (int64_t i = 1; i * i <= n; ++i)
    if (n % i == 0) {
      d.push_back(i);
      if (i * i != n) d.push_back(n / i);
    }
  std::sort(d.begin(), d.end());
  return d;
}

double LambdaTable::operator()(uint64_t m) const {
  auto it = std::lower_bound(n.begin(), n.end(), m);
  if (it == n.end() || *it != m) return 0.0;
  return lambda[it - n.begin()];
}

int max_threads(Exec exec) { return exec == Exec::parallel ? omp_get_max_threads() : 1; }

namespace {

std::vector<uint64_t> small_primes(uint64_t limit) {
  std::vector<char> comp(limit + 1, 0);
  std::vector<uint64_t> ps;
  for (uint64_t i = 2; i <= limit; ++i) {
    if (comp[i]) continue;
    ps.push_back(i);
    for (uint64_t j = i * i; j <= limit; j += i) comp[j] = 1;
  }
  return ps;
}

constexpr uint64_t kSegment = uint64_t(1) << 19;  // odd numbers per segment

void sieve_segment(uint64_t seg, uint64_t limit, const std::vector<uint64_t>& base,
                   std::vector<char>& mark, std::vector<uint64_t>& out) {
  // Segment covers odd numbers 2*i+1 for i in [seg*kSegment, (seg+1)*kSegment).
  uint64_t i0 = seg * kSegment;
  uint64_t lo = 2 * i0 + 1;
  uint64_t hi = std::min(limit, 2 * (i0 + kSegment) - 1);
  out.clear();
  if (lo > hi) return;
  uint64_t count = (hi - lo) / 2 + 1;
  mark.assign(count, 1);
  for (size_t k = 1; k < base.size(); ++k) {
    uint64_t p = base[k];
    if (p * p > hi) break;
    uint64_t start = std::max(p * p, (lo + p - 1) / p * p);
    if (start % 2 == 0) start += p;
    for (uint64_t j = (start - lo) / 2; j < count; j += p) mark[j] = 0;
  }
  if (seg == 0) {
    mark[0] = 0;  // 1 is not prime
    out.push_back(2);
  }
  for (uint64_t j = 0; j < count; ++j)
    if (mark[j]) out.push_back(lo + 2 * j);
}

}  // namespace

void sieve_primes(uint64_t limit, const SegmentFn& fn, Exec exec) {
  if (limit < 2) return;
  uint64_t r = static_cast<uint64_t>(std::sqrt(static_cast<double>(limit))) + 2;
  std::vector<uint64_t> base = small_primes(r);
  uint64_t nseg = (limit / 2) / kSegment + 1;
  if (exec == Exec::serial) {
    std::vector<char> mark;
    std::vector<uint64_t> out;
    for (uint64_t s = 0; s < nseg; ++s) {
      sieve_segment(s, limit, base, mark, out);
      if (!out.empty()) fn(out, 0);
    }
    return;
  }
#pragma omp parallel
  {
    std::vector<char> mark;
    std::vector<uint64_t> out;
    int tid = omp_get_thread_num();
#pragma omp for schedule(dynamic, 1)
    for (long long s = 0; s < static_cast<long long>(nseg); ++s) {
      sieve_segment(static_cast<uint64_t>(s), limit, base, mark, out);
      if (!out.empty()) fn(out, tid);
    }
  }
}

std::vector<std::pair<uint64_t, uint64_t>> higher_prime_powers(uint64_t limit) {
  std::vector<std::pair<uint64_t, uint64_t>> out;
  uint64_t r = static_cast<uint64_t>(std::sqrt(static_cast<double>(limit))) + 1;
  for (uint64_t p : small_primes(r)) {
    unsigned __int128 pk = static_cast<unsigned __int128>(p) * p;
    while (pk <= limit) {
      out.push_back({static_cast<uint64_t>(pk), p});
      pk *= p;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void for_each_prime_power(uint64_t limit, const PrimePowerFn& fn, Exec exec) {
  auto hp = higher_prime_powers(limit);
  if (exec == Exec::serial) {
    size_t j = 0;
    sieve_primes(limit, [&](const std::vector<uint64_t>& seg, int tid) {
      for (uint64_t p : seg) {
        for (; j < hp.size() && hp[j].first < p; ++j)
          fn(hp[j].first, std::log(static_cast<double>(hp[j].second)), tid);
        fn(p, std::log(static_cast<double>(p)), tid);
      }
    });
    for (; j < hp.size(); ++j) fn(hp[j].first, std::log(static_cast<double>(hp[j].second)), 0);
    return;
  }
  sieve_primes(limit, [&](const std::vector<uint64_t>& seg, int tid) {
    for (uint64_t p : seg) fn(p, std::log(static_cast<double>(p)), tid);
  }, exec);
  for (auto [n, p] : hp) fn(n, std::log(static_cast<double>(p)), 0);
}

LambdaTable sieve_lambda(uint64_t N, uint64_t memory_bytes) {
  if (N < 2) throw ValidationError("sieve_lambda: N must be >= 2");
  double est = 1.3 * N / std::max(1.0, std::log(static_cast<double>(N)) - 1.1) + 64;
  if (est * 16 > static_cast<double>(memory_bytes))
    throw BudgetError("sieve_lambda: N=" + std::to_string(N) + " exceeds memory budget");
  LambdaTable t;
  t.limit = N;
  std::vector<uint64_t> primes;
  sieve_primes(N, [&](const std::vector<uint64_t>& seg, int) {
    primes.insert(primes.end(), seg.begin(), seg.end());
  });
  auto hp = higher_prime_powers(N);
  t.n.reserve(primes.size() + hp.size());
  t.lambda.reserve(primes.size() + hp.size());
  size_t j = 0;
  for (uint64_t p : primes) {
    while (j < hp.size() && hp[j].first < p) {
      t.n.push_back(hp[j].first);
      t.lambda.push_back(std::log(static_cast<double>(hp[j].second)));
      ++j;
    }
    t.n.push_back(p);
    t.lambda.push_back(std::log(static_cast<double>(p)));
  }
  for (; j < hp.size(); ++j) {
    t.n.push_back(hp[j].first);
    t.lambda.push_back(std::log(static_cast<double>(hp[j].second)));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Character group

namespace {

struct CyclicFactor {
  int64_t pe;               // prime-power modulus the factor lives on
  int order;                // cyclic order
  std::vector<int32_t> log; // discrete log of residues mod pe (-1 if not a unit)
};

int64_t primitive_root_p2(int64_t p) {
  int64_t phi = p - 1;
  auto f = factorize(phi);
  for (int64_t g = 2;; ++g) {
    bool ok = true;
    for (auto [r, e] : f)
      if (powmod(g, phi / r, p) == 1) ok = false;
    if (!ok) continue;
    if (powmod(g, p - 1, p * p) == 1) continue;
    return g;
  }
}

std::vector<CyclicFactor> build_factors(int q) {
  std::vector<CyclicFactor> out;
  for (auto [p, e] : factorize(q)) {
    int64_t pe = ipow(p, e);
    if (p == 2) {
      if (e == 1) continue;
      CyclicFactor sign{pe, 2, std::vector<int32_t>(pe, -1)};
      CyclicFactor five{pe, static_cast<int>(pe / 4), std::vector<int32_t>(pe, -1)};
      int64_t v = 1;
      for (int64_t a = 0; a < pe / 4; ++a) {
        sign.log[v] = 0;
        sign.log[pe - v] = 1;
        five.log[v] = static_cast<int32_t>(a);
        five.log[pe - v] = static_cast<int32_t>(a);
        v = v * 5 % pe;
      }
      out.push_back(std::move(sign));
      if (e >= 3) out.push_back(std::move(five));
    } else {
      int64_t g = primitive_root_p2(p);
      int64_t phi = pe / p * (p - 1);
      CyclicFactor f{pe, static_cast<int>(phi), std::vector<int32_t>(pe, -1)};
      int64_t v = 1;
      for (int64_t a = 0; a < phi; ++a) {
        f.log[v] = static_cast<int32_t>(a);
        v = v * g % pe;
      }
      out.push_back(std::move(f));
    }
  }
  return out;
}

}  // namespace

CharacterGroup::CharacterGroup(int q) : q_(q) {
  if (q < 1) throw ValidationError("character_group: q must be >= 1");
  auto factors = build_factors(q);
  for (auto& f : factors) E_ = std::lcm(E_, f.order);
  roots_.resize(E_);
  for (int k = 0; k < E_; ++k) roots_[k] = std::polar(1.0, kTwoPi * k / E_);

  for (int m = 1; m <= q; ++m)
    if (std::gcd(m, q) == 1) residues_.push_back(m % q);
  if (q == 1) residues_ = {0};
  std::sort(residues_.begin(), residues_.end());

  // logs[m][f]
  std::vector<std::vector<int32_t>> logs(q);
  for (int m : residues_) {
    logs[m].resize(factors.size());
    for (size_t f = 0; f < factors.size(); ++f)
      logs[m][f] = factors[f].log[m % factors[f].pe];
  }

  pos_of_conrey_.assign(q + 1, -1);
  int phi = static_cast<int>(residues_.size());
  table_.assign(static_cast<size_t>(phi) * q, -1);
  for (int i = 0; i < phi; ++i) {
    int n = residues_[i];
    Character c;
    c.q = q;
    c.conrey = (q == 1) ? 1 : n;
    c.index = i;
    for (int m : residues_) {
      int64_t k = 0;
      for (size_t f = 0; f < factors.size(); ++f)
        k += static_cast<int64_t>(logs[n][f]) * logs[m][f] % factors[f].order *
             (E_ / factors[f].order);
      table_[static_cast<size_t>(i) * q + m] = static_cast<int32_t>(k % E_);
    }
    chars_.push_back(c);
    pos_of_conrey_[c.conrey] = i;
    if (n == 1 % q) principal_ = i;
  }

  // chi_n * chi_n' = chi_{n n'}: the exponent pairing is bilinear in the logs.
  index_of_residue_.assign(q, -1);
  for (int i = 0; i < phi; ++i) index_of_residue_[residues_[i]] = i;
  conj_.resize(phi);
  for (int i = 0; i < phi; ++i) {
    int inv = 0;
    for (int x : residues_)
      if ((int64_t(x) * residues_[i]) % q == 1 % q) inv = x;
    conj_[i] = index_of_residue_[inv];
  }

  // Orders, parity, conductors, primitive tables.
  std::map<int, std::unique_ptr<CharacterGroup>> sub;
  auto divs = divisors(q);
  prim_.resize(phi);
  for (int i = 0; i < phi; ++i) {
    Character& c = chars_[i];
    int g = E_;
    for (int m : residues_) g = std::gcd(g, table_[size_t(i) * q + m]);
    c.order = E_ / g;
    c.parity = (q <= 2) ? 0 : (table_[size_t(i) * q + (q - 1)] == 0 ? 0 : 1);
    for (int64_t d : divs) {
      bool ok = true;
      for (int m : residues_)
        if (m % d == 1 % d && table_[size_t(i) * q + m] != 0) {
          ok = false;
          break;
        }
      if (ok) {
        c.conductor = static_cast<int>(d);
        break;
      }
    }
    int d = c.conductor;
    if (d == q) {
      c.primitive_conrey = c.conrey;
      prim_[i].assign(q, -1);
      for (int m : residues_) prim_[i][m] = table_[size_t(i) * q + m];
      continue;
    }
    auto& gd = sub[d];
    if (!gd) gd = std::make_unique<CharacterGroup>(d);
    int scale = E_ / gd->exponent();
    for (const auto& cd : gd->characters()) {
      if (cd.conductor != d) continue;
      bool ok = true;
      for (int m : residues_)
        if (gd->exp_at(cd.index, m) * scale != table_[size_t(i) * q + m]) {
          ok = false;
          break;
        }
      if (!ok) continue;
      c.primitive_conrey = cd.conrey;
      prim_[i].assign(d, -1);
      for (int m = 0; m < d; ++m) {
        int k = gd->exp_at(cd.index, m);
        prim_[i][m] = k < 0 ? -1 : k * scale;
      }
      break;
    }
  }
}

int CharacterGroup::position(int conrey) const {
  if (conrey < 1 || conrey > q_) return -1;
  return pos_of_conrey_[conrey];
}

int CharacterGroup::product(int i, int j) const {
  return index_of_residue_[(int64_t(residues_[i]) * residues_[j]) % q_];
}

int CharacterGroup::exp_at(int pos, int64_t m) const {
  int64_t r = ((m % q_) + q_) % q_;
  return table_[size_t(pos) * q_ + r];
}

cplx CharacterGroup::value(int pos, int64_t m) const {
  int k = exp_at(pos, m);
  return k < 0 ? cplx(0, 0) : roots_[k];
}

int CharacterGroup::primitive_exp(int pos, int64_t m) const {
  int64_t d = chars_[pos].conductor;
  return prim_[pos][((m % d) + d) % d];
}

cplx CharacterGroup::primitive_value(int pos, int64_t m) const {
  int k = primitive_exp(pos, m);
  return k < 0 ? cplx(0, 0) : roots_[k];
}

int64_t CharacterGroup::crt_lift(int64_t d, int64_t m) const {
  // x = m mod d, x = 1 mod q/d.
  int64_t e = q_ / d;
  for (int64_t x = ((m % d) + d) % d; x < q_; x += d)
    if (x % e == 1 % e) return x;
  return -1;
}

cplx CharacterGroup::component_value(int pos, int64_t d, int64_t m) const {
  if (d == 1) return 1.0;
  return value(pos, crt_lift(d, m));
}

std::pair<int, int> CharacterGroup::orthogonality_failure(double tol) const {
  for (int i = 0; i < phi(); ++i)
    for (int j = 0; j < phi(); ++j) {
      CompensatedSum<cplx> s;
      for (int m : residues_) s.add(value(i, m) * std::conj(value(j, m)));
      double target = (i == j) ? phi() : 0.0;
      if (std::abs(s.value() - target) > tol) return {i, j};
    }
  return {-1, -1};
}

bool verify_orthogonality(const CharacterGroup& g, double tol) {
  return g.orthogonality_failure(tol).first < 0;
}

cplx sq_brute(const CharacterGroup& g, int chi_pos, int64_t m, int64_t n) {
  const int E = g.exponent();
  std::vector<int64_t> counts(E, 0);
  for (int i = 0; i < g.phi(); ++i) {
    int j = g.product(chi_pos, g.conj(i));
    int a = g.primitive_exp(i, m);
    int b = g.primitive_exp(j, n);
    if (a < 0 || b < 0) continue;
    counts[(a + b) % E] += 1;
  }
  CompensatedSum<cplx> s;
  for (int k = 0; k < E; ++k)
    if (counts[k]) s.add(static_cast<double>(counts[k]) * g.root(k));
  return s.value();
}

namespace {

int valuation(int64_t q, int64_t p) {
  int v = 0;
  while (q % p == 0) q /= p, ++v;
  return v;
}

bool congruent(int64_t a, int64_t b, int64_t m) { return m == 1 || (a - b) % m == 0; }

}  // namespace

cplx sq_closed(const CharacterGroup& g, int chi_pos, PrimePower A, PrimePower B) {
  if (!is_prime(A.p) || !is_prime(B.p) || A.e < 1 || B.e < 1)
    throw ValidationError("sq_closed: arguments must be prime powers");
  const int64_t q = g.modulus();
  const int64_t a = A.value(), b = B.value();
  const int nu1 = valuation(q, A.p), nu2 = valuation(q, B.p);
  const int64_t q1 = ipow(A.p, nu1), q2 = ipow(B.p, nu2);

  if (nu1 == 0 && nu2 == 0)
    return g.value(chi_pos, a) * double(euler_phi(q)) * double(congruent(a, b, q));
  if (nu1 > 0 && nu2 == 0) {
    int64_t r = q / q1;
    return g.value(chi_pos, b) * double(euler_phi(r)) * double(congruent(a, b, r));
  }
  if (nu1 == 0 && nu2 > 0) {
    int64_t r = q / q2;
    return g.value(chi_pos, a) * double(euler_phi(r)) * double(congruent(a, b, r));
  }
  if (A.p == B.p) {
    int64_t r = q / q1;
    if (r % g.at(chi_pos).conductor != 0) return 0.0;
    if (!congruent(a, b, r)) return 0.0;
    return g.value(chi_pos, a + r) * double(euler_phi(r));
  }
  // p1 != p2, both divide q: chi = chi1 chi2 chi3 over q1, q2, q/(q1 q2).
  int64_t r = q / (q1 * q2);
  if (!congruent(a, b, r)) return 0.0;
  cplx c1 = g.component_value(chi_pos, q1, b + q / q2);
  cplx c2 = g.component_value(chi_pos, q2, a);
  cplx c3 = g.component_value(chi_pos, r, b);
  return c1 * c2 * c3 * double(euler_phi(r));
}

ConductorMoments conductor_moments(int q) {
  if (q < 3) throw ValidationError("conductor_moments: q must be >= 3");
  CharacterGroup g(q);
  double pf = 0, p2 = 0;
  for (auto [p, e] : factorize(q)) {
    pf += std::log(double(p)) / (p - 1);
    p2 += std::log(double(p)) * std::log(double(p)) / p;
  }
  double target = std::log(double(q)) - pf;
  CompensatedSum<double> s, v;
  for (const auto& c : g.characters()) {
    if (c.index == g.principal()) continue;
    s.add(std::log(double(c.conductor)));
  }
  ConductorMoments out;
  out.mean_log_conductor = s.value() / g.phi();
  out.mean_residual = out.mean_log_conductor - target;
  for (const auto& c : g.characters()) {
    if (c.index == g.principal()) continue;
    double d = std::log(double(c.conductor)) - target;
    v.add(d * d);
  }
  out.variance = v.value() / g.phi();
  out.prime_square_sum = p2;
  return out;
}

}  // namespace momlab
