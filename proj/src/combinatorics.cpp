#include "momlab/combinatorics.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "momlab/arith.hpp"

namespace momlab {

BigInt factorial(int n) {
  BigInt r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

BigInt mu(int n) {
  if (n < 0) throw ValidationError("mu: n must be >= 0");
  if (n % 2) return 0;
  int m = n / 2;
  return factorial(n) / (BigInt(1) << m) / factorial(m);
}

Rational nu(int n) {
  if (n < 2) throw ValidationError("nu: n must be >= 2");
  Rational s = 0;
  for (int m = 0; 2 * m <= n - 2; ++m) {
    int k = n - 2 * m;
    s += Rational(1, factorial(k) * (BigInt(1) << (2 * m)) * factorial(m) * factorial(m));
  }
  BigInt nf = factorial(n);
  return s * Rational(nf * nf);
}

Rational nu_prime(int n) {
  if (n < 2 || n % 2) throw ValidationError("nu_prime: n must be even and >= 2");
  Rational s = 0;
  BigInt n3 = factorial(n) * factorial(n) * factorial(n);
  for (int k1 = 2; k1 <= n; ++k1) {
    if ((n - k1) % 2) continue;
    int l1 = (n - k1) / 2;
    for (int k2 = 2; k2 <= n; ++k2) {
      if ((n - k2) % 2) continue;
      int l2 = (n - k2) / 2;
      int rest = n - k1 - k2;
      if (rest < 0 || rest % 2) continue;
      int l3 = rest / 2;
      BigInt den = factorial(k1) * factorial(k2) * (BigInt(1) << (l1 + l2 + l3)) *
                   factorial(l1) * factorial(l2) * factorial(l3);
      s += Rational(n3, den);
    }
  }
  return s;
}

Rational nu_dprime(int n) {
  if (n < 2 || n % 2) throw ValidationError("nu_dprime: n must be even and >= 2");
  Rational s = 0;
  BigInt n3 = factorial(n) * factorial(n) * factorial(n);
  for (int k1 = 1; k1 <= n; ++k1)
    for (int k2 = 1; k1 + k2 <= n; ++k2)
      for (int k3 = 1; k3 <= n; ++k3) {
        int r3 = n - k1 - k2, r1 = n - k2 - k3, r2 = n - k1 - k3;
        if (r1 < 0 || r2 < 0 || r3 < 0 || r1 % 2 || r2 % 2 || r3 % 2) continue;
        int l1 = r1 / 2, l2 = r2 / 2, l3 = r3 / 2;
        BigInt den = factorial(k1) * factorial(k2) * factorial(k3) *
                     (BigInt(1) << (l1 + l2 + l3)) * factorial(l1) * factorial(l2) *
                     factorial(l3);
        s += Rational(n3, den);
      }
  return s / 3;
}

double to_double(const Rational& x) { return static_cast<double>(x); }

double theta(int n, int r) {
  (void)r;
  if (n < 2) throw ValidationError("theta: n must be >= 2");
  if (n % 2) return 0.0;
  return to_double(nu_prime(n) + nu_dprime(n)) / std::pow(to_double(nu(n)), 1.5);
}

InvolutionClass parse_class(const std::string& tag) {
  if (tag == "F") return InvolutionClass::F;
  if (tag == "G") return InvolutionClass::G;
  if (tag == "I") return InvolutionClass::I;
  throw ValidationError("unknown involution class '" + tag + "' (expected F, G or I)");
}

std::string class_name(InvolutionClass c) {
  switch (c) {
    case InvolutionClass::F: return "F";
    case InvolutionClass::G: return "G";
    default: return "I";
  }
}

uint64_t double_factorial_odd(int points) {
  if (points % 2) return 0;
  uint64_t r = 1;
  for (int k = points - 1; k > 1; k -= 2) r *= k;
  return r;
}

namespace {

constexpr int kMaxPoints = 16;
constexpr int kMaxRows = 16;

struct Classifier {
  int s, n, r;
  bool even;
  bool strict;
  std::vector<int> row_of;  // after relabelling

  struct Result {
    bool I, F, G;
  };

  Result classify(const int* partner) const {
    int c[kMaxRows][kMaxRows] = {};
    const int P = s * n;
    for (int i = 0; i < P; ++i) c[row_of[i]][row_of[partner[i]]]++;
    int deg[kMaxRows] = {};
    int edges = 0;
    bool I = true;
    for (int mu = 0; mu < s; ++mu) {
      int cross = 0;
      for (int nu = 0; nu < s; ++nu)
        if (nu != mu) {
          cross += c[mu][nu];
          if (c[mu][nu]) deg[mu]++;
        }
      if (cross < 2) I = false;
    }
    for (int mu = 0; mu < s; ++mu)
      for (int nu = mu + 1; nu < s; ++nu)
        if (c[mu][nu]) edges++;
    Result res{I, false, false};
    if (!I) return res;
    if (even) {
      bool all_one = true;
      for (int mu = 0; mu < s; ++mu)
        if (deg[mu] != 1) all_one = false;
      res.F = all_one;
      res.G = edges >= r + 1;
      return res;
    }
    res.F = odd_F(c, deg);
    if (edges >= r + 3) {
      res.G = true;
    } else if (edges == r + 2) {
      bool tri = false;
      for (int a = 0; a < s && !tri; ++a)
        for (int b = a + 1; b < s && !tri; ++b)
          if (c[a][b])
            for (int d = b + 1; d < s; ++d)
              if (c[b][d] && c[a][d]) {
                tri = true;
                break;
              }
      res.G = !tri;
    }
    return res;
  }

  bool odd_F(const int (*c)[kMaxRows], const int* deg) const {
    if (s < 3) return false;
    for (int a = 0; a < s; ++a)
      for (int b = a + 1; b < s; ++b)
        for (int d = b + 1; d < s; ++d) {
          int inside = (c[a][b] > 0) + (c[b][d] > 0) + (c[a][d] > 0);
          if (inside < 2) continue;
          bool ok = true;
          for (int mu = 0; mu < s && ok; ++mu) {
            if (mu == a || mu == b || mu == d) continue;
            if (deg[mu] != 1) {
              ok = false;
              break;
            }
            if (strict && (c[mu][a] || c[mu][b] || c[mu][d])) ok = false;
          }
          if (ok) return true;
        }
    return false;
  }
};

struct Tally {
  uint64_t F = 0, G = 0, I = 0, FG = 0, scanned = 0;
  std::vector<int> witness;
};

void recurse(int* partner, int P, const Classifier& cl, Tally& t) {
  int i = 0;
  while (i < P && partner[i] >= 0) ++i;
  if (i == P) {
    auto res = cl.classify(partner);
    t.scanned++;
    if (res.I) t.I++;
    if (res.F) {
      t.F++;
      if (t.witness.empty()) t.witness.assign(partner, partner + P);
    }
    if (res.G) t.G++;
    if (res.F && res.G) t.FG++;
    return;
  }
  for (int j = i + 1; j < P; ++j) {
    if (partner[j] >= 0) continue;
    partner[i] = j;
    partner[j] = i;
    recurse(partner, P, cl, t);
    partner[i] = partner[j] = -1;
  }
}

}  // namespace

ClassCounts enumerate_classes(int s, int n, const EnumerationOptions& opts) {
  if (s < 1 || n < 1) throw ValidationError("enumerate_classes: s, n must be >= 1");
  const int P = s * n;
  if (P > kMaxPoints) throw BudgetError("enumerate_classes: s*n exceeds 16 points");
  ClassCounts out;
  out.s = s;
  out.n = n;
  if (P % 2) return out;
  if (double_factorial_odd(P) > opts.budget)
    throw BudgetError("enumerate_classes: involution count exceeds budget");

  Classifier cl{s, n, s / 2, s % 2 == 0, opts.strict_pairing, std::vector<int>(P)};
  if (s % 2) cl.r = (s - 1) / 2;
  if (!opts.row_perm.empty()) {
    std::vector<int> sorted = opts.row_perm;
    std::sort(sorted.begin(), sorted.end());
    for (int mu = 0; mu < s; ++mu)
      if (static_cast<int>(sorted.size()) != s || sorted[mu] != mu)
        throw ValidationError("enumerate_classes: row_perm is not a permutation of rows");
  }
  // Permuting points inside a row leaves every row count unchanged, so only
  // the row relabelling reaches the classifier.
  for (int mu = 0; mu < s; ++mu)
    for (int j = 0; j < n; ++j)
      cl.row_of[mu * n + j] = opts.row_perm.empty() ? mu : opts.row_perm[mu];

  int T = max_threads(opts.exec);
  std::vector<Tally> tallies(T);
  const int branches = P - 1;
  auto run_branch = [&](int b, Tally& t) {
    int partner[kMaxPoints];
    std::fill(partner, partner + P, -1);
    partner[0] = b + 1;
    partner[b + 1] = 0;
    recurse(partner, P, cl, t);
  };
  if (opts.exec == Exec::serial) {
    for (int b = 0; b < branches; ++b) run_branch(b, tallies[0]);
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (int b = 0; b < branches; ++b) run_branch(b, tallies[omp_get_thread_num()]);
  }
  for (auto& t : tallies) {
    out.F += t.F;
    out.G += t.G;
    out.I += t.I;
    out.overlap_FG += t.FG;
    out.scanned += t.scanned;
    if (out.witness_F.empty()) out.witness_F = t.witness;
  }
  return out;
}

InvolutionClassCount enumerate_class(int s, int n, InvolutionClass tag,
                                     const EnumerationOptions& opts) {
  ClassCounts c = enumerate_classes(s, n, opts);
  InvolutionClassCount r;
  r.s = s;
  r.n = n;
  r.tag = tag;
  r.scanned = c.scanned;
  r.count = tag == InvolutionClass::F ? c.F : tag == InvolutionClass::G ? c.G : c.I;
  if (tag == InvolutionClass::F) r.witness = c.witness_F;
  return r;
}

BigInt f_formula(int s, int n) {
  if (s < 1 || n < 2) throw ValidationError("f_formula: need s >= 1, n >= 2");
  if (s % 2 == 0) {
    int r = s / 2;
    Rational v = Rational(mu(2 * r));
    Rational nn = nu(n);
    for (int i = 0; i < r; ++i) v *= nn;
    if (denominator(v) != 1) throw ValidationError("f_formula: non-integral value");
    return numerator(v);
  }
  if (n % 2) throw ValidationError("f_formula: odd s requires even n");
  int r = (s - 1) / 2;
  if (r < 1) return 0;
  Rational v = Rational(factorial(2 * r + 1), (BigInt(1) << r) * factorial(r - 1));
  Rational nn = nu(n);
  for (int i = 0; i < r - 1; ++i) v *= nn;
  v *= nu_prime(n) + nu_dprime(n);
  if (denominator(v) != 1) throw ValidationError("f_formula: non-integral value");
  return numerator(v);
}

std::vector<FormulaCheck> verify_formulas(int max_points, Exec exec) {
  std::vector<FormulaCheck> out;
  EnumerationOptions opts;
  opts.exec = exec;
  for (int s = 2; s <= max_points; ++s)
    for (int n = 2; s * n <= max_points; ++n) {
      if ((s * n) % 2) continue;
      if (s % 2 && (n % 2 || s < 3)) continue;
      FormulaCheck fc;
      fc.s = s;
      fc.n = n;
      ClassCounts c = enumerate_classes(s, n, opts);
      fc.enumerated = c.F;
      fc.formula = f_formula(s, n);
      fc.match = fc.enumerated == fc.formula;
      fc.witness = c.witness_F;
      out.push_back(fc);
    }
  return out;
}

}  // namespace momlab
