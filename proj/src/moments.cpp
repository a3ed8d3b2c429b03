#include "momlab/moments.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "momlab/combinatorics.hpp"

namespace momlab {

double power_mean(const std::vector<double>& dev, int n) {
  if (dev.empty()) return 0.0;
  CompensatedSum<double> acc;
  for (double d : dev) acc.add(std::pow(d, n));
  return acc.value() / double(dev.size());
}

double power_mean_bound(const std::vector<double>& dev, int n, double eps) {
  if (dev.empty() || eps <= 0) return 0.0;
  double s = 0;
  for (double d : dev) s += std::pow(std::abs(d) + eps, n) - std::pow(std::abs(d), n);
  return s / double(dev.size());
}

std::vector<double> residue_deviations(const CharacterGroup& g,
                                       const std::function<double(int)>& class_sum) {
  const auto& res = g.coprime_residues();
  std::vector<double> S(res.size());
  CompensatedSum<double> tot;
  for (size_t i = 0; i < res.size(); ++i) {
    S[i] = class_sum(res[i]);
    tot.add(S[i]);
  }
  double mean = tot.value() / double(res.size());
  for (double& v : S) v -= mean;
  return S;
}

namespace {

void require_moment_args(double x, int q, int n, const LambdaTable& table) {
  if (q < 3) throw ValidationError("moments: q must be >= 3");
  if (n < 1) throw ValidationError("moments: n must be >= 1");
  if (!(x >= 1)) throw ValidationError("moments: x must be >= 1");
  if (double(table.limit) < x)
    throw ValidationError("moments: lambda table limit is below x = " + format_double(x, 8));
}

}  // namespace

MomentValue moment_residue_side(double x, int q, int n, const Weight& eta,
                                const LambdaTable& table) {
  require_moment_args(x, q, n, table);
  CharacterGroup g(q);
  const double t = std::log(x);
  std::vector<CompensatedSum<double>> cls(q);
  for (size_t i = 0; i < table.size(); ++i) {
    double ln = std::log(double(table.n[i]));
    cls[table.n[i] % uint64_t(q)].add(table.lambda[i] * std::exp(-0.5 * ln) * eta.eta(ln - t));
  }
  auto dev = residue_deviations(g, [&](int a) { return cls[a].value(); });
  double eps = 2 * prime_tail_bound(eta, t, double(table.limit));
  return {power_mean(dev, n), 0.0, power_mean_bound(dev, n, eps)};
}

MomentValue moment_character_side(double x, int q, int n, const Weight& eta,
                                  const LambdaTable& table) {
  require_moment_args(x, q, n, table);
  CharacterGroup g(q);
  const int phi = g.phi();
  std::vector<cplx> psi(phi, 0.0);
  std::vector<double> mag(phi, 0.0), magp(phi, 0.0);
  double eps = prime_tail_bound(eta, std::log(x), double(table.limit));
  for (int c = 0; c < phi; ++c) {
    if (c == g.principal()) continue;
    psi[c] = psi_eta_char(x, g, c, eta, table).value;
    mag[c] = std::abs(psi[c]);
    magp[c] = mag[c] + eps;
  }
  CompensatedSum<cplx> acc;
  for_each_tuple(g, n, [&](const std::vector<int>& tup) {
    cplx p = 1;
    for (int c : tup) p *= psi[c];
    acc.add(p);
  });
  double scale = std::pow(double(phi), -n);
  cplx v = acc.value() * scale;
  double bound = (tuple_product_sum(g, n, magp) - tuple_product_sum(g, n, mag)) * scale;
  return {v.real(), v.imag(), bound};
}

uint64_t tuple_count(const CharacterGroup& g, int n) {
  std::vector<double> one(g.phi(), 1.0);
  return static_cast<uint64_t>(std::llround(tuple_product_sum(g, n, one)));
}

void for_each_tuple(const CharacterGroup& g, int n,
                    const std::function<void(const std::vector<int>&)>& fn, uint64_t budget) {
  if (n < 1) throw ValidationError("tuples: n must be >= 1");
  const int phi = g.phi();
  std::vector<int> tup(n);
  uint64_t visited = 0;
  std::function<void(int, int)> rec = [&](int j, int prod) {
    if (j == n - 1) {
      if (++visited > budget) throw BudgetError("character tuples exceed the budget");
      int last = g.conj(prod);
      if (last == g.principal()) return;
      tup[j] = last;
      fn(tup);
      return;
    }
    for (int c = 0; c < phi; ++c) {
      if (c == g.principal()) continue;
      tup[j] = c;
      rec(j + 1, g.product(prod, c));
    }
  };
  rec(0, g.principal());
}

double tuple_product_sum(const CharacterGroup& g, int n, const std::vector<double>& u) {
  const int phi = g.phi();
  std::vector<double> f(phi, 0.0), h(phi);
  f[g.principal()] = 1.0;
  for (int j = 0; j < n; ++j) {
    std::fill(h.begin(), h.end(), 0.0);
    for (int a = 0; a < phi; ++a) {
      if (f[a] == 0) continue;
      for (int c = 0; c < phi; ++c)
        if (c != g.principal()) h[g.product(a, c)] += f[a] * u[c];
    }
    f.swap(h);
  }
  return f[g.principal()];
}

// ---------------------------------------------------------------------------

SymKey sym_add(const SymKey& a, const SymKey& b) {
  SymKey out;
  out.reserve(a.size() + b.size());
  size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      int32_t c = a[i].second + b[j].second;
      if (c) out.push_back({a[i].first, c});
      ++i, ++j;
    }
  }
  return out;
}

SymKey sym_neg(const SymKey& a) {
  SymKey out(a);
  for (auto& e : out) e.second = -e.second;
  return out;
}

namespace {

template <class ZeroSub, class ZeroEntry>
int delta_exact_impl(int s, ZeroSub subset_zero, ZeroEntry entry_zero) {
  if (s < 1 || s > 30) throw ValidationError("delta: need 1 <= s <= 30");
  int total = 0;
  for (uint32_t mask = 0; mask < (1u << s); ++mask) {
    bool ok = true;
    for (int mu = 0; mu < s && ok; ++mu)
      if (!(mask >> mu & 1) && !entry_zero(mu)) ok = false;
    if (!ok || !subset_zero(mask)) continue;
    total += ((s - std::popcount(mask)) % 2) ? -1 : 1;
  }
  return total;
}

}  // namespace

int delta_exact(const std::vector<long long>& sigma) {
  const int s = static_cast<int>(sigma.size());
  return delta_exact_impl(
      s,
      [&](uint32_t mask) {
        long long t = 0;
        for (int mu = 0; mu < s; ++mu)
          if (mask >> mu & 1) t += sigma[mu];
        return t == 0;
      },
      [&](int mu) { return sigma[mu] == 0; });
}

int delta_exact(const std::vector<SymKey>& sigma) {
  const int s = static_cast<int>(sigma.size());
  return delta_exact_impl(
      s,
      [&](uint32_t mask) {
        SymKey t;
        for (int mu = 0; mu < s; ++mu)
          if (mask >> mu & 1) t = sym_add(t, sigma[mu]);
        return t.empty();
      },
      [&](int mu) { return sigma[mu].empty(); });
}

double delta_smoothed(const std::vector<double>& sigma, const std::vector<bool>& nonzero,
                      const Kernel& kernel, double T) {
  const int s = static_cast<int>(sigma.size());
  if (s < 1 || s > 30) throw ValidationError("delta: need 1 <= s <= 30");
  if (nonzero.size() != sigma.size()) throw ValidationError("delta: flag count mismatch");
  const double h0 = kernel.phi_hat(0.0);
  CompensatedSum<double> acc;
  for (uint32_t mask = 0; mask < (1u << s); ++mask) {
    bool ok = true;
    for (int mu = 0; mu < s && ok; ++mu)
      if (!(mask >> mu & 1) && nonzero[mu]) ok = false;
    if (!ok) continue;
    double sum = 0;
    for (int mu = 0; mu < s; ++mu)
      if ((mask >> mu & 1) && nonzero[mu]) sum += sigma[mu];
    double v = kernel.phi_hat(T * sum) / h0;
    acc.add(((s - std::popcount(mask)) % 2) ? -v : v);
  }
  return acc.value();
}

double delta_smoothed(const std::vector<long long>& sigma, const Kernel& kernel, double T) {
  std::vector<double> s(sigma.begin(), sigma.end());
  std::vector<bool> nz(sigma.size());
  for (size_t i = 0; i < sigma.size(); ++i) nz[i] = sigma[i] != 0;
  return delta_smoothed(s, nz, kernel, T);
}

// ---------------------------------------------------------------------------

ZeroFamily::ZeroFamily(const CharacterGroup& g, const Weight& eta, const ZeroStore& store,
                       double T)
    : g_(g), T_(T) {
  if (!eta.even) throw ValidationError("zero family needs an even weight");
  const int phi = g.phi();
  zeros_.assign(phi, {});
  S_.assign(phi, 0.0);
  tau_.assign(phi, 0.0);
  // Orbit ids: the k-th zero of primitive list L gets base[L] + k + 1.
  std::map<const ZeroList*, int32_t> base;
  std::map<const ZeroList*, int> index;
  list_.assign(phi, -1);
  int32_t next = 0;
  for (int c = 0; c < phi; ++c) {
    if (c == g.principal()) continue;
    const ZeroList* L = &store.require(g, c, T);
    if (!base.count(L)) {
      base[L] = next;
      int id = static_cast<int>(index.size());
      index[L] = id;
      next += static_cast<int32_t>(L->gamma.size());
    }
    list_[c] = index[L];
  }
  for (int c = 0; c < phi; ++c) {
    if (c == g.principal()) continue;
    const ZeroList& z = store.require(g, c, T);
    const ZeroList& zc = store.require(g, g.conj(c), T);
    auto& out = zeros_[c];
    for (size_t k = 0; k < z.gamma.size() && z.gamma[k] <= T; ++k)
      out.push_back({z.gamma[k], eta.eta_hat(z.gamma[k] / kTwoPi), base[&z] + int32_t(k) + 1});
    for (size_t k = 0; k < zc.gamma.size() && zc.gamma[k] <= T; ++k)
      out.push_back({-zc.gamma[k], eta.eta_hat(zc.gamma[k] / kTwoPi), -(base[&zc] + int32_t(k) + 1)});
    std::stable_sort(out.begin(), out.end(), [](const SignedZero& a, const SignedZero& b) {
      return std::abs(a.what) > std::abs(b.what);
    });
    for (auto& z0 : out) S_[c] += std::abs(z0.what);
    tau_[c] = zero_tail_bound([&](double u) { return eta.eta_hat_bound(u / kTwoPi); },
                              g.at(c).conductor, T);
  }
}

double auto_zero_height(const Weight& eta, int q, double tol, double max_height) {
  double T = 25;
  for (;; T *= 2) {
    if (T >= max_height) return max_height;
    double b = zero_tail_bound([&](double u) { return eta.eta_hat_bound(u / kTwoPi); }, q, T);
    if (b <= tol) return T;
  }
}

SpectralMean spectral_mean(const ZeroFamily& fam, int n, uint64_t budget) {
  if (n < 1) throw ValidationError("spectral mean: n must be >= 1");
  SpectralMean out;
  const CharacterGroup& g = fam.group();
  const int phi = g.phi();
  if (n % 2) return out;  // an odd number of ordinates cannot cancel in pairs

  // Partners of c: positions whose zeros are the conjugates of those of c.
  std::vector<std::vector<int>> partners(phi);
  for (int c = 0; c < phi; ++c) {
    if (c == g.principal()) continue;
    for (int d = 0; d < phi; ++d)
      if (d != g.principal() && fam.list_id(g.conj(d)) == fam.list_id(c)) partners[c].push_back(d);
  }
  std::vector<int> partner(n, -1), chr(n);
  std::vector<int32_t> ids(n);
  CompensatedSum<double> acc;
  std::function<void(double)> rec = [&](double w) {
    int i = 0;
    while (i < n && partner[i] >= 0) ++i;
    if (i == n) {
      if (++out.terms > budget) throw BudgetError("spectral mean exceeds the budget");
      int prod = g.principal();
      for (int c : chr) prod = g.product(prod, c);
      if (prod != g.principal()) return;
      // Count the array once: accept only the greedy leftmost pairing.
      std::vector<char> used(n, 0);
      for (int a = 0; a < n; ++a) {
        if (used[a]) continue;
        int b = a + 1;
        while (b < n && (used[b] || ids[b] != -ids[a])) ++b;
        if (b != partner[a]) return;
        used[a] = used[b] = 1;
      }
      acc.add(w);
      return;
    }
    for (int j = i + 1; j < n; ++j) {
      if (partner[j] >= 0) continue;
      partner[i] = j, partner[j] = i;
      for (int c = 0; c < phi; ++c) {
        if (c == g.principal()) continue;
        chr[i] = c;
        for (int d : partners[c]) {
          chr[j] = d;
          for (const SignedZero& z : fam.zeros(c)) {
            ids[i] = z.id, ids[j] = -z.id;
            rec(w * z.what * z.what);
          }
        }
      }
      partner[i] = partner[j] = -1;
    }
  };
  rec(1.0);
  double scale = std::pow(double(phi), -n);
  out.value = acc.value() * scale;
  std::vector<double> S = fam.abs_sums(), St = fam.abs_sums();
  for (int c = 0; c < phi; ++c) St[c] += fam.tails()[c];
  out.bound = (tuple_product_sum(g, n, St) - tuple_product_sum(g, n, S)) * scale;
  return out;
}

double diagonal_lower_bound(const ZeroFamily& fam, int n) {
  if (n < 2 || n % 2) throw ValidationError("diagonal bound: n must be even >= 2");
  const CharacterGroup& g = fam.group();
  std::vector<double> B;
  std::set<int> seen;
  for (int c = 0; c < g.phi(); ++c) {
    if (c == g.principal() || g.conj(c) < c) continue;
    int la = fam.list_id(c), lb = fam.list_id(g.conj(c));
    if (seen.count(la) || seen.count(lb)) continue;
    seen.insert(la), seen.insert(lb);
    auto b = [&](int pos) {
      double s = 0;
      for (const SignedZero& z : fam.zeros(pos)) s += z.what * z.what;
      return s;
    };
    B.push_back(g.conj(c) == c ? b(c) : b(c) + b(g.conj(c)));
  }
  const int m = n / 2;
  std::vector<double> e(m + 1, 0.0);
  e[0] = 1;
  for (double x : B)
    for (int k = m; k >= 1; --k) e[k] += e[k - 1] * x;
  double mfact = std::tgamma(m + 1.0);
  return mu(n).convert_to<double>() * std::pow(double(g.phi()), -n) * mfact * e[m];
}

// ---------------------------------------------------------------------------

ZeroRows::ZeroRows(const ZeroFamily& fam, int n, const SpectralOptions& opts) : n_(n) {
  if (n < 1) throw ValidationError("zero rows: n must be >= 1");
  const CharacterGroup& g = fam.group();
  const int phi = g.phi();
  const double scale = std::pow(double(phi), -n) * ((n % 2) ? -1.0 : 1.0);

  std::vector<double> top(phi, 0.0);
  for (int c = 0; c < phi; ++c)
    if (c != g.principal() && !fam.zeros(c).empty()) top[c] = std::abs(fam.zeros(c)[0].what);
  double heaviest = 0;
  for_each_tuple(
      g, n,
      [&](const std::vector<int>& tup) {
        double p = 1;
        for (int c : tup) p *= top[c];
        heaviest = std::max(heaviest, p);
      },
      opts.budget);
  const double cut = opts.prune * heaviest;

  CompensatedSum<double> kept;
  uint64_t visited = 0;
  std::vector<const SignedZero*> pick(n);
  std::vector<double> rest(n + 1, 1.0);
  for_each_tuple(
      g, n,
      [&](const std::vector<int>& tup) {
        for (int j = n - 1; j >= 0; --j) rest[j] = rest[j + 1] * top[tup[j]];
        std::function<void(int, double)> rec = [&](int j, double w) {
          if (j == n) {
            if (++visited > opts.budget) throw BudgetError("zero rows exceed the budget");
            double sig = 0, prod = 1;
            SymKey key;
            for (int k = 0; k < n; ++k) {
              sig += pick[k]->gamma;
              prod *= pick[k]->what;
              int32_t id = pick[k]->id;
              key = sym_add(key, SymKey{{std::abs(id), id > 0 ? 1 : -1}});
            }
            kept.add(std::abs(prod));
            if (!key.empty()) rows_.push_back({sig / kTwoPi, scale * prod, std::move(key)});
            return;
          }
          for (const SignedZero& z : fam.zeros(tup[j])) {
            double wz = w * std::abs(z.what);
            if (wz * rest[j + 1] < cut) break;  // zeros are sorted by |eta_hat|
            pick[j] = &z;
            rec(j + 1, wz);
          }
        };
        rec(0, 1.0);
      },
      opts.budget);
  double a = std::abs(scale);
  kept_ = kept.value() * a;
  std::vector<double> S = fam.abs_sums(), St = fam.abs_sums();
  for (int c = 0; c < phi; ++c) St[c] += fam.tails()[c];
  full_ = tuple_product_sum(g, n, S) * a;
  tail_ = tuple_product_sum(g, n, St) * a;
}

double ZeroRows::drop_bound(int s) const {
  return std::max(0.0, std::pow(tail_, s) - std::pow(std::min(kept_, tail_), s));
}

namespace {

// Deterministic parallel sum over i of f(i): per-index partials, then an
// ordered compensated reduction.
double ordered_sum(size_t count, const std::function<double(size_t)>& f, Exec exec) {
  std::vector<double> part(count);
#pragma omp parallel for schedule(dynamic, 16) if (exec == Exec::parallel)
  for (size_t i = 0; i < count; ++i) part[i] = f(i);
  CompensatedSum<double> acc;
  for (double v : part) acc.add(v);
  return acc.value();
}

}  // namespace

DeltaSum delta_sum(const ZeroRows& zr, int s, const Kernel& kernel, double T, bool exact,
                   const SpectralOptions& opts) {
  if (s < 1) throw ValidationError("delta sum: s must be >= 1");
  const auto& rows = zr.rows();
  const size_t R = rows.size();
  DeltaSum out;
  double powR = std::pow(double(R), s);

  if (exact) {
    if (s == 1) return out;  // a single non-cancelling row never sums to zero
    if (s == 2) {
      std::map<SymKey, CompensatedSum<double>> by_key;
      for (const auto& r : rows) by_key[r.key].add(r.weight);
      CompensatedSum<double> acc;
      for (const auto& r : rows) {
        auto it = by_key.find(sym_neg(r.key));
        if (it != by_key.end()) acc.add(r.weight * it->second.value());
      }
      out.value = acc.value();
      out.terms = R;
      return out;
    }
    if (powR > double(opts.budget)) throw BudgetError("exact delta sum exceeds the budget");
    std::function<double(int, const SymKey&, double)> rec = [&](int depth, const SymKey& key,
                                                                double w) -> double {
      if (depth == s) return key.empty() ? w : 0.0;
      double acc = 0;
      for (const auto& r : rows) acc += rec(depth + 1, sym_add(key, r.key), w * r.weight);
      return acc;
    };
    out.value = rec(0, {}, 1.0);
    out.terms = static_cast<uint64_t>(powR);
    return out;
  }

  const double h0 = kernel.phi_hat(0.0);
  if (s == 1) {
    CompensatedSum<double> acc;
    for (const auto& r : rows) acc.add(r.weight * kernel.phi_hat(T * r.sigma) / h0);
    out.value = acc.value();
    out.terms = R;
    return out;
  }
  if (s == 2) {
    if (powR <= double(opts.budget)) {
      out.value = ordered_sum(
          R,
          [&](size_t i) {
            double acc = 0;
            for (size_t j = 0; j < R; ++j)
              acc += rows[j].weight * kernel.phi_hat(T * (rows[i].sigma + rows[j].sigma));
            return rows[i].weight * acc / h0;
          },
          opts.exec);
      out.terms = static_cast<uint64_t>(powR);
      return out;
    }
    // Window |sigma_i + sigma_j| <= Xi / T; the rest is bounded by the envelope.
    double W = 0;
    for (const auto& r : rows) W += std::abs(r.weight);
    double Xi = 1;
    while (W * W * kernel.hat_envelope(Xi) / h0 > opts.window_tol) Xi *= 1.25;
    std::vector<size_t> idx(R);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return rows[a].sigma < rows[b].sigma; });
    std::vector<double> sig(R);
    for (size_t k = 0; k < R; ++k) sig[k] = rows[idx[k]].sigma;
    const double w = Xi / T;
    uint64_t pairs = 0;
    for (size_t k = 0; k < R; ++k) {
      auto lo = std::lower_bound(sig.begin(), sig.end(), -sig[k] - w);
      auto hi = std::upper_bound(sig.begin(), sig.end(), -sig[k] + w);
      pairs += uint64_t(hi - lo);
    }
    if (pairs > opts.budget) throw BudgetError("windowed delta sum exceeds the budget");
    out.value = ordered_sum(
        R,
        [&](size_t k) {
          size_t lo = std::lower_bound(sig.begin(), sig.end(), -sig[k] - w) - sig.begin();
          size_t hi = std::upper_bound(sig.begin(), sig.end(), -sig[k] + w) - sig.begin();
          double acc = 0;
          for (size_t j = lo; j < hi; ++j)
            acc += rows[idx[j]].weight * kernel.phi_hat(T * (sig[k] + sig[j]));
          return rows[idx[k]].weight * acc / h0;
        },
        opts.exec);
    out.remainder = W * W * kernel.hat_envelope(Xi) / h0;
    out.terms = pairs;
    return out;
  }
  if (powR > double(opts.budget)) throw BudgetError("delta sum exceeds the budget");
  std::function<double(int, double, double)> rec = [&](int depth, double sig,
                                                       double w) -> double {
    if (depth == s) return w * kernel.phi_hat(T * sig) / h0;
    double acc = 0;
    for (const auto& r : rows) acc += rec(depth + 1, sig + r.sigma, w * r.weight);
    return acc;
  };
  out.value = ordered_sum(
      R, [&](size_t i) { return rec(1, rows[i].sigma, rows[i].weight); }, opts.exec);
  out.terms = static_cast<uint64_t>(powR);
  return out;
}

// ---------------------------------------------------------------------------

DeviationPath::DeviationPath(const CharacterGroup& g, const Weight& eta, const ZeroStore& store,
                             double T, const PathOptions& opts)
    : g_(g), eta_(eta), opts_(opts) {
  for (int c = 0; c < g.phi(); ++c) {
    if (c == g.principal()) continue;
    chars_.push_back(c);
    sides_.emplace_back(g, c, eta, store, T);
  }
  if (opts.use_prime && eta.kind != WeightKind::classical) {
    double r = eta.decay_rate;
    double K0 = kChebyshevC * eta.envelope_C * std::abs(eta.scale) * (1 + 1 / (r - 0.5));
    t_prime_ = (std::log(opts.prime_tol) + (r - 0.5) * std::log(double(opts.X_max)) -
                std::log(K0)) / r;
  }
}

std::vector<PathValues> DeviationPath::evaluate(const std::vector<double>& t) const {
  const int phi = g_.phi();
  const auto& res = g_.coprime_residues();
  std::vector<PathValues> out(t.size());

  std::vector<size_t> prime_idx;
  for (size_t k = 0; k < t.size(); ++k)
    if (t[k] <= t_prime_ && t[k] >= 0) prime_idx.push_back(k);
  std::sort(prime_idx.begin(), prime_idx.end(), [&](size_t a, size_t b) { return t[a] < t[b]; });
  prime_idx.erase(std::unique(prime_idx.begin(), prime_idx.end(),
                              [&](size_t a, size_t b) { return t[a] == t[b]; }),
                  prime_idx.end());
  if (!prime_idx.empty()) {
    std::vector<double> tp;
    for (size_t k : prime_idx) tp.push_back(t[k]);
    ProgressionSums::Options po;
    po.X_max = opts_.X_max;
    po.tol = opts_.prime_tol;
    po.exec = opts_.exec;
    ProgressionSums ps(g_.modulus(), eta_, tp, po);
    for (size_t i = 0; i < prime_idx.size(); ++i) {
      double bound = 2 * ps.tail_bound(i);
      if (bound > opts_.prime_tol) continue;
      auto dev = residue_deviations(g_, [&](int a) { return ps.class_sum(a, i); });
      for (size_t k = 0; k < t.size(); ++k) {
        if (t[k] != tp[i]) continue;
        out[k].hybrid = dev;
        out[k].hybrid_bound = bound;
        out[k].prime = true;
      }
    }
  }

  // conj(chi)(a) for each character and residue.
  std::vector<cplx> cv(chars_.size() * res.size());
  for (size_t i = 0; i < chars_.size(); ++i)
    for (size_t a = 0; a < res.size(); ++a)
      cv[i * res.size() + a] = std::conj(g_.value(chars_[i], res[a]));

#pragma omp parallel for schedule(dynamic, 4) if (opts_.exec == Exec::parallel)
  for (size_t k = 0; k < t.size(); ++k) {
    std::vector<cplx> zs(chars_.size()), mod(chars_.size());
    double err = 0;
    for (size_t i = 0; i < chars_.size(); ++i) {
      cplx z = sides_[i].zero_sum(t[k]);
      Correction c = sides_[i].correction(t[k]);
      mod[i] = -z;
      zs[i] = -z + c.total();
      err += sides_[i].zero_tail() + c.error;
    }
    PathValues& pv = out[k];
    pv.zero.assign(res.size(), 0.0);
    pv.model.assign(res.size(), 0.0);
    for (size_t a = 0; a < res.size(); ++a) {
      cplx u = 0, v = 0;
      for (size_t i = 0; i < chars_.size(); ++i) {
        u += cv[i * res.size() + a] * zs[i];
        v += cv[i * res.size() + a] * mod[i];
      }
      pv.zero[a] = u.real() / phi;
      pv.model[a] = v.real() / phi;
    }
    pv.zero_bound = err / phi;
    if (!pv.prime) {
      pv.hybrid = pv.zero;
      pv.hybrid_bound = pv.zero_bound;
    }
  }
  return out;
}

namespace {

// Composite Simpson on [0, T] with step doubling. `values(t)` returns the
// integrand and a nonnegative error integrand at each node.
struct SimpsonResult {
  double value = 0, error = 0, quad_error = 0, step = 0;
  int doublings = 0;
};

SimpsonResult simpson_doubling(
    double T, const QuadratureOptions& qo,
    const std::function<std::vector<std::pair<double, double>>(const std::vector<double>&)>&
        values) {
  if (!(T > 0)) throw ValidationError("quadrature: T must be positive");
  if (!(qo.step > 0)) throw ValidationError("quadrature: step must be positive");
  size_t N = static_cast<size_t>(std::ceil(T / qo.step));
  N = std::max<size_t>(4, (N + 3) / 4 * 4);
  std::vector<double> t(N + 1);
  for (size_t k = 0; k <= N; ++k) t[k] = T * double(k) / double(N);
  auto fv = values(t);

  auto simpson = [&](size_t stride) {
    size_t M = N / stride;
    double h = T / double(M);
    CompensatedSum<double> a, e;
    for (size_t k = 0; k <= M; ++k) {
      double c = (k == 0 || k == M) ? 1 : (k % 2 ? 4 : 2);
      a.add(c * fv[k * stride].first);
      e.add(c * fv[k * stride].second);
    }
    return std::pair<double, double>{a.value() * h / 3, e.value() * h / 3};
  };

  SimpsonResult r;
  for (int d = 0;; ++d) {
    auto fine = simpson(1);
    auto coarse = simpson(2);
    r.value = fine.first;
    r.error = fine.second;
    r.quad_error = std::abs(fine.first - coarse.first) / 15;
    r.step = T / double(N);
    r.doublings = d;
    if (r.quad_error <= qo.tol || d >= qo.max_doublings) break;
    std::vector<double> mid(N);
    for (size_t k = 0; k < N; ++k) mid[k] = T * (double(2 * k + 1)) / double(2 * N);
    auto mv = values(mid);
    std::vector<double> t2(2 * N + 1);
    std::vector<std::pair<double, double>> f2(2 * N + 1);
    for (size_t k = 0; k <= N; ++k) t2[2 * k] = t[k], f2[2 * k] = fv[k];
    for (size_t k = 0; k < N; ++k) t2[2 * k + 1] = mid[k], f2[2 * k + 1] = mv[k];
    t.swap(t2);
    fv.swap(f2);
    N *= 2;
  }
  return r;
}

double pw(double x, int s) { return std::pow(x, s); }

}  // namespace

MomentReport vsn_empirical(double T, int s, int n, const Kernel& kernel,
                           const DeviationPath& path, double m_n, double m_n_bound,
                           const QuadratureOptions& qopts) {
  if (s < 1 || n < 1) throw ValidationError("vsn: s and n must be >= 1");
  auto sr = simpson_doubling(T, qopts, [&](const std::vector<double>& t) {
    auto pv = path.evaluate(t);
    std::vector<std::pair<double, double>> f(t.size());
    for (size_t k = 0; k < t.size(); ++k) {
      double M = power_mean(pv[k].hybrid, n);
      double eps = power_mean_bound(pv[k].hybrid, n, pv[k].hybrid_bound) + m_n_bound;
      double w = kernel.phi(t[k] / T);
      double d = M - m_n;
      f[k] = {w * pw(d, s), w * (pw(std::abs(d) + eps, s) - pw(std::abs(d), s))};
    }
    return f;
  });
  const double norm = 1 / (T * kernel.half_integral());
  MomentReport r;
  r.kind = "vsn_empirical";
  r.q = path.group().modulus();
  r.n = n, r.s = s, r.T = T;
  r.eta = path.weight().spec;
  r.phi = kernel.spec;
  r.value = sr.value * norm;
  r.quad_error = sr.quad_error * norm;
  r.trunc_error = sr.error * norm;
  r.mean = m_n;
  r.prediction = main_terms(r.q, n, s, path.weight()).moment_prediction;
  r.residual = r.value - r.prediction;
  r.extra["step"] = sr.step;
  r.extra["doublings"] = sr.doublings;
  r.extra["prime_limit_t"] = path.prime_limit();
  return r;
}

MomentReport vsn_spectral(double T, int s, int n, const Kernel& kernel, const ZeroFamily& fam,
                          const DeviationPath& path, bool exact, const SpectralOptions& sopts,
                          const QuadratureOptions& qopts) {
  if (s < 1 || n < 1) throw ValidationError("vsn: s and n must be >= 1");
  if (&fam.group() != &path.group()) throw ValidationError("vsn: family and path differ in group");
  SpectralMean mean = spectral_mean(fam, n, sopts.budget);
  ZeroRows rows(fam, n, sopts);
  DeltaSum ds = delta_sum(rows, s, kernel, T, exact, sopts);

  MomentReport r;
  r.kind = exact ? "vsn_spectral_limit" : "vsn_spectral";
  r.q = fam.group().modulus();
  r.n = n, r.s = s, r.T = exact ? std::numeric_limits<double>::infinity() : T;
  r.eta = path.weight().spec;
  r.phi = kernel.spec;
  r.mean = mean.value;
  r.extra["delta_sum"] = ds.value;
  r.extra["rows"] = double(rows.rows().size());
  r.extra["terms"] = double(ds.terms);
  r.extra["zero_height"] = fam.height();
  r.extra["mean_bound"] = mean.bound;

  if (exact) {
    r.value = ds.value;
    r.trunc_error = rows.drop_bound(s) + ds.remainder;
    r.extra["transient"] = 0;
  } else {
    const double m = mean.value;
    auto sr = simpson_doubling(T, qopts, [&](const std::vector<double>& t) {
      auto pv = path.evaluate(t);
      std::vector<std::pair<double, double>> f(t.size());
      for (size_t k = 0; k < t.size(); ++k) {
        double Mz = power_mean(pv[k].zero, n);
        double Mm = power_mean(pv[k].model, n);
        double eps = power_mean_bound(pv[k].zero, n, pv[k].zero_bound) + mean.bound;
        double w = kernel.phi(t[k] / T);
        double d = Mz - m;
        f[k] = {w * (pw(d, s) - pw(Mm - m, s)),
                w * (pw(std::abs(d) + eps, s) - pw(std::abs(d), s))};
      }
      return f;
    });
    const double norm = 1 / (T * kernel.half_integral());
    double transient = sr.value * norm;
    // Pruned rows only: the zero tail is carried by the trajectory bound.
    double prune = std::max(0.0, pw(rows.full_abs(), s) - pw(std::min(rows.kept_abs(), rows.full_abs()), s));
    r.value = ds.value + transient;
    r.quad_error = sr.quad_error * norm;
    r.trunc_error = prune + ds.remainder + sr.error * norm;
    r.extra["transient"] = transient;
    r.extra["step"] = sr.step;
  }
  r.prediction = main_terms(r.q, n, s, path.weight()).moment_prediction;
  r.residual = r.value - r.prediction;
  return r;
}

MainTerms main_terms(int q, int n, int s, const Weight& eta) {
  if (q < 3) throw ValidationError("main terms: q must be >= 3");
  if (n < 2) throw ValidationError("main terms: n must be >= 2");
  if (s < 1) throw ValidationError("main terms: s must be >= 1");
  MainTerms m;
  m.q = q, m.n = n, m.s = s;
  m.phi = double(euler_phi(q));
  SpectralWeight h = spectral(eta);
  m.alpha = h.alpha();
  m.beta = beta_q(h, q, 1e-11).value;
  m.nu = to_double(nu(n));
  m.theta = theta(n, std::max(1, (s - 1) / 2));
  const double L = std::log(double(q));
  m.V_n = m.nu * std::pow(m.alpha * L, n) / std::pow(m.phi, n + 1);
  if (n % 2 == 0)
    m.mean_prediction =
        mu(n).convert_to<double>() * std::pow((m.alpha * L + m.beta) / m.phi, n / 2);
  if (s % 2 == 0) {
    m.moment_prediction = mu(s).convert_to<double>() * std::pow(m.V_n, s / 2);
  } else if (s >= 3) {
    int r = (s - 1) / 2;
    double c = std::tgamma(2.0 * r + 2) / (std::pow(2.0, r) * std::tgamma(double(r)));
    double sign = (n % 2) ? -1.0 : 1.0;
    m.moment_prediction = sign * c * m.theta / std::sqrt(m.phi) * std::pow(m.V_n, 0.5 * s);
  }
  return m;
}

MomentReport moments_a1(double T, int m, const Kernel& kernel, const DeviationPath& path,
                        const QuadratureOptions& qopts) {
  if (m < 1) throw ValidationError("moments_a1: m must be >= 1");
  const auto& res = path.group().coprime_residues();
  size_t one = std::find(res.begin(), res.end(), 1) - res.begin();
  auto sr = simpson_doubling(T, qopts, [&](const std::vector<double>& t) {
    auto pv = path.evaluate(t);
    std::vector<std::pair<double, double>> f(t.size());
    for (size_t k = 0; k < t.size(); ++k) {
      double d = pv[k].hybrid[one], e = pv[k].hybrid_bound;
      double w = kernel.phi(t[k] / T);
      f[k] = {w * pw(d, 2 * m), w * (pw(std::abs(d) + e, 2 * m) - pw(std::abs(d), 2 * m))};
    }
    return f;
  });
  const double norm = 1 / (T * kernel.half_integral());
  MomentReport r;
  r.kind = "moments_a1";
  r.q = path.group().modulus();
  r.n = 2 * m, r.s = 1, r.T = T;
  r.eta = path.weight().spec;
  r.phi = kernel.spec;
  r.value = sr.value * norm;
  r.quad_error = sr.quad_error * norm;
  r.trunc_error = sr.error * norm;
  MainTerms mt = main_terms(r.q, 2 * m, 2, path.weight());
  r.prediction = mt.mean_prediction;
  r.residual = r.value - r.prediction;
  r.extra["ratio"] = r.prediction != 0 ? r.value / r.prediction : 0.0;
  r.extra["step"] = sr.step;
  return r;
}

OmegaReport omega_search(int q, const Weight& eta, const std::vector<double>& x_grid,
                         double epsilon, const std::string& mode, int m, uint64_t X_max,
                         Exec exec) {
  if (q < 3) throw ValidationError("omega search: q must be >= 3");
  if (x_grid.empty()) throw ValidationError("omega search: empty x grid");
  if (m < 1) throw ValidationError("omega search: m must be >= 1");
  if (mode != "m2m" && mode != "raw")
    throw ValidationError("omega search: mode must be m2m or raw");
  std::vector<double> t;
  for (double x : x_grid) {
    if (!(x >= 1)) throw ValidationError("omega search: x must be >= 1");
    t.push_back(std::log(x));
  }
  if (!std::is_sorted(t.begin(), t.end()) || std::adjacent_find(t.begin(), t.end()) != t.end())
    throw ValidationError("omega search: x grid must increase");
  CharacterGroup g(q);
  const double phi = g.phi(), L = std::log(double(q));
  OmegaReport rep;
  rep.q = q, rep.mode = mode, rep.m = m, rep.epsilon = epsilon, rep.grid_size = x_grid.size();
  const bool raw = mode == "raw";
  Weight w = raw ? make_weight("classical") : eta;
  rep.eta = w.spec;
  ProgressionSums::Options po;
  po.X_max = X_max;
  po.exec = exec;
  ProgressionSums ps(q, w, t, po);
  rep.X = ps.limit();
  if (raw) {
    rep.threshold = epsilon;
  } else {
    double alpha = spectral(eta).alpha();
    rep.threshold = (1 - epsilon) * mu(2 * m).convert_to<double>() * std::pow(alpha * L / phi, m);
  }
  const auto& res = g.coprime_residues();
  for (size_t k = 0; k < t.size(); ++k) {
    auto dev = residue_deviations(g, [&](int a) { return ps.class_sum(a, k); });
    double eps = 2 * ps.tail_bound(k);
    if (raw) {
      double norm = std::sqrt(phi / L);
      for (size_t a = 0; a < res.size(); ++a) {
        double v = dev[a] * norm;
        if (std::abs(v) >= rep.threshold) rep.hits.push_back({x_grid[k], v, eps * norm, res[a]});
      }
    } else {
      double M = power_mean(dev, 2 * m);
      if (M >= rep.threshold)
        rep.hits.push_back({x_grid[k], M, power_mean_bound(dev, 2 * m, eps), 0});
    }
  }
  return rep;
}

Histogram distribution_histogram(double x, int q, int bins, Exec exec) {
  if (q < 3) throw ValidationError("histogram: q must be >= 3");
  if (!(x >= 2)) throw ValidationError("histogram: x must be >= 2");
  if (bins < 1) throw ValidationError("histogram: bins must be >= 1");
  CharacterGroup g(q);
  ProgressionSums::Options po;
  po.exec = exec;
  ProgressionSums ps(q, make_weight("classical"), {std::log(x)}, po);
  auto dev = residue_deviations(g, [&](int a) { return ps.class_sum(a, 0); });
  Histogram h;
  h.q = q, h.x = x;
  double norm = std::sqrt(g.phi() / std::log(double(q)));
  double top = 4;
  for (double d : dev) {
    h.values.push_back(d * norm);
    top = std::max(top, std::abs(d * norm));
  }
  for (int b = 0; b <= bins; ++b) h.edges.push_back(-top + 2 * top * b / bins);
  h.counts.assign(bins, 0);
  for (double v : h.values) {
    int b = static_cast<int>((v + top) / (2 * top) * bins);
    h.counts[std::clamp(b, 0, bins - 1)]++;
  }
  for (double V : {0.0, 0.5, 1.0, 1.5, 1.96, 2.5, 3.0}) {
    double c = 0;
    for (double v : h.values) c += v >= V;
    h.tails.push_back({V, c / double(h.values.size()), normal_tail(V)});
  }
  return h;
}

}  // namespace momlab
