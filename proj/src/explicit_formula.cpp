#include "momlab/explicit_formula.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace momlab {

double prime_tail_bound(const Weight& eta, double t, double X) {
  if (X < std::exp(t) * (1 - 1e-12)) return std::numeric_limits<double>::infinity();
  if (eta.kind == WeightKind::classical) return 0.0;
  double r = eta.decay_rate;
  double C = eta.envelope_C * std::abs(eta.scale);
  double lx = std::log(X);
  return kChebyshevC * C * std::exp(r * t + (0.5 - r) * lx) * (1 + 1 / (r - 0.5));
}

namespace {

constexpr double kCSeriesTol = 1e-13;
constexpr uint64_t kCSeriesMax = 20'000'000;

// Smallest N with prime_tail_bound(eta, -t, N) <= kCSeriesTol, capped.
uint64_t cseries_limit(const Weight& eta, double t) {
  double r = eta.decay_rate;
  double B = kChebyshevC * eta.envelope_C * std::abs(eta.scale) * std::exp(-r * t) *
             (1 + 1 / (r - 0.5));
  double N = std::pow(std::max(B, 1e-300) / kCSeriesTol, 1 / (r - 0.5));
  return static_cast<uint64_t>(std::clamp(std::ceil(N), 100.0, double(kCSeriesMax)));
}

void require_table(double x, const LambdaTable& table) {
  if (static_cast<double>(table.limit) < x)
    throw ValidationError("lambda table limit " + std::to_string(table.limit) +
                          " is below x = " + format_double(x, 8));
}

}  // namespace

PsiValue psi_eta_ap(double x, int q, int a, const Weight& eta, const LambdaTable& table) {
  if (q < 1 || std::gcd(q, a) != 1) throw ValidationError("psi_eta_ap: need gcd(a, q) = 1");
  require_table(x, table);
  double t = std::log(x);
  int am = ((a % q) + q) % q;
  CompensatedSum<double> acc;
  for (size_t i = 0; i < table.size(); ++i) {
    if (static_cast<int>(table.n[i] % q) != am) continue;
    double ln = std::log(static_cast<double>(table.n[i]));
    acc.add(table.lambda[i] * std::exp(-0.5 * ln) * eta.eta(ln - t));
  }
  return {acc.value(), prime_tail_bound(eta, t, double(table.limit)), "prime"};
}

PsiValue psi_eta_char(double x, const CharacterGroup& g, int pos, const Weight& eta,
                      const LambdaTable& table, bool primitive) {
  require_table(x, table);
  double t = std::log(x);
  CompensatedSum<cplx> acc;
  for (size_t i = 0; i < table.size(); ++i) {
    int64_t n = static_cast<int64_t>(table.n[i] % uint64_t(g.modulus()));
    cplx c = primitive ? g.primitive_value(pos, static_cast<int64_t>(table.n[i] %
                                                                    uint64_t(g.at(pos).conductor)))
                       : g.value(pos, n);
    if (c == cplx(0, 0)) continue;
    double ln = std::log(static_cast<double>(table.n[i]));
    acc.add(c * (table.lambda[i] * std::exp(-0.5 * ln) * eta.eta(ln - t)));
  }
  return {acc.value(), prime_tail_bound(eta, t, double(table.limit)), "prime"};
}

// ---------------------------------------------------------------------------

ProgressionSums::ProgressionSums(int Q, const Weight& eta, std::vector<double> t_grid,
                                 const Options& opts)
    : Q_(Q), t_(std::move(t_grid)) {
  if (Q < 1) throw ValidationError("ProgressionSums: Q must be >= 1");
  if (t_.empty()) throw ValidationError("ProgressionSums: empty t grid");
  for (size_t k = 1; k < t_.size(); ++k)
    if (!(t_[k] > t_[k - 1])) throw ValidationError("ProgressionSums: t grid must increase");
  const double tmax = t_.back();
  const double xmin = std::max(2.0, std::ceil(std::exp(tmax)));
  if (xmin > double(opts.X_max))
    throw BudgetError("ProgressionSums: e^t = " + format_double(std::exp(tmax), 6) +
                      " exceeds X_max");
  if (opts.X) {
    X_ = std::max<uint64_t>(opts.X, static_cast<uint64_t>(xmin));
  } else if (eta.kind == WeightKind::classical) {
    X_ = static_cast<uint64_t>(xmin);
  } else {
    double r = eta.decay_rate;
    double B = prime_tail_bound(eta, tmax, 1.0 * std::exp(tmax)) *
               std::pow(std::exp(tmax), r - 0.5);
    double X = std::pow(B / opts.tol, 1 / (r - 0.5));
    X = std::clamp(X, xmin, double(opts.X_max));
    X_ = static_cast<uint64_t>(X);
  }
  if (X_ > opts.X_max) throw BudgetError("ProgressionSums: X exceeds X_max");
  if (double(X_) < std::exp(tmax)) X_ = static_cast<uint64_t>(std::ceil(std::exp(tmax)));

  const size_t m = t_.size();
  const int nthreads = max_threads(opts.exec);
  // expK splits as e^{-K|L - t|}; the classical weight is e^{(L - t)/2} for L <= t only.
  const bool classical = eta.kind == WeightKind::classical;
  const bool sep = eta.kind == WeightKind::expK || classical;
  const double K = classical ? 0.5 : eta.K;
  const double W = sep ? 0.0 : eta.support_radius(1e-17 * std::max(std::abs(eta.scale), 1e-300));
  // Per thread: expK keeps (A, B) per bucket; otherwise direct S.
  const size_t width = sep ? 2 * (m + 1) : m;
  std::vector<std::vector<double>> acc(nthreads, std::vector<double>(size_t(Q) * width, 0.0));

  auto add = [&](uint64_t n, double lp, int tid) {
    double L = std::log(static_cast<double>(n));
    double w = lp / std::sqrt(static_cast<double>(n));
    double* row = acc[tid].data() + size_t(n % uint64_t(Q)) * width;
    if (sep) {
      size_t j = std::lower_bound(t_.begin(), t_.end(), L) - t_.begin();
      double e = std::exp(K * L);
      row[2 * j] += w * e;
      if (!classical) row[2 * j + 1] += w / e;
    } else {
      size_t lo = std::lower_bound(t_.begin(), t_.end(), L - W) - t_.begin();
      for (size_t k = lo; k < m && t_[k] <= L + W; ++k) row[k] += w * eta.eta(L - t_[k]);
    }
  };
  for_each_prime_power(X_, add, opts.exec);
  // Per-thread partials: merge in thread order so results do not depend on scheduling.
  for (int i = 1; i < nthreads; ++i)
    for (size_t j = 0; j < acc[0].size(); ++j) acc[0][j] += acc[i][j];

  S_.assign(size_t(Q) * m, 0.0);
  const double sc = eta.scale;
  for (int c = 0; c < Q; ++c) {
    const double* row = acc[0].data() + size_t(c) * width;
    double* out = S_.data() + size_t(c) * m;
    if (!sep) {
      std::copy(row, row + m, out);
      continue;
    }
    // Prime in bucket j lies in (t_{j-1}, t_j]: below t_k for k >= j.
    std::vector<double> suffix(m + 2, 0.0);
    for (size_t j = m + 1; j-- > 0;) suffix[j] = suffix[j + 1] + row[2 * j + 1];
    double prefix = 0;
    for (size_t k = 0; k < m; ++k) {
      prefix += row[2 * k];
      out[k] = sc * (std::exp(-K * t_[k]) * prefix + std::exp(K * t_[k]) * suffix[k + 1]);
    }
  }
  tail_.resize(m);
  for (size_t k = 0; k < m; ++k) tail_[k] = prime_tail_bound(eta, t_[k], double(X_));
}

PsiValue ProgressionSums::psi_char(const CharacterGroup& g, int pos, size_t k,
                                   bool primitive) const {
  if (Q_ % g.modulus()) throw ValidationError("psi_char: modulus must divide Q");
  CompensatedSum<cplx> acc;
  int d = g.at(pos).conductor;
  for (int c = 0; c < Q_; ++c) {
    cplx x = primitive ? g.primitive_value(pos, c % d) : g.value(pos, c);
    if (x == cplx(0, 0)) continue;
    acc.add(x * class_sum(c, k));
  }
  return {acc.value(), tail_[k], "prime"};
}

PsiValue ProgressionSums::psi_ap(int q, int a, size_t k) const {
  if (Q_ % q) throw ValidationError("psi_ap: q must divide Q");
  if (std::gcd(q, a) != 1) throw ValidationError("psi_ap: need gcd(a, q) = 1");
  int am = ((a % q) + q) % q;
  CompensatedSum<double> acc;
  for (int c = am; c < Q_; c += q) acc.add(class_sum(c, k));
  return {acc.value(), tail_[k], "prime"};
}

// ---------------------------------------------------------------------------

cplx log_derivative(const LFunction& f, double s) {
  const double h = 1e-3;
  cplx d = (-f.L(s + 2 * h) + 8.0 * f.L(s + h) - 8.0 * f.L(s - h) + f.L(s - 2 * h)) / (12 * h);
  return -d / f.L(s);
}

ZeroSide::ZeroSide(const CharacterGroup& g, int pos, const Weight& eta, const ZeroStore& store,
                   double T)
    : g_(g), pos_(pos), eta_(eta), T_(T) {
  if (!eta.even) throw ValidationError("zero side needs an even weight");
  const Character& c = g.at(pos);
  if (c.conductor == 1) throw ValidationError("zero side: principal character");
  const ZeroList& z = store.require(g, pos, T);
  const ZeroList& zc = store.require(g, g.conj(pos), T);
  for (double x : z.gamma)
    if (x <= T) gam_.push_back(x);
  for (double x : zc.gamma)
    if (x <= T) gam_.push_back(-x);
  for (double x : gam_) what_.push_back(eta.eta_hat(x / kTwoPi));
  tail_ = zero_tail_bound([&](double u) { return eta.eta_hat_bound(u / kTwoPi); }, c.conductor,
                          T);
  arch_ = std::log(c.conductor / kPi) + digamma(0.25 + 0.5 * c.parity);

  if (eta.kind == WeightKind::expK) {
    LFunction fc(g, g.conj(pos));
    cconst_ = log_derivative(fc, 0.5 + eta.K);
    cconst_err_ = 1e-9 * (1 + std::abs(cconst_));
  } else {
    uint64_t N = cseries_limit(eta, 0.0);
    LambdaTable tab = sieve_lambda(N);
    std::vector<double> lam;
    for (size_t i = 0; i < tab.size(); ++i) {
      cplx x = std::conj(g.primitive_value(pos, static_cast<int64_t>(tab.n[i] % c.conductor)));
      if (x == cplx(0, 0)) continue;
      double ln = std::log(static_cast<double>(tab.n[i]));
      cseries_.push_back({ln, x * (tab.lambda[i] * std::exp(-0.5 * ln))});
    }
    cconst_err_ = prime_tail_bound(eta, 0.0, double(N));
  }

  // Prime powers of p | q, p not dividing the conductor.
  for (auto [p, e] : factorize(g.modulus())) {
    (void)e;
    if (c.conductor % p == 0) continue;
    double lp = std::log(double(p));
    int64_t pk = 1;
    for (int k = 1; k < 200; ++k) {
      pk = (pk * p) % c.conductor;
      double mag = lp * std::exp(-0.5 * k * lp);
      if (mag < 1e-18) break;
      cplx x = g.primitive_value(pos, pk);
      ram_.push_back({k * lp, x * mag});
    }
  }
}

cplx ZeroSide::zero_sum(double t) const {
  CompensatedSum<cplx> acc;
  for (size_t i = 0; i < gam_.size(); ++i) acc.add(std::polar(what_[i], gam_[i] * t));
  return acc.value();
}

Correction ZeroSide::correction(double t) const {
  Correction c;
  const int a = g_.at(pos_).parity;
  c.A = arch_ * eta_.eta(t);
  if (eta_.kind == WeightKind::expK) {
    double f = eta_.scale * std::exp(-eta_.K * t);
    c.C = f * cconst_;
    c.error += std::abs(f) * cconst_err_;
  } else {
    // Terms beyond n_t are covered by the prime tail bound at -t.
    uint64_t nt = std::max<uint64_t>(2, cseries_limit(eta_, t));
    double lt = std::log(double(nt));
    CompensatedSum<cplx> acc;
    for (auto& [ln, x] : cseries_) {
      if (ln > lt) break;
      acc.add(x * eta_.eta(t + ln));
    }
    c.C = acc.value();
    c.error += lt >= cseries_.back().first ? cconst_err_ : prime_tail_bound(eta_, -t, double(nt));
  }
  double e0 = eta_.eta(t);
  auto g = [&](double x) { return 2 * e0 - eta_.eta(x + t) - eta_.eta(t - x); };
  Integral in = archimedean_integral(g, 0.5 + a, 2.0, 4 * std::abs(eta_.eta(0.0)), {t}, 1e-11);
  c.I = in.value;
  c.error += in.error;
  for (auto& [kl, x] : ram_) c.R += x * eta_.eta(kl - t);
  return c;
}

PsiValue ZeroSide::psi(double t) const {
  Correction c = correction(t);
  return {-zero_sum(t) + c.total(), tail_ + c.error, "zero"};
}

PsiValue psi_eta_zero_side(double x, const CharacterGroup& g, int pos, const Weight& eta,
                           const ZeroStore& store, double T) {
  if (!(x > 0)) throw ValidationError("psi_eta_zero_side: x must be positive");
  return ZeroSide(g, pos, eta, store, T).psi(std::log(x));
}

cplx ramified_diff(double x, const CharacterGroup& g, int pos, const Weight& eta) {
  const Character& c = g.at(pos);
  double t = std::log(x);
  cplx r = 0;
  for (auto [p, e] : factorize(g.modulus())) {
    (void)e;
    if (c.conductor % p == 0) continue;
    double lp = std::log(double(p));
    int64_t pk = 1;
    for (int k = 1; k < 400; ++k) {
      pk = (pk * p) % c.conductor;
      double mag = lp * std::exp(-0.5 * k * lp);
      if (mag < 1e-18) break;
      r -= g.primitive_value(pos, pk) * mag * eta.eta(k * lp - t);
    }
  }
  return r;
}

WeilResidual weil_residual(double x, const CharacterGroup& g, int pos, const Weight& eta,
                           const ZeroStore& store, double T, const LambdaTable& table) {
  ZeroSide zs(g, pos, eta, store, T);
  double t = std::log(x);
  require_table(x, table);
  const Character& c = g.at(pos);
  CompensatedSum<cplx> ps;
  for (size_t i = 0; i < table.size(); ++i) {
    cplx v = g.primitive_value(pos, static_cast<int64_t>(table.n[i] % c.conductor));
    if (v == cplx(0, 0)) continue;
    double ln = std::log(static_cast<double>(table.n[i]));
    double w = table.lambda[i] * std::exp(-0.5 * ln);
    ps.add(w * (v * eta.eta(ln - t) + std::conj(v) * eta.eta(t + ln)));
  }
  Correction corr = zs.correction(t);
  WeilResidual r;
  r.zero_side = zs.zero_sum(t);
  r.prime_side = corr.A - ps.value() + corr.I;
  r.residual = std::abs(r.zero_side - r.prime_side);
  double L = double(table.limit);
  r.bound = zs.zero_tail() + prime_tail_bound(eta, t, L) + prime_tail_bound(eta, -t, L) +
            corr.error;
  return r;
}

}  // namespace momlab
