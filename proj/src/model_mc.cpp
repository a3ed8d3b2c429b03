#include "momlab/model_mc.hpp"

#include <algorithm>
#include <cmath>

namespace momlab {

Philox4x32::Counter Philox4x32::block(Counter c, Key k) {
  constexpr uint32_t M0 = 0xD2511F53, M1 = 0xCD9E8D57;
  constexpr uint32_t W0 = 0x9E3779B9, W1 = 0xBB67AE85;
  for (int r = 0; r < 10; ++r) {
    if (r) k[0] += W0, k[1] += W1;
    uint64_t p0 = uint64_t(M0) * c[0], p1 = uint64_t(M1) * c[2];
    c = {uint32_t(p1 >> 32) ^ c[1] ^ k[0], uint32_t(p1), uint32_t(p0 >> 32) ^ c[3] ^ k[1],
         uint32_t(p0)};
  }
  return c;
}

PhiloxStream::PhiloxStream(uint64_t seed, uint64_t stream)
    : key_{uint32_t(seed), uint32_t(seed >> 32)},
      ctr_{0, uint32_t(stream), uint32_t(stream >> 32), 0} {}

uint32_t PhiloxStream::next32() {
  if (used_ == 4) {
    buf_ = Philox4x32::block(ctr_, key_);
    if (++ctr_[0] == 0) ++ctr_[3];
    used_ = 0;
  }
  return buf_[used_++];
}

double PhiloxStream::uniform() {
  uint64_t a = next32() >> 5, b = next32() >> 6;
  return double(a * 67108864ull + b) * 0x1.0p-53;
}

ModelMode parse_model_mode(const std::string& s) {
  if (s == "li" || s == "LI") return ModelMode::li;
  if (s == "time" || s == "time-average") return ModelMode::time;
  throw ValidationError("unknown model mode '" + s + "' (expected li or time)");
}

std::string to_string(ModelMode m) { return m == ModelMode::li ? "li" : "time"; }

size_t orbit_count(const ZeroFamily& fam) {
  int32_t top = 0;
  for (int c = 0; c < fam.group().phi(); ++c)
    if (c != fam.group().principal())
      for (const SignedZero& z : fam.zeros(c)) top = std::max(top, std::abs(z.id));
  return size_t(top);
}

std::vector<cplx> model_w_li(const ZeroFamily& fam, const std::vector<double>& angle) {
  const CharacterGroup& g = fam.group();
  std::vector<cplx> W(g.phi(), 0.0);
  for (int c = 0; c < g.phi(); ++c) {
    if (c == g.principal()) continue;
    CompensatedSum<cplx> acc;
    for (const SignedZero& z : fam.zeros(c)) {
      double th = angle.at(size_t(std::abs(z.id)) - 1);
      acc.add(z.what * std::polar(1.0, z.id > 0 ? th : -th));
    }
    W[c] = -acc.value();
  }
  return W;
}

std::vector<cplx> model_w_time(const ZeroFamily& fam, double X) {
  const CharacterGroup& g = fam.group();
  std::vector<cplx> W(g.phi(), 0.0);
  for (int c = 0; c < g.phi(); ++c) {
    if (c == g.principal()) continue;
    CompensatedSum<cplx> acc;
    for (const SignedZero& z : fam.zeros(c)) acc.add(z.what * std::polar(1.0, z.gamma * X));
    W[c] = -acc.value();
  }
  return W;
}

cplx h_orthogonal(const CharacterGroup& g, const std::vector<cplx>& W, int n) {
  const double phi = g.phi();
  CompensatedSum<cplx> acc;
  for (int a : g.coprime_residues()) {
    cplx d = 0;
    for (int c = 0; c < g.phi(); ++c)
      if (c != g.principal()) d += std::conj(g.value(c, a)) * W[c];
    acc.add(std::pow(d / phi, n));
  }
  return acc.value() / phi;
}

cplx h_direct(const CharacterGroup& g, const std::vector<cplx>& W, int n) {
  CompensatedSum<cplx> acc;
  for_each_tuple(g, n, [&](const std::vector<int>& tup) {
    cplx p = 1;
    for (int c : tup) p *= W[c];
    acc.add(p);
  });
  return acc.value() * std::pow(double(g.phi()), -n);
}

SampleBatch sample_H(const ZeroFamily& fam, int n, ModelMode mode, uint64_t seed,
                     uint64_t count, double time_max, double budget, Exec exec) {
  if (n < 2) throw ValidationError("sample_H: n must be >= 2");
  if (count == 0) throw ValidationError("sample_H: count must be positive");
  if (mode == ModelMode::time && !(time_max > 0))
    throw ValidationError("sample_H: time_max must be positive");
  const CharacterGroup& g = fam.group();
  size_t zeros = 0;
  for (int c = 0; c < g.phi(); ++c)
    if (c != g.principal()) zeros += fam.zeros(c).size();
  if (double(count) * double(zeros + g.phi()) * g.phi() > budget)
    throw BudgetError("sample_H: " + std::to_string(count) + " samples exceed the budget");
  const size_t orbits = orbit_count(fam);

  SampleBatch b;
  b.seed = seed, b.mode = mode, b.q = g.modulus(), b.n = n;
  b.time_max = mode == ModelMode::time ? time_max : 0;
  b.values.resize(count);
  std::vector<double> imag(count);
#pragma omp parallel for schedule(dynamic, 64) if (exec == Exec::parallel)
  for (uint64_t i = 0; i < count; ++i) {
    PhiloxStream rng(seed, i);
    std::vector<cplx> W;
    if (mode == ModelMode::li) {
      std::vector<double> angle(orbits);
      for (double& a : angle) a = kTwoPi * rng.uniform();
      W = model_w_li(fam, angle);
    } else {
      W = model_w_time(fam, time_max * rng.uniform());
    }
    cplx h = h_orthogonal(g, W, n);
    b.values[i] = h.real();
    imag[i] = std::abs(h.imag());
  }
  for (double v : imag) b.max_imag = std::max(b.max_imag, v);
  return b;
}

SumWithBound model_mean_exact(const ZeroFamily& fam, const Weight& eta) {
  const CharacterGroup& g = fam.group();
  CompensatedSum<double> acc;
  double tail = 0;
  for (int c = 0; c < g.phi(); ++c) {
    if (c == g.principal()) continue;
    for (const SignedZero& z : fam.zeros(c)) acc.add(z.what * z.what);
    tail += zero_tail_bound(
        [&](double u) {
          double v = eta.eta_hat_bound(u / kTwoPi);
          return v * v;
        },
        g.at(c).conductor, fam.height());
  }
  double p2 = double(g.phi()) * g.phi();
  return {acc.value() / p2, tail / p2};
}

namespace {

double centered_moment(const std::vector<double>& v, int s) {
  CompensatedSum<double> m;
  for (double x : v) m.add(x);
  double mean = m.value() / double(v.size());
  CompensatedSum<double> acc;
  for (double x : v) acc.add(std::pow(x - mean, s));
  return acc.value() / double(v.size());
}

}  // namespace

MomentsRecord estimate_moments(const std::vector<double>& values, const std::vector<int>& s_list,
                               int bootstrap, uint64_t seed,
                               const std::function<double(int)>& prediction) {
  if (values.empty()) throw ValidationError("estimate_moments: empty batch");
  const size_t N = values.size();
  MomentsRecord r;
  r.count = N;
  CompensatedSum<double> m;
  for (double x : values) m.add(x);
  r.mean = m.value() / double(N);
  double var = centered_moment(values, 2);
  r.mean_se = N > 1 ? std::sqrt(var * double(N) / double(N - 1) / double(N)) : 0.0;

  // Bootstrap resamples share one draw per (replicate, index).
  std::vector<std::vector<double>> boot(s_list.size());
  std::vector<double> re(N);
  for (int rep = 0; rep < bootstrap; ++rep) {
    PhiloxStream rng(seed ^ 0x9E3779B97F4A7C15ull, uint64_t(rep));
    for (size_t i = 0; i < N; ++i) re[i] = values[size_t(rng.uniform() * double(N)) % N];
    for (size_t k = 0; k < s_list.size(); ++k) boot[k].push_back(centered_moment(re, s_list[k]));
  }
  for (size_t k = 0; k < s_list.size(); ++k) {
    int s = s_list[k];
    if (s < 1) throw ValidationError("estimate_moments: s must be >= 1");
    MomentEstimate e;
    e.s = s;
    e.value = centered_moment(values, s);
    if (bootstrap > 1) e.std_error = std::sqrt(centered_moment(boot[k], 2) * bootstrap / (bootstrap - 1.0));
    if (prediction) e.prediction = prediction(s);
    r.moments.push_back(e);
  }
  return r;
}

TimeSeries time_average_mode(const ZeroFamily& fam, const Weight& eta, int n,
                             const std::vector<double>& grid, Exec exec) {
  if (n < 2) throw ValidationError("time average: n must be >= 2");
  if (grid.size() < 2) throw ValidationError("time average: grid needs two points");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw ValidationError("time average: grid must increase");
  TimeSeries ts;
  ts.t = grid;
  ts.H.resize(grid.size());
  std::vector<double> imag(grid.size());
#pragma omp parallel for schedule(dynamic, 64) if (exec == Exec::parallel)
  for (size_t k = 0; k < grid.size(); ++k) {
    cplx h = h_orthogonal(fam.group(), model_w_time(fam, grid[k]), n);
    ts.H[k] = h.real();
    imag[k] = std::abs(h.imag());
  }
  for (double v : imag) ts.max_imag = std::max(ts.max_imag, v);
  CompensatedSum<double> acc;
  for (size_t k = 0; k + 1 < grid.size(); ++k)
    acc.add(0.5 * (ts.H[k] + ts.H[k + 1]) * (grid[k + 1] - grid[k]));
  ts.average = acc.value() / (grid.back() - grid.front());
  ts.exact_mean = model_mean_exact(fam, eta);
  return ts;
}

}  // namespace momlab
