#include "momlab/zeros.hpp"

#include <omp.h>

#include <algorithm>
#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace momlab {

namespace fs = std::filesystem;

size_t ZeroList::count_upto(double T) const {
  return std::upper_bound(gamma.begin(), gamma.end(), T) - gamma.begin();
}

double rvm_main(int q_chi, double T) {
  if (T <= 0) return 0.0;
  return T / kPi * std::log(q_chi * T / (kTwoPi * std::exp(1.0)));
}

double rvm_tolerance(int q_chi, double T) { return 2 * std::log(q_chi * (T + 2)) + 5; }

CountCheck count_check(int q_chi, const ZeroList& chi, const ZeroList& conj, double T) {
  CountCheck c;
  c.T = T;
  c.count = static_cast<long>(chi.count_upto(T) + conj.count_upto(T));
  c.expected = rvm_main(q_chi, T);
  c.tolerance = rvm_tolerance(q_chi, T);
  c.pass = std::abs(c.count - c.expected) <= c.tolerance;
  return c;
}

int conj_conrey(int q, int conrey) {
  if (q == 1) return 1;
  for (int x = 1; x < q; ++x)
    if (int64_t(x) * conrey % q == 1 % q) return x;
  throw ValidationError("conrey label " + std::to_string(conrey) + " is not a unit mod " +
                        std::to_string(q));
}

// ---------------------------------------------------------------------------
// Store

void ZeroStore::insert(ZeroList list) {
  for (size_t i = 0; i < list.gamma.size(); ++i) {
    if (!(list.gamma[i] > 0) || !std::isfinite(list.gamma[i]))
      throw ValidationError("zero list q=" + std::to_string(list.q) + " conrey=" +
                            std::to_string(list.conrey) + ": heights must be positive");
    if (i > 0 && !(list.gamma[i] > list.gamma[i - 1]))
      throw ValidationError("zero list q=" + std::to_string(list.q) + " conrey=" +
                            std::to_string(list.conrey) + ": heights must increase strictly");
  }
  auto key = std::make_pair(list.q, list.conrey);
  lists_[key] = std::move(list);
}

const ZeroList* ZeroStore::find(int q, int conrey) const {
  auto it = lists_.find({q, conrey});
  return it == lists_.end() ? nullptr : &it->second;
}

const ZeroList* ZeroStore::find_for(const CharacterGroup& g, int pos) const {
  const Character& c = g.at(pos);
  if (const ZeroList* z = find(c.conductor, c.primitive_conrey)) return z;
  return find(g.modulus(), c.conrey);
}

const ZeroList& ZeroStore::require(const CharacterGroup& g, int pos, double T) const {
  const Character& c = g.at(pos);
  if (c.conductor == 1) throw ValidationError("zeros requested for the principal character");
  const ZeroList* z = find_for(g, pos);
  if (!z)
    throw ValidationError("no zeros for character " + std::to_string(g.modulus()) + "." +
                          std::to_string(c.conrey));
  if (z->T_cert < T)
    throw ValidationError("zeros for " + std::to_string(z->q) + "." + std::to_string(z->conrey) +
                          " certified to " + format_double(z->T_cert, 6) + " < " +
                          format_double(T, 6));
  return *z;
}

std::vector<const ZeroList*> ZeroStore::lists() const {
  std::vector<const ZeroList*> out;
  for (auto& [k, v] : lists_) out.push_back(&v);
  return out;
}

std::vector<std::string> ZeroStore::certify() {
  std::vector<std::string> warnings;
  for (auto& [key, list] : lists_) {
    auto [q, c] = key;
    int cc = conj_conrey(q, c);
    const ZeroList* other = find(q, cc);
    if (!other) {
      list.T_cert = 0;
      warnings.push_back("q=" + std::to_string(q) + " conrey=" + std::to_string(c) +
                         ": conjugate list missing, not certified");
      continue;
    }
    CharacterGroup g(q);
    int qc = g.at(g.position(c)).conductor;
    double limit = std::min(list.gamma.empty() ? 0.0 : list.gamma.back(),
                            other->gamma.empty() ? 0.0 : other->gamma.back());
    limit = std::max({limit, std::min(list.T_cert, other->T_cert)});
    std::vector<double> cand;
    for (double x : list.gamma)
      if (x <= limit) cand.push_back(x);
    for (double x : other->gamma)
      if (x <= limit) cand.push_back(x);
    cand.push_back(limit);
    std::sort(cand.begin(), cand.end());
    double best = 0;
    for (double T : cand)
      if (T > 0 && count_check(qc, list, *other, T).pass) best = T;
    if (best < limit)
      warnings.push_back("q=" + std::to_string(q) + " conrey=" + std::to_string(c) +
                         ": count check fails above T=" + format_double(best, 8));
    list.T_cert = best;
  }
  return warnings;
}

// ---------------------------------------------------------------------------
// TSV

ZeroStore parse_zeros(std::istream& in, const std::string& name,
                      std::vector<std::string>* warnings) {
  ZeroStore store;
  std::string line;
  long lineno = 0;
  auto fail = [&](const std::string& why) {
    throw ValidationError(name + ":" + std::to_string(lineno) + ": " + why);
  };
  std::map<std::pair<int, int>, ZeroList> lists;
  std::pair<int, int> last{-1, -1};
  double last_gamma = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "q\tconrey\tgamma") fail("expected header 'q<TAB>conrey<TAB>gamma'");
      header = true;
      continue;
    }
    std::istringstream ss(line);
    std::string fq, fc, fg, extra;
    if (!std::getline(ss, fq, '\t') || !std::getline(ss, fc, '\t') || !std::getline(ss, fg, '\t'))
      fail("expected three tab-separated fields");
    if (std::getline(ss, extra, '\t')) fail("too many fields");
    int q = 0, c = 0;
    double gm = 0;
    try {
      size_t p1, p2, p3;
      q = std::stoi(fq, &p1);
      c = std::stoi(fc, &p2);
      gm = std::stod(fg, &p3);
      if (p1 != fq.size() || p2 != fc.size() || p3 != fg.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      fail("malformed number");
    }
    if (q < 3 || c < 1 || c >= q || std::gcd(q, c) != 1) fail("invalid (q, conrey)");
    if (!(gm > 0) || !std::isfinite(gm)) fail("gamma must be a positive finite height");
    auto key = std::make_pair(q, c);
    if (key < last) fail("rows not sorted by (q, conrey)");
    if (key == last && !(gm > last_gamma)) fail("heights not strictly increasing");
    last = key;
    last_gamma = gm;
    ZeroList& zl = lists[key];
    zl.q = q;
    zl.conrey = c;
    zl.provenance = "ingested";
    zl.gamma.push_back(gm);
  }
  for (auto& [k, v] : lists) store.insert(std::move(v));
  auto w = store.certify();
  if (warnings) warnings->insert(warnings->end(), w.begin(), w.end());
  return store;
}

ZeroStore load_zeros(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open zeros file '" + path + "'");
  return parse_zeros(in, path, warnings);
}

std::string zeros_tsv(const std::vector<const ZeroList*>& lists) {
  std::vector<const ZeroList*> sorted = lists;
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) {
    return std::make_pair(a->q, a->conrey) < std::make_pair(b->q, b->conrey);
  });
  std::string out = "q\tconrey\tgamma\n";
  char buf[96];
  for (const ZeroList* z : sorted)
    for (double g : z->gamma) {
      std::snprintf(buf, sizeof buf, "%d\t%d\t%.15g\n", z->q, z->conrey, g);
      out += buf;
    }
  return out;
}

void write_zeros(const std::string& path, const std::vector<const ZeroList*>& lists) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write zeros file '" + path + "'");
  out << zeros_tsv(lists);
  if (!out) throw IoError("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// L-functions

namespace {

constexpr int kEulerMaclaurinTerms = 20;

const std::vector<double>& bernoulli_over_factorial() {
  static const std::vector<double> c = [] {
    std::vector<double> v(kEulerMaclaurinTerms + 1, 0.0);
    double fact = 1;
    for (int j = 1; j <= kEulerMaclaurinTerms; ++j) {
      fact *= (2.0 * j - 1) * (2.0 * j);
      v[j] = boost::math::bernoulli_b2n<double>(j) / fact;
    }
    return v;
  }();
  return c;
}

}  // namespace

LFunction::LFunction(const CharacterGroup& g, int pos) {
  const Character& c = g.at(pos);
  if (c.conductor == 1) throw ValidationError("L-function of the principal character");
  q_ = c.conductor;
  conrey_ = c.primitive_conrey;
  a_ = c.parity;
  CharacterGroup gp(q_);
  int p = gp.position(conrey_);
  chi_.resize(q_);
  cplx tau = 0;
  for (int m = 0; m < q_; ++m) {
    chi_[m] = gp.value(p, m);
    tau += chi_[m] * std::polar(1.0, kTwoPi * m / q_);
  }
  cplx ia = a_ ? cplx(0, 1) : cplx(1, 0);
  eps_ = tau / (ia * std::sqrt(double(q_)));
}

cplx LFunction::L(cplx s) const {
  const int N = 20 + static_cast<int>(std::ceil(std::abs(s.imag()) / kPi));
  const auto& bc = bernoulli_over_factorial();
  CompensatedSum<cplx> acc;
  const int64_t direct = int64_t(q_) * N;
  for (int64_t n = 1; n <= direct; ++n) {
    const cplx& x = chi_[n % q_];
    if (x == cplx(0, 0)) continue;
    acc.add(x * std::exp(-s * std::log(double(n))));
  }
  cplx qs = std::exp(-s * std::log(double(q_)));
  for (int a = 1; a <= q_; ++a) {
    const cplx& x = chi_[a % q_];
    if (x == cplx(0, 0)) continue;
    double w = N + double(a) / q_;
    double lw = std::log(w);
    cplx ws = std::exp(-s * lw);  // w^{-s}
    cplx tail = ws * w / (s - 1.0) + 0.5 * ws;
    cplx poch = s;
    cplx pw = ws / w;  // w^{-s-1}
    double w2 = 1.0 / (w * w);
    for (int j = 1; j <= kEulerMaclaurinTerms; ++j) {
      tail += bc[j] * poch * pw;
      poch *= (s + double(2 * j - 1)) * (s + double(2 * j));
      pw *= w2;
    }
    acc.add(x * qs * tail);
  }
  return acc.value();
}

double LFunction::theta(double t) const {
  cplx lg = lgamma_complex(cplx(0.25 + 0.5 * a_, 0.5 * t));
  return 0.5 * t * std::log(q_ / kPi) + lg.imag() - 0.5 * std::arg(eps_);
}

cplx LFunction::rotated(double t) const {
  return std::polar(1.0, theta(t)) * L(cplx(0.5, t));
}

double LFunction::Z(double t) const { return rotated(t).real(); }

// ---------------------------------------------------------------------------
// Zero search

namespace {

double zero_density(int q, double t) {
  return std::max(1.0, std::log(q * std::max(t, 1.0) / kTwoPi)) / kTwoPi;
}

int sgn(double x) { return (x > 0) - (x < 0); }

std::vector<double> scan_zeros(const LFunction& f, double T, int steps, double tol) {
  std::vector<double> ts, zs;
  double t = 0;
  while (true) {
    ts.push_back(t);
    zs.push_back(f.Z(t));
    if (t >= T) break;
    t = std::min(T, t + 1.0 / (steps * zero_density(f.conductor(), t)));
  }
  auto Zf = [&](double x) { return f.Z(x); };
  auto done = [tol](double a, double b) { return std::abs(b - a) < tol; };
  std::vector<double> roots;
  auto bracket = [&](double a, double b, double za, double zb) {
    boost::uintmax_t it = 100;
    auto r = boost::math::tools::toms748_solve(Zf, a, b, za, zb, done, it);
    roots.push_back(0.5 * (r.first + r.second));
  };
  const size_t n = ts.size();
  for (size_t i = 0; i + 1 < n; ++i) {
    if (zs[i] == 0.0) {
      if (ts[i] > 0) roots.push_back(ts[i]);
      continue;
    }
    if (sgn(zs[i]) * sgn(zs[i + 1]) < 0) bracket(ts[i], ts[i + 1], zs[i], zs[i + 1]);
  }
  // A dip of |Z| without a sign change can hide two close zeros.
  for (size_t i = 1; i + 1 < n; ++i) {
    int s = sgn(zs[i]);
    if (s == 0 || sgn(zs[i - 1]) != s || sgn(zs[i + 1]) != s) continue;
    if (!(std::abs(zs[i]) < std::abs(zs[i - 1]) && std::abs(zs[i]) < std::abs(zs[i + 1])))
      continue;
    auto g = [&](double x) { return s * f.Z(x); };
    boost::uintmax_t it = 60;
    auto m = boost::math::tools::brent_find_minima(g, ts[i - 1], ts[i + 1], 40, it);
    if (m.second < 0) {
      double zm = f.Z(m.first);
      bracket(ts[i - 1], m.first, zs[i - 1], zm);
      bracket(m.first, ts[i + 1], zm, zs[i + 1]);
    }
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots)
    if (r > 0 && r <= T && (out.empty() || r - out.back() > 10 * tol)) out.push_back(r);
  return out;
}

std::string suspect_interval(const ZeroList& a, const ZeroList& b, int q) {
  std::vector<double> all = a.gamma;
  all.insert(all.end(), b.gamma.begin(), b.gamma.end());
  std::sort(all.begin(), all.end());
  double worst = 0, lo = 0, hi = 0, prev = 0;
  for (double g : all) {
    double gap = (g - prev) * 2 * zero_density(q, g);
    if (gap > worst) {
      worst = gap;
      lo = prev;
      hi = g;
    }
    prev = g;
  }
  return "[" + format_double(lo, 10) + ", " + format_double(hi, 10) + "]";
}

}  // namespace

ZeroPair compute_zero_pair(int q, int conrey, double T, const ZeroEngineOptions& opts) {
  if (q < 3 || q > 100) throw ValidationError("compute_zeros: need 3 <= q <= 100");
  if (!(T >= 0) || T > 500) throw ValidationError("compute_zeros: need 0 <= T <= 500");
  CharacterGroup g(q);
  int pos = g.position(conrey);
  if (pos < 0) throw ValidationError("compute_zeros: invalid conrey label");
  if (g.at(pos).conductor == 1) throw ValidationError("compute_zeros: principal character");
  LFunction f(g, pos);
  int qc = f.conductor();
  CharacterGroup gp(qc);
  int cconj = conj_conrey(qc, f.conrey());
  bool real = cconj == f.conrey();
  LFunction fc(gp, gp.position(cconj));

  ZeroPair out;
  for (int r = 0; r <= opts.max_refine; ++r) {
    int steps = opts.steps_per_spacing << r;
    out.chi = ZeroList{qc, f.conrey(), scan_zeros(f, T, steps, opts.bisect_tol), "computed", T};
    out.conj = real ? out.chi
                    : ZeroList{qc, cconj, scan_zeros(fc, T, steps, opts.bisect_tol), "computed", T};
    out.refinements = r;
    out.check = count_check(qc, out.chi, out.conj, T);
    if (out.check.pass) return out;
  }
  throw BudgetError("zero count check failed for " + std::to_string(qc) + "." +
                    std::to_string(f.conrey()) + " at T=" + format_double(T, 6) + ": found " +
                    std::to_string(out.check.count) + ", expected " +
                    format_double(out.check.expected, 6) + " +- " +
                    format_double(out.check.tolerance, 4) + "; suspect interval " +
                    suspect_interval(out.chi, out.conj, qc));
}

std::vector<double> compute_zeros(int q, int conrey, double T, const ZeroEngineOptions& opts) {
  return compute_zero_pair(q, conrey, T, opts).chi.gamma;
}

// ---------------------------------------------------------------------------
// Cache

uint64_t fnv1a(const std::string& bytes) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string default_cache_root() {
  const char* env = std::getenv("MOMLAB_CACHE");
  return env && *env ? env : "cache";
}

std::string cache_path(const std::string& root, int q, int conrey) {
  return (fs::path(root) / "zeros" / ("q=" + std::to_string(q)) /
          ("chi=" + std::to_string(conrey) + ".tsv"))
      .string();
}

static std::string hex64(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool cache_load(const std::string& root, int q, int conrey, ZeroList& out) {
  std::string path = cache_path(root, q, conrey);
  std::ifstream in(path, std::ios::binary);
  std::ifstream mi(path + ".meta.json");
  if (!in || !mi) return false;
  std::stringstream buf;
  buf << in.rdbuf();
  std::string bytes = buf.str();
  nlohmann::json meta;
  try {
    mi >> meta;
    if (meta.at("hash").get<std::string>() != hex64(fnv1a(bytes))) return false;
    std::istringstream is(bytes);
    ZeroStore s = parse_zeros(is, path, nullptr);
    const ZeroList* z = s.find(q, conrey);
    out = z ? *z : ZeroList{q, conrey, {}, "", 0};
    out.provenance = meta.at("provenance").get<std::string>();
    out.T_cert = meta.at("T_cert").get<double>();
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

void cache_store(const std::string& root, const ZeroList& list) {
  std::string path = cache_path(root, list.q, list.conrey);
  std::error_code ec;
  fs::create_directories(fs::path(path).parent_path(), ec);
  if (ec) throw IoError("cannot create cache directory for '" + path + "': " + ec.message());
  std::string bytes = zeros_tsv({&list});
  nlohmann::json meta = {{"q", list.q},
                         {"conrey", list.conrey},
                         {"T_cert", list.T_cert},
                         {"provenance", list.provenance},
                         {"count", list.gamma.size()},
                         {"hash", hex64(fnv1a(bytes))},
                         {"engine",
                          {{"euler_maclaurin_terms", kEulerMaclaurinTerms},
                           {"hurwitz_shift", "20 + ceil(|t|/pi)"},
                           {"bisect_tol", 1e-9}}}};
  // Write-then-rename keeps readers from seeing partial files.
  std::string tmp = path + ".tmp" + std::to_string(omp_get_thread_num());
  {
    std::ofstream o(tmp, std::ios::binary);
    o << bytes;
    if (!o) throw IoError("cannot write '" + tmp + "'");
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp + "': " + ec.message());
  {
    std::ofstream o(tmp, std::ios::binary);
    o << meta.dump(2) << "\n";
    if (!o) throw IoError("cannot write '" + tmp + "'");
  }
  fs::rename(tmp, path + ".meta.json", ec);
  if (ec) throw IoError("cannot rename '" + tmp + "': " + ec.message());
}

void ensure_zeros(ZeroStore& store, const CharacterGroup& g, const std::vector<int>& positions,
                  double T, const std::string& cache_root, const ZeroEngineOptions& opts) {
  // Distinct primitive pairs {chi*, conj chi*} that are not yet certified.
  std::set<std::pair<int, int>> todo;
  for (int pos : positions) {
    const Character& c = g.at(pos);
    if (c.conductor == 1) continue;
    int q = c.conductor, a = c.primitive_conrey, b = conj_conrey(q, a);
    auto ok = [&](int x) {
      const ZeroList* z = store.find(q, x);
      return z && z->T_cert >= T;
    };
    if (ok(a) && ok(b)) continue;
    if (!cache_root.empty()) {
      ZeroList za, zb;
      if (cache_load(cache_root, q, a, za) && cache_load(cache_root, q, b, zb) &&
          za.T_cert >= T && zb.T_cert >= T && count_check(q, za, zb, za.T_cert).pass) {
        store.insert(za);
        store.insert(zb);
        continue;
      }
    }
    todo.insert({q, std::min(a, b)});
  }
  std::vector<std::pair<int, int>> work(todo.begin(), todo.end());
  std::vector<ZeroPair> results(work.size());
  std::string err;
  int err_kind = 0;
#pragma omp parallel for schedule(dynamic, 1) if (opts.exec == Exec::parallel)
  for (long i = 0; i < static_cast<long>(work.size()); ++i) {
    try {
      results[i] = compute_zero_pair(work[i].first, work[i].second, T, opts);
    } catch (const BudgetError& e) {
#pragma omp critical
      {
        err = e.what();
        err_kind = 2;
      }
    } catch (const std::exception& e) {
#pragma omp critical
      {
        err = e.what();
        err_kind = 1;
      }
    }
  }
  if (err_kind == 2) throw BudgetError(err);
  if (err_kind == 1) throw ValidationError(err);
  for (auto& r : results) {
    if (!cache_root.empty()) {
      cache_store(cache_root, r.chi);
      if (r.conj.conrey != r.chi.conrey) cache_store(cache_root, r.conj);
    }
    store.insert(r.chi);
    store.insert(r.conj);
  }
}

void ensure_all_zeros(ZeroStore& store, const CharacterGroup& g, double T,
                      const std::string& cache_root, const ZeroEngineOptions& opts) {
  std::vector<int> all(g.phi());
  for (int i = 0; i < g.phi(); ++i) all[i] = i;
  ensure_zeros(store, g, all, T, cache_root, opts);
}

// ---------------------------------------------------------------------------
// Sums over zeros

double zero_tail_bound(const std::function<double(double)>& f, int q_chi, double T) {
  T = std::max(T, 1.0);
  double fT = f(T);
  if (fT == 0) return 0.0;
  auto dens = [&](double u) {
    return f(u) * (std::max(0.0, std::log(q_chi * u / kTwoPi)) / kPi + 2 / (u + 2));
  };
  Integral in = integrate(dens, T, std::numeric_limits<double>::infinity(), 1e-12);
  return in.value + in.error + 2 * rvm_tolerance(q_chi, T) * fT;
}

SumWithBound b_chi(const ZeroStore& store, const CharacterGroup& g, int pos,
                   const SpectralWeight& h, double T) {
  const ZeroList& z = store.require(g, pos, T);
  const ZeroList& zc = store.require(g, g.conj(pos), T);
  CompensatedSum<double> acc;
  for (const ZeroList* l : {&z, &zc})
    for (double gm : l->gamma) {
      if (gm > T) break;
      acc.add(h.h(gm / kTwoPi));
    }
  SumWithBound r;
  r.value = acc.value();
  r.bound = zero_tail_bound([&](double u) { return std::abs(h.h(u / kTwoPi)); },
                            g.at(pos).conductor, T);
  return r;
}

BDecomposition b_decomposition(const CharacterGroup& g, int pos, const SpectralWeight& h,
                               uint64_t n_limit, double tol, Exec exec) {
  const Character& c = g.at(pos);
  if (c.conductor == 1) throw ValidationError("b_decomposition: principal character");
  if (n_limit < 2) throw ValidationError("b_decomposition: need N >= 2");
  BDecomposition d;
  const double h0 = h.alpha();
  d.b1 = (std::log(c.conductor / kPi) + digamma(0.25 + 0.5 * c.parity)) * h0;

  const int T = max_threads(exec);
  std::vector<CompensatedSum<double>> acc(T);
  std::vector<uint64_t> cnt(T, 0);
  for_each_prime_power(
      n_limit,
      [&](uint64_t n, double lp, int tid) {
        cplx x = g.primitive_value(pos, static_cast<int64_t>(n % uint64_t(c.conductor)));
        if (x == cplx(0, 0)) return;
        double ln = std::log(static_cast<double>(n));
        acc[tid].add(-2 * lp * std::exp(-0.5 * ln) * x.real() * h.h_hat(ln));
        cnt[tid]++;
      },
      exec);
  for (int i = 1; i < T; ++i) acc[0].merge(acc[i]);
  for (int i = 0; i < T; ++i) d.n_primes += cnt[i];
  d.b2 = acc[0].value();
  double lN = std::log(static_cast<double>(n_limit));
  Integral tail = integrate([&](double v) { return std::exp(0.5 * v) * std::abs(h.h_hat(v)); },
                            lN, std::numeric_limits<double>::infinity(), 1e-14);
  d.b2_bound = 2 * kChebyshevC *
               (std::exp(0.5 * lN) * std::abs(h.h_hat(lN)) + tail.value + tail.error);

  auto gfun = [&](double x) { return 2 * h0 - 2 * h.h_hat(x); };
  Integral b3 = archimedean_integral(gfun, 0.5 + c.parity, 2.0, 4 * std::abs(h0), {}, tol);
  d.b3 = b3.value;
  d.b3_bound = b3.error;
  return d;
}

PairCorrelation pair_correlation(const ZeroStore& store, const CharacterGroup& g, int chi_pos,
                                 double z, double L, const SpectralWeight& h,
                                 const Kernel& kernel, double T) {
  if (L < 1) throw ValidationError("pair_correlation: need L >= 1");
  PairCorrelation out;
  CompensatedSum<double> acc;
  double phimax = kernel.phi_hat(0.0);
  for (int c1 = 0; c1 < g.phi(); ++c1) {
    if (c1 == g.principal()) continue;
    int c2 = g.product(chi_pos, g.conj(c1));
    if (c2 == g.principal()) continue;
    auto heights = [&](int pos) {
      std::vector<double> v;
      const ZeroList& a = store.require(g, pos, T);
      const ZeroList& b = store.require(g, g.conj(pos), T);
      for (double x : a.gamma)
        if (x <= T) v.push_back(x);
      for (double x : b.gamma)
        if (x <= T) v.push_back(-x);
      return v;
    };
    std::vector<double> g1 = heights(c1), g2 = heights(c2);
    double s1 = 0, s2 = 0;
    for (double a : g1) {
      double ha = h.h(a / kTwoPi);
      s1 += std::abs(ha);
      for (double b : g2) {
        acc.add(ha * h.h(b / kTwoPi) * kernel.phi_hat(L / kTwoPi * (z - a - b)));
        out.terms++;
      }
    }
    for (double b : g2) s2 += std::abs(h.h(b / kTwoPi));
    auto f = [&](double u) { return std::abs(h.h(u / kTwoPi)); };
    double t1 = zero_tail_bound(f, g.at(c1).conductor, T);
    double t2 = zero_tail_bound(f, g.at(c2).conductor, T);
    out.bound += phimax * (t1 * (s2 + t2) + s1 * t2);
  }
  out.value = acc.value();
  return out;
}

}  // namespace momlab
