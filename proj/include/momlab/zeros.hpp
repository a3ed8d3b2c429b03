#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "momlab/arith.hpp"
#include "momlab/weights.hpp"

namespace momlab {

// Positive zero heights of one L(s, chi). Negative heights of chi are the
// negated positive heights of conj(chi) and are never stored.
struct ZeroList {
  int q = 0;
  int conrey = 0;
  std::vector<double> gamma;
  std::string provenance;  // "computed" or "ingested"
  double T_cert = 0;
  size_t count_upto(double T) const;
};

// Riemann-von Mangoldt: N(T, chi) counts zeros with |gamma| <= T.
double rvm_main(int q_chi, double T);
double rvm_tolerance(int q_chi, double T);

struct CountCheck {
  double T = 0;
  long count = 0;
  double expected = 0;
  double tolerance = 0;
  bool pass = false;
};
CountCheck count_check(int q_chi, const ZeroList& chi, const ZeroList& conj, double T);

int conj_conrey(int q, int conrey);

class ZeroStore {
 public:
  // Validates ordering and positivity; replaces an existing list.
  void insert(ZeroList list);
  const ZeroList* find(int q, int conrey) const;
  // The list for the primitive ancestor of group character `pos`.
  const ZeroList* find_for(const CharacterGroup& g, int pos) const;
  // As find_for, but throws ValidationError unless certified to height T.
  const ZeroList& require(const CharacterGroup& g, int pos, double T) const;
  std::vector<const ZeroList*> lists() const;
  size_t size() const { return lists_.size(); }

  // Recompute T_cert for every list whose conjugate list is present: the
  // largest zero height (or the recorded height) at which the count check
  // passes. Returns warnings for lists that cannot be certified.
  std::vector<std::string> certify();

 private:
  std::map<std::pair<int, int>, ZeroList> lists_;
};

// TSV with header q<TAB>conrey<TAB>gamma, rows sorted by (q, conrey, gamma).
ZeroStore load_zeros(const std::string& path, std::vector<std::string>* warnings = nullptr);
ZeroStore parse_zeros(std::istream& in, const std::string& name,
                      std::vector<std::string>* warnings = nullptr);
void write_zeros(const std::string& path, const std::vector<const ZeroList*>& lists);
std::string zeros_tsv(const std::vector<const ZeroList*>& lists);

// L(s, chi) for the primitive character inducing character `pos` mod q.
class LFunction {
 public:
  LFunction(const CharacterGroup& g, int pos);
  int conductor() const { return q_; }
  int conrey() const { return conrey_; }
  int parity() const { return a_; }
  cplx root_number() const { return eps_; }
  cplx L(cplx s) const;
  double theta(double t) const;
  // Real Hardy-type function: Z(t) = e^{i theta(t)} L(1/2 + it).
  double Z(double t) const;
  cplx rotated(double t) const;  // e^{i theta} L, imaginary part ~ 0

 private:
  int q_, conrey_, a_;
  std::vector<cplx> chi_;  // chi_[m] for 0 <= m < q
  cplx eps_;
};

struct ZeroEngineOptions {
  double bisect_tol = 1e-9;
  int max_refine = 3;
  int steps_per_spacing = 8;
  Exec exec = Exec::parallel;
};

struct ZeroPair {
  ZeroList chi, conj;
  CountCheck check;
  int refinements = 0;
};

// Zeros in (0, T] of the primitive ancestor of (q, conrey) and of its
// conjugate, with the count check applied to the union. Throws BudgetError
// with the suspect interval when the check keeps failing.
ZeroPair compute_zero_pair(int q, int conrey, double T, const ZeroEngineOptions& opts = {});
std::vector<double> compute_zeros(int q, int conrey, double T,
                                  const ZeroEngineOptions& opts = {});

// Cache under <root>/zeros/q=<q>/chi=<c>.tsv plus a .meta.json sidecar with
// T_cert, provenance and the FNV-1a hash of the TSV bytes.
std::string default_cache_root();
std::string cache_path(const std::string& root, int q, int conrey);
bool cache_load(const std::string& root, int q, int conrey, ZeroList& out);
void cache_store(const std::string& root, const ZeroList& list);
uint64_t fnv1a(const std::string& bytes);

// Makes sure the store holds lists certified to T for the primitive
// ancestor of every non-principal character in `positions` and for their
// conjugates; uses the cache when `cache_root` is non-empty.
void ensure_zeros(ZeroStore& store, const CharacterGroup& g, const std::vector<int>& positions,
                  double T, const std::string& cache_root,
                  const ZeroEngineOptions& opts = {});
void ensure_all_zeros(ZeroStore& store, const CharacterGroup& g, double T,
                      const std::string& cache_root, const ZeroEngineOptions& opts = {});

// Tail bound for sum_{|gamma| > T} f(|gamma|) over the zeros of one L(s, chi)
// and its conjugate, for f >= 0 decreasing on [T, inf).
double zero_tail_bound(const std::function<double(double)>& f, int q_chi, double T);

struct SumWithBound {
  double value = 0;
  double bound = 0;
};

// b(chi; h) = sum_{|gamma| <= T} h(gamma / 2 pi).
SumWithBound b_chi(const ZeroStore& store, const CharacterGroup& g, int pos,
                   const SpectralWeight& h, double T);

struct BDecomposition {
  double b1 = 0, b2 = 0, b3 = 0;
  double b2_bound = 0, b3_bound = 0;
  uint64_t n_primes = 0;
  double total() const { return b1 + b2 + b3; }
  double bound() const { return b2_bound + b3_bound; }
};
BDecomposition b_decomposition(const CharacterGroup& g, int pos, const SpectralWeight& h,
                               uint64_t n_limit, double tol = 1e-10,
                               Exec exec = Exec::parallel);

struct PairCorrelation {
  double value = 0;
  double bound = 0;
  long terms = 0;
};
PairCorrelation pair_correlation(const ZeroStore& store, const CharacterGroup& g, int chi_pos,
                                 double z, double L, const SpectralWeight& h,
                                 const Kernel& kernel, double T);

}  // namespace momlab
