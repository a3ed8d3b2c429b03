#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "momlab/numeric.hpp"

namespace momlab {

using Factorization = std::vector<std::pair<int64_t, int>>;

Factorization factorize(int64_t n);
int64_t euler_phi(int64_t n);
int64_t ipow(int64_t b, int e);
int64_t powmod(int64_t b, int64_t e, int64_t m);
bool is_prime(int64_t n);
std::vector<int64_t> divisors(int64_t n);

// Von Mangoldt table stored sparsely: prime powers up to `limit` with log p.
struct LambdaTable {
  uint64_t limit = 0;
  std::vector<uint64_t> n;
  std::vector<double> lambda;
  double operator()(uint64_t m) const;
  size_t size() const { return n.size(); }
};

inline constexpr uint64_t kDefaultSieveMemory = uint64_t(1) << 30;

// Throws BudgetError if the table would exceed memory_bytes.
LambdaTable sieve_lambda(uint64_t N, uint64_t memory_bytes = kDefaultSieveMemory);

// Segmented sieve over primes in [2, limit]. The callback receives each
// segment's primes in ascending order plus the calling thread's id; segments
// arrive in order for Exec::serial and in arbitrary order for Exec::parallel.
using SegmentFn = std::function<void(const std::vector<uint64_t>&, int)>;
void sieve_primes(uint64_t limit, const SegmentFn& fn, Exec exec = Exec::serial);
int max_threads(Exec exec);
// Prime powers p^k <= limit with k >= 2, as (p^k, p), ascending.
std::vector<std::pair<uint64_t, uint64_t>> higher_prime_powers(uint64_t limit);

// Calls fn(n, log p, thread) for every prime power n = p^k <= limit. Order is
// ascending for Exec::serial only.
using PrimePowerFn = std::function<void(uint64_t, double, int)>;
void for_each_prime_power(uint64_t limit, const PrimePowerFn& fn, Exec exec = Exec::serial);

// Chebyshev-type constant: psi(x) < kChebyshevC * x for all x > 0.
inline constexpr double kChebyshevC = 1.03883;

struct Character {
  int q = 1;
  int conrey = 1;
  int index = 0;
  int conductor = 1;
  int primitive_conrey = 1;
  int parity = 0;  // a(chi): 0 even, 1 odd
  int order = 1;
};

// The group of Dirichlet characters mod q in Conrey labelling. Values are
// exponents k over the group exponent E, meaning exp(2 pi i k / E); -1 marks
// residues not coprime to q.
class CharacterGroup {
 public:
  explicit CharacterGroup(int q);

  int modulus() const { return q_; }
  int phi() const { return static_cast<int>(chars_.size()); }
  int exponent() const { return E_; }
  const std::vector<Character>& characters() const { return chars_; }
  const Character& at(int pos) const { return chars_[pos]; }
  const std::vector<int>& coprime_residues() const { return residues_; }

  int position(int conrey) const;
  int principal() const { return principal_; }
  int conj(int pos) const { return conj_[pos]; }
  int product(int i, int j) const;

  int exp_at(int pos, int64_t m) const;
  cplx value(int pos, int64_t m) const;
  cplx root(int k) const { return roots_[((k % E_) + E_) % E_]; }

  // Value of the inducing primitive character at any integer m, as an
  // exponent over E (or -1).
  int primitive_exp(int pos, int64_t m) const;
  cplx primitive_value(int pos, int64_t m) const;

  // chi restricted to the CRT component mod d (d | q, gcd(d, q/d) = 1),
  // evaluated at m coprime to d.
  cplx component_value(int pos, int64_t d, int64_t m) const;

  // Position of the first failing pair, or (-1,-1).
  std::pair<int, int> orthogonality_failure(double tol = 1e-10) const;

 private:
  int q_;
  int E_ = 1;
  int principal_ = 0;
  std::vector<Character> chars_;
  std::vector<int> residues_;
  std::vector<int> pos_of_conrey_;
  std::vector<int> conj_;
  std::vector<int> index_of_residue_;
  std::vector<int32_t> table_;              // phi x q
  std::vector<std::vector<int32_t>> prim_;  // per character, size conductor
  std::vector<cplx> roots_;
  int64_t crt_lift(int64_t d, int64_t m) const;
};

bool verify_orthogonality(const CharacterGroup& g, double tol = 1e-10);

struct PrimePower {
  int64_t p = 2;
  int e = 1;
  int64_t value() const { return ipow(p, e); }
};

// Direct sum over chi1*chi2 = chi of chi1*(m) chi2*(n) with primitive values.
cplx sq_brute(const CharacterGroup& g, int chi_pos, int64_t m, int64_t n);
// Case-split closed form; throws ValidationError if p is not prime.
cplx sq_closed(const CharacterGroup& g, int chi_pos, PrimePower a, PrimePower b);

struct ConductorMoments {
  double mean_residual = 0;
  double variance = 0;
  double prime_square_sum = 0;  // sum_{p|q} (log p)^2 / p
  double mean_log_conductor = 0;
};
ConductorMoments conductor_moments(int q);

}  // namespace momlab
