#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "momlab/explicit_formula.hpp"
#include "momlab/weights.hpp"
#include "momlab/zeros.hpp"

namespace momlab {

struct MomentValue {
  double value = 0;
  double imag = 0;   // imaginary part discarded by the character side
  double bound = 0;  // prime-sum truncation
};

// (1/phi) sum_a D(a)^n, and a bound on its change when every D(a) moves by
// at most eps.
double power_mean(const std::vector<double>& dev, int n);
double power_mean_bound(const std::vector<double>& dev, int n, double eps);

// D(a) = psi_eta(x;q,a) - psi_eta(x,chi0)/phi(q) over g.coprime_residues(),
// from class sums indexed by residue mod q.
std::vector<double> residue_deviations(const CharacterGroup& g,
                                       const std::function<double(int)>& class_sum);

MomentValue moment_residue_side(double x, int q, int n, const Weight& eta,
                                const LambdaTable& table);
MomentValue moment_character_side(double x, int q, int n, const Weight& eta,
                                  const LambdaTable& table);

// Tuples (chi_1..chi_n) of non-principal positions with principal product.
uint64_t tuple_count(const CharacterGroup& g, int n);
void for_each_tuple(const CharacterGroup& g, int n,
                    const std::function<void(const std::vector<int>&)>& fn,
                    uint64_t budget = 100'000'000);
// sum over those tuples of prod u[chi_j].
double tuple_product_sum(const CharacterGroup& g, int n, const std::vector<double>& u);

// ---------------------------------------------------------------------------
// Delta kernels. A symbolic sum is a sorted list of (id, coefficient) with
// nonzero coefficients; it is zero exactly when empty.
using SymKey = std::vector<std::pair<int32_t, int32_t>>;
SymKey sym_add(const SymKey& a, const SymKey& b);
SymKey sym_neg(const SymKey& a);

int delta_exact(const std::vector<long long>& sigma);
int delta_exact(const std::vector<SymKey>& sigma);
// Inclusion-exclusion with phi_hat(T sum_I sigma)/phi_hat(0) for the outer
// delta; nonzero[mu] is the exact zero test for sigma_mu.
double delta_smoothed(const std::vector<double>& sigma, const std::vector<bool>& nonzero,
                      const Kernel& kernel, double T);
double delta_smoothed(const std::vector<long long>& sigma, const Kernel& kernel, double T);

// ---------------------------------------------------------------------------
// Zero arrays. Each non-principal character carries its signed ordinates
// (zeros of chi above the axis, negated zeros of conj(chi) below); an
// ordinate and its conjugate partner share an orbit id with opposite signs.
struct SignedZero {
  double gamma = 0;
  double what = 0;  // eta_hat(gamma / 2 pi)
  int32_t id = 0;   // +-(orbit + 1)
};

class ZeroFamily {
 public:
  ZeroFamily(const CharacterGroup& g, const Weight& eta, const ZeroStore& store, double T);
  const CharacterGroup& group() const { return g_; }
  double height() const { return T_; }
  const std::vector<SignedZero>& zeros(int pos) const { return zeros_[pos]; }
  // Index of the primitive zero list behind pos; equal ids mean shared zeros.
  int list_id(int pos) const { return list_[pos]; }
  // sum |eta_hat| over the stored ordinates, and the tail bound beyond T.
  const std::vector<double>& abs_sums() const { return S_; }
  const std::vector<double>& tails() const { return tau_; }

 private:
  const CharacterGroup& g_;
  double T_;
  std::vector<std::vector<SignedZero>> zeros_;
  std::vector<int> list_;
  std::vector<double> S_, tau_;
};

// Smallest height on a doubling ladder from 25 at which the zero tail of
// every character is below tol, capped at max_height.
double auto_zero_height(const Weight& eta, int q, double tol, double max_height = 400);

struct SpectralMean {
  double value = 0;
  double bound = 0;  // zero truncation
  uint64_t terms = 0;
};
// m_n = (-1)^n phi^-n sum over zero arrays whose ordinates cancel in
// conjugate pairs; 0 for odd n.
SpectralMean spectral_mean(const ZeroFamily& fam, int n, uint64_t budget = 100'000'000);

// Diagonal lower bound mu_n phi^-n m! e_m(B_c) over conjugate classes c with
// B_c = sum_{chi in c} b(chi; eta_hat^2); n = 2m. Classes whose characters
// share a primitive ancestor with an earlier class are skipped.
double diagonal_lower_bound(const ZeroFamily& fam, int n);

struct ZeroRow {
  double sigma = 0;   // (1/2pi) sum of ordinates
  double weight = 0;  // (-1)^n phi^-n prod eta_hat
  SymKey key;
};

struct SpectralOptions {
  double prune = 1e-13;  // drop rows lighter than prune * heaviest row
  uint64_t budget = 100'000'000;
  double window_tol = 1e-9;
  Exec exec = Exec::parallel;
};

// Rows of X_{1,n} zero arrays with non-cancelling ordinates.
class ZeroRows {
 public:
  ZeroRows(const ZeroFamily& fam, int n, const SpectralOptions& opts = {});
  const std::vector<ZeroRow>& rows() const { return rows_; }
  int n() const { return n_; }
  double kept_abs() const { return kept_; }  // sum |w| over kept rows, all keys
  double full_abs() const { return full_; }  // phi^-n P_n(S)
  double tail_abs() const { return tail_; }  // phi^-n P_n(S + tau)
  // Bound on the s-fold sum lost to pruning and zero truncation.
  double drop_bound(int s) const;

 private:
  int n_;
  std::vector<ZeroRow> rows_;
  double kept_ = 0, full_ = 0, tail_ = 0;
};

struct DeltaSum {
  double value = 0;
  double remainder = 0;  // window truncation
  uint64_t terms = 0;
};
// sum over s-tuples of rows of prod w * Delta_s(sigma; Phi, T), or the exact
// Delta_s when exact is set.
DeltaSum delta_sum(const ZeroRows& rows, int s, const Kernel& kernel, double T, bool exact,
                   const SpectralOptions& opts = {});

// ---------------------------------------------------------------------------
// Deviations D(a) along e^t from three sources: the prime side where its
// truncation bound is below prime_tol, the zero side with the explicit
// correction, and the pure zero-sum model -sum eta_hat e^{i gamma t}.
struct PathOptions {
  bool use_prime = true;
  double prime_tol = 1e-6;
  uint64_t X_max = 10'000'000;
  Exec exec = Exec::parallel;
};

struct PathValues {
  std::vector<double> hybrid, zero, model;
  double hybrid_bound = 0, zero_bound = 0;
  bool prime = false;
};

class DeviationPath {
 public:
  DeviationPath(const CharacterGroup& g, const Weight& eta, const ZeroStore& store, double T,
                const PathOptions& opts = {});
  std::vector<PathValues> evaluate(const std::vector<double>& t) const;
  // Largest t where the prime side is used.
  double prime_limit() const { return t_prime_; }
  const CharacterGroup& group() const { return g_; }
  const Weight& weight() const { return eta_; }

 private:
  const CharacterGroup& g_;
  Weight eta_;
  PathOptions opts_;
  std::vector<int> chars_;
  std::vector<ZeroSide> sides_;
  double t_prime_ = -1;
};

struct QuadratureOptions {
  double step = 0.01;
  int max_doublings = 3;
  double tol = 1e-7;
  Exec exec = Exec::parallel;
};

struct MomentReport {
  std::string kind;
  int q = 0, n = 0, s = 0;
  double x = 0, T = 0;
  std::string eta, phi;
  double value = 0;
  double prediction = 0;
  double residual = 0;  // value - prediction
  double quad_error = 0;
  double trunc_error = 0;
  double mean = 0;  // m_n used for centering
  std::map<std::string, double> extra;
  double budget() const { return quad_error + trunc_error; }
};

// (1/(T int_0^inf Phi)) int_0^inf Phi(t/T) (M_n(e^t) - m_n)^s dt by composite
// Simpson with step doubling.
MomentReport vsn_empirical(double T, int s, int n, const Kernel& kernel,
                           const DeviationPath& path, double m_n, double m_n_bound,
                           const QuadratureOptions& qopts = {});

// Zero-array side: the Delta sum plus the transient int Phi [(M - m)^s - (Z - m)^s]
// that the pure zero model omits. exact = true gives the T -> infinity limit.
MomentReport vsn_spectral(double T, int s, int n, const Kernel& kernel, const ZeroFamily& fam,
                          const DeviationPath& path, bool exact,
                          const SpectralOptions& sopts = {}, const QuadratureOptions& qopts = {});

struct MainTerms {
  int q = 0, n = 0, s = 0;
  double phi = 0, alpha = 0, beta = 0, nu = 0, theta = 0;
  double V_n = 0;
  double mean_prediction = 0;    // mu_n ((alpha log q + beta_q)/phi)^{n/2}, n even
  double moment_prediction = 0;  // predicted V_{s,n}
};
MainTerms main_terms(int q, int n, int s, const Weight& eta);

// (1/(T int Phi)) int Phi(t/T) D_t(1)^{2m} dt with its Gaussian prediction.
MomentReport moments_a1(double T, int m, const Kernel& kernel, const DeviationPath& path,
                        const QuadratureOptions& qopts = {});

struct OmegaHit {
  double x = 0;
  double value = 0;
  double bound = 0;
  int residue = 0;  // raw mode only
};
struct OmegaReport {
  int q = 0;
  std::string mode, eta;
  int m = 1;
  double epsilon = 0, threshold = 0;
  uint64_t X = 0;
  size_t grid_size = 0;
  std::vector<OmegaHit> hits;
};
// mode "m2m": M_{2m}(x) >= (1 - eps) mu_{2m} (alpha log q / phi)^m.
// mode "raw": |psi(x;q,a) - psi(x,chi0)/phi| >= eps sqrt(x log q / phi).
OmegaReport omega_search(int q, const Weight& eta, const std::vector<double>& x_grid,
                         double epsilon, const std::string& mode = "m2m", int m = 1,
                         uint64_t X_max = 1'000'000'000, Exec exec = Exec::parallel);

struct Histogram {
  int q = 0;
  double x = 0;
  std::vector<double> values;  // normalized deviations
  std::vector<double> edges;
  std::vector<uint64_t> counts;
  struct Tail {
    double V, empirical, gaussian;
  };
  std::vector<Tail> tails;
};
Histogram distribution_histogram(double x, int q, int bins, Exec exec = Exec::parallel);

}  // namespace momlab
