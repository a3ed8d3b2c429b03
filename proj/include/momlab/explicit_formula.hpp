#pragma once

#include <string>
#include <vector>

#include "momlab/arith.hpp"
#include "momlab/weights.hpp"
#include "momlab/zeros.hpp"

namespace momlab {

struct PsiValue {
  cplx value = 0;
  double bound = 0;
  std::string side;  // "prime" or "zero"
};

// Bound on sum_{n > X} Lambda(n) n^{-1/2} |eta(log n - t)| for X >= e^t.
double prime_tail_bound(const Weight& eta, double t, double X);

// Direct evaluations on a von Mangoldt table; x = e^t.
PsiValue psi_eta_ap(double x, int q, int a, const Weight& eta, const LambdaTable& table);
PsiValue psi_eta_char(double x, const CharacterGroup& g, int pos, const Weight& eta,
                      const LambdaTable& table, bool primitive = false);

// Class sums S[c][k] = sum_{n <= X, n = c mod Q} Lambda(n) n^{-1/2} eta(log n - t_k)
// over a t-grid, from one streaming sieve pass. The expK weight uses a
// separable split at each grid point; other weights use their support window.
class ProgressionSums {
 public:
  struct Options {
    uint64_t X = 0;  // 0: smallest X meeting tol at the largest t, capped by X_max
    uint64_t X_max = 1'000'000'000;
    double tol = 1e-3;
    Exec exec = Exec::parallel;
  };
  ProgressionSums(int Q, const Weight& eta, std::vector<double> t_grid, const Options& opts);
  ProgressionSums(int Q, const Weight& eta, std::vector<double> t_grid)
      : ProgressionSums(Q, eta, std::move(t_grid), Options{}) {}

  int modulus() const { return Q_; }
  uint64_t limit() const { return X_; }
  const std::vector<double>& t() const { return t_; }
  double class_sum(int c, size_t k) const { return S_[size_t(c) * t_.size() + k]; }
  double tail_bound(size_t k) const { return tail_[k]; }

  // Requires g.modulus() | Q. `primitive` evaluates with chi* instead of chi.
  PsiValue psi_char(const CharacterGroup& g, int pos, size_t k, bool primitive = false) const;
  PsiValue psi_ap(int q, int a, size_t k) const;

 private:
  int Q_;
  uint64_t X_;
  std::vector<double> t_;
  std::vector<double> S_;
  std::vector<double> tail_;
};

// Pieces of the explicit formula beyond the zero sum, for psi_eta(e^t, chi):
// psi = -Z_T(t) + A(t) - C(t) + I(t) - R(t).
struct Correction {
  double A = 0;
  cplx C = 0;
  double I = 0;
  cplx R = 0;
  double error = 0;  // numeric error of C and I
  cplx total() const { return A - C + I - R; }
};

class ZeroSide {
 public:
  ZeroSide(const CharacterGroup& g, int pos, const Weight& eta, const ZeroStore& store,
           double T);
  cplx zero_sum(double t) const;
  double zero_tail() const { return tail_; }
  Correction correction(double t) const;
  // psi_eta(e^t, chi) from the zeros plus the correction; bound covers the
  // zero truncation and the numeric error of the correction.
  PsiValue psi(double t) const;
  double height() const { return T_; }
  size_t zero_count() const { return gam_.size(); }

 private:
  const CharacterGroup& g_;
  int pos_;
  Weight eta_;
  double T_;
  std::vector<double> gam_;   // signed heights
  std::vector<double> what_;  // eta_hat(gamma / 2 pi)
  double tail_ = 0;
  double arch_ = 0;           // log(q_chi / pi) + digamma(1/4 + a/2)
  cplx cconst_ = 0;           // sum Lambda conj(chi*)(n) n^{-1/2-K} (expK)
  double cconst_err_ = 0;
  std::vector<std::pair<double, cplx>> cseries_;  // (log n, Lambda conj(chi*)(n) n^{-1/2})
  std::vector<std::pair<double, cplx>> ram_;  // (k log p, chi*(p^k) log p p^{-k/2})
};

// -L'/L(s, chi*) for real s > 1 by a five-point difference of L.
cplx log_derivative(const LFunction& f, double s);

PsiValue psi_eta_zero_side(double x, const CharacterGroup& g, int pos, const Weight& eta,
                           const ZeroStore& store, double T);

// psi_eta(x, chi) - psi_eta(x, chi*), from the prime powers dividing q.
cplx ramified_diff(double x, const CharacterGroup& g, int pos, const Weight& eta);

struct WeilResidual {
  double residual = 0;
  double bound = 0;
  cplx zero_side = 0, prime_side = 0;
};
// |sum_{|gamma|<=T} e^{i gamma t} eta_hat - (A - sum_n ... + I)| with the
// prime sum taken over n <= N.
WeilResidual weil_residual(double x, const CharacterGroup& g, int pos, const Weight& eta,
                           const ZeroStore& store, double T, const LambdaTable& table);

}  // namespace momlab
