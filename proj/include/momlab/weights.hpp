#pragma once

#include <string>

#include "momlab/numeric.hpp"

namespace momlab {

inline constexpr double kDefaultDelta = 0.25;

enum class WeightKind { expK, gauss, sech, classical };

// Test function eta with its transform eta_hat(xi) = \int eta(t) e^{-2 pi i xi t} dt
// and the transform of h = eta_hat^2, which is the self-convolution eta * eta.
// `scale` multiplies eta (so eta_hat by scale, h_hat by scale^2).
struct Weight {
  WeightKind kind = WeightKind::expK;
  double K = 1.0;  // expK only
  double delta = kDefaultDelta;
  double scale = 1.0;
  std::string spec;

  bool in_S = true;            // member of the smooth weight class for `delta`
  bool even = true;
  bool hat_nonneg = true;
  double decay_rate = 1.0;     // eta(t) <= envelope_C * e^{-decay_rate |t|}
  double envelope_C = 1.0;

  double eta(double t) const;
  double eta_hat(double xi) const;       // real part for the classical weight
  cplx eta_hat_complex(double xi) const;
  double h_hat(double t) const;          // (eta * eta)(t), even kinds only

  // Pointwise bound B(xi) >= eta_hat(xi) for |xi| >= xi0, decreasing in |xi|.
  double eta_hat_bound(double xi) const;
  // Half-width W such that eta vanishes below tol outside [-W, W].
  double support_radius(double tol) const;
};

// Grammar: expK:<K> | selfconv:gauss | selfconv:sech | classical.
Weight make_weight(const std::string& spec, double delta = kDefaultDelta);
Weight scaled(Weight w, double c);

// h = c * eta_hat^2; c = 0 gives h identically zero.
struct SpectralWeight {
  Weight eta;
  double scale = 1.0;
  double h(double xi) const;
  double h_hat(double t) const { return scale * eta.h_hat(t); }
  double alpha() const { return h_hat(0.0); }
  double decay_rate() const { return eta.decay_rate; }
};
SpectralWeight spectral(const Weight& w, double c = 1.0);

double alpha(const SpectralWeight& h);

// \int_0^inf e^{-c x} / (1 - e^{-d x}) g(x) dx for g(x) = O(x) at 0.
// Breakpoints mark kinks of g. Tail cut where envelope * e^{-c X} < tol.
Integral archimedean_integral(const std::function<double(double)>& g, double c, double d,
                              double envelope, std::vector<double> breakpoints,
                              double tol = 1e-11);

struct BetaValue {
  double value = 0;
  double error = 0;
};
BetaValue beta_q(const SpectralWeight& h, int q, double tol = 1e-11);
double beta_first_term(const SpectralWeight& h, int q);

enum class KernelKind { triangle, indicator };

struct Kernel {
  KernelKind kind = KernelKind::triangle;
  std::string spec;
  bool even = true;
  bool integrable = true;
  bool hat_nonneg = true;
  double phi(double t) const;
  double phi_hat(double xi) const;
  double half_integral() const;  // \int_0^inf Phi
  // Upper bound for |phi_hat(xi)| that decreases in |xi|.
  double hat_envelope(double xi) const;
};
Kernel make_kernel(const std::string& spec);

}  // namespace momlab
