#include "momlab/weights.hpp"

#include <algorithm>
#include <cmath>

#include "momlab/arith.hpp"

namespace momlab {

namespace {

double sup_envelope(const Weight& w, double rate) {
  double best = 0;
  for (int i = 0; i <= 4000; ++i) {
    double t = i * 0.01;
    best = std::max(best, std::abs(w.eta(t)) / w.scale * std::exp(rate * t));
  }
  return best * 1.01;
}

double parse_number(const std::string& s, const std::string& spec) {
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || !std::isfinite(v))
    throw ValidationError("weight spec '" + spec + "': bad number '" + s + "'");
  return v;
}

}  // namespace

double Weight::eta(double t) const {
  switch (kind) {
    case WeightKind::expK: return scale * std::exp(-K * std::abs(t));
    case WeightKind::gauss: return scale * M_SQRT1_2 * std::exp(-kPi * t * t / 2);
    case WeightKind::sech: {
      double a = std::abs(t);
      if (a < 1e-6) return scale * (2.0 / kPi) * (1 - kPi * kPi * t * t / 6);
      if (a > 300) return 0.0;
      return scale * 2 * a / std::sinh(kPi * a);
    }
    case WeightKind::classical: return t <= 0 ? scale * std::exp(t / 2) : 0.0;
  }
  return 0;
}

cplx Weight::eta_hat_complex(double xi) const {
  if (kind == WeightKind::classical) return scale / cplx(0.5, -kTwoPi * xi);
  return eta_hat(xi);
}

double Weight::eta_hat(double xi) const {
  switch (kind) {
    case WeightKind::expK: return scale * 2 * K / (K * K + kTwoPi * kTwoPi * xi * xi);
    case WeightKind::gauss: return scale * std::exp(-kTwoPi * xi * xi);
    case WeightKind::sech: {
      double a = kPi * std::abs(xi);
      if (a > 350) return 0.0;
      double c = 1.0 / std::cosh(a);
      return scale * c * c;
    }
    case WeightKind::classical: return eta_hat_complex(xi).real();
  }
  return 0;
}

double Weight::h_hat(double t) const {
  double a = std::abs(t);
  double s2 = scale * scale;
  switch (kind) {
    case WeightKind::expK: return s2 * std::exp(-K * a) * (a + 1 / K);
    case WeightKind::gauss: return s2 * 0.5 * std::exp(-kPi * t * t / 4);
    case WeightKind::sech:
      if (a < 1e-6) return s2 * 4.0 / (3 * kPi);
      if (a > 300) return 0.0;
      return s2 * 4 * a * (a * a + 1) / (3 * std::sinh(kPi * a));
    case WeightKind::classical:
      throw ValidationError("h_hat: the classical weight has no spectral weight");
  }
  return 0;
}

double Weight::eta_hat_bound(double xi) const {
  if (kind == WeightKind::classical) return std::abs(eta_hat_complex(xi));
  return std::abs(eta_hat(xi));
}

double Weight::support_radius(double tol) const {
  double lt = std::log(std::max(std::abs(scale), 1e-300) / tol);
  if (lt <= 0) return 0.0;
  switch (kind) {
    case WeightKind::expK: return lt / K;
    case WeightKind::gauss: return std::sqrt(2 * lt / kPi);
    case WeightKind::classical: return 2 * lt;
    case WeightKind::sech: {
      double w = 1;
      while (std::abs(eta(w)) >= tol) w *= 1.25;
      return w;
    }
  }
  return 0;
}

Weight make_weight(const std::string& spec, double delta) {
  if (!(delta > 0)) throw ValidationError("weight: delta must be positive");
  Weight w;
  w.spec = spec;
  w.delta = delta;
  const std::string sc = "selfconv:";
  if (spec.rfind("expK:", 0) == 0) {
    w.kind = WeightKind::expK;
    w.K = parse_number(spec.substr(5), spec);
    if (w.K < 0.5 + delta)
      throw ValidationError("weight '" + spec + "': K must be >= 1/2 + delta = " +
                            format_double(0.5 + delta, 6));
    w.decay_rate = w.K;
    w.envelope_C = 1.0;
  } else if (spec == sc + "gauss") {
    w.kind = WeightKind::gauss;
    w.decay_rate = 3.0;
    w.envelope_C = sup_envelope(w, 3.0);
  } else if (spec == sc + "sech") {
    w.kind = WeightKind::sech;
    w.decay_rate = 2.5;
    w.envelope_C = sup_envelope(w, 2.5);
  } else if (spec == "classical") {
    w.kind = WeightKind::classical;
    w.in_S = false;
    w.even = false;
    w.hat_nonneg = false;
    w.decay_rate = 0.5;
    w.envelope_C = 1.0;
  } else {
    throw ValidationError("unknown weight spec '" + spec +
                          "' (expected expK:<K>, selfconv:gauss, selfconv:sech, classical)");
  }
  return w;
}

Weight scaled(Weight w, double c) {
  w.scale *= c;
  return w;
}

double SpectralWeight::h(double xi) const {
  double v = eta.eta_hat(xi);
  return scale * v * v;
}

SpectralWeight spectral(const Weight& w, double c) {
  if (!w.even) throw ValidationError("spectral weight needs an even eta");
  return SpectralWeight{w, c};
}

double alpha(const SpectralWeight& h) { return h.alpha(); }

Integral archimedean_integral(const std::function<double(double)>& g, double c, double d,
                              double envelope, std::vector<double> breakpoints,
                              double tol) {
  envelope = std::max(std::abs(envelope), 1e-300);
  double X = 8;
  auto tail = [&](double x) { return envelope * std::exp(-c * x) / (c * -std::expm1(-d * x)); };
  while (tail(X) > 0.1 * tol) X *= 1.25;
  std::vector<double> pts{0.0, 0.125, X};
  for (double b : breakpoints)
    if (b > 0 && b < X) pts.push_back(b);
  for (double x = 4; x < X; x *= 2) pts.push_back(x);
  auto f = [&](double x) {
    double den = -std::expm1(-d * x);
    if (den <= 0) return 0.0;
    return std::exp(-c * x) / den * g(x);
  };
  Integral r = integrate_pieces(f, pts, 0.5 * tol);
  r.error += tail(X);
  return r;
}

double beta_first_term(const SpectralWeight& h, int q) {
  double s = std::log(8 * kPi) + kEulerGamma;
  for (auto [p, e] : factorize(q)) {
    (void)e;
    s += std::log(double(p)) / (p - 1);
  }
  return -h.alpha() * s;
}

BetaValue beta_q(const SpectralWeight& h, int q, double tol) {
  if (q < 3) throw ValidationError("beta_q: q must be >= 3");
  double h0 = h.alpha();
  auto g = [&](double x) { return 2 * h0 - 2 * h.h_hat(x); };
  Integral in = archimedean_integral(g, 0.5, 1.0, 4 * std::abs(h0), {}, tol);
  return {beta_first_term(h, q) + 0.5 * in.value, 0.5 * in.error};
}

double Kernel::phi(double t) const {
  double a = std::abs(t);
  if (kind == KernelKind::triangle) return a < 1 ? 1 - a : 0.0;
  return a <= 1 ? 1.0 : 0.0;
}

double Kernel::phi_hat(double xi) const {
  double x = kPi * xi;
  if (kind == KernelKind::triangle) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 3;
    double s = std::sin(x) / x;
    return s * s;
  }
  if (std::abs(x) < 1e-8) return 2.0 - 8 * x * x / 3;
  return std::sin(2 * x) / x;
}

double Kernel::hat_envelope(double xi) const {
  double x = kPi * std::abs(xi);
  if (kind == KernelKind::triangle) return x <= 1 ? 1.0 : 1 / (x * x);
  return x <= 0.5 ? 2.0 : 1 / x;
}

double Kernel::half_integral() const { return kind == KernelKind::triangle ? 0.5 : 1.0; }

Kernel make_kernel(const std::string& spec) {
  Kernel k;
  k.spec = spec;
  if (spec == "triangle") {
    k.kind = KernelKind::triangle;
  } else if (spec == "indicator") {
    k.kind = KernelKind::indicator;
    k.hat_nonneg = false;  // sin(2 pi xi)/(pi xi) is negative on (1/2, 1)
  } else {
    throw ValidationError("unknown kernel spec '" + spec + "' (expected triangle or indicator)");
  }
  return k;
}

}  // namespace momlab
