#include "momlab/numeric.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <cstdio>
#include <limits>

namespace momlab {

Integral integrate(const std::function<double(double)>& f, double a, double b,
                   double tol, unsigned max_depth) {
  using boost::math::quadrature::gauss_kronrod;
  Integral out;
  if (a == b) return out;
  double err = 0, l1 = 0;
  // The library's tolerance is relative to the L1 norm; derive it from the
  // absolute target so rounding noise does not force full-depth recursion.
  gauss_kronrod<double, 31>::integrate(f, a, b, 0, 1.0, &err, &l1);
  double rel = std::clamp(tol / std::max(l1, 1e-300), 1e-14, 1e-4);
  out.value = gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel, &err, &l1);
  out.error = err;
  if (!(err <= std::max(tol, 1e-13 * l1)) && std::isfinite(b)) {
    // Split once and retry; the library stops at max_depth silently.
    double m = 0.5 * (a + b);
    double e1 = 0, e2 = 0;
    double v1 = gauss_kronrod<double, 61>::integrate(f, a, m, max_depth, 0.1 * rel, &e1);
    double v2 = gauss_kronrod<double, 61>::integrate(f, m, b, max_depth, 0.1 * rel, &e2);
    if (e1 + e2 < err) {
      out.value = v1 + v2;
      out.error = e1 + e2;
    }
  }
  return out;
}

Integral integrate_pieces(const std::function<double(double)>& f,
                          std::vector<double> points, double tol,
                          unsigned max_depth) {
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  Integral total;
  CompensatedSum<double> acc;
  for (size_t i = 0; i + 1 < points.size(); ++i) {
    Integral piece = integrate(f, points[i], points[i + 1], tol / points.size(), max_depth);
    acc.add(piece.value);
    total.error += piece.error;
  }
  total.value = acc.value();
  return total;
}

cplx lgamma_complex(cplx z) {
  // Shift Re z up to >= 12, then Stirling with Bernoulli terms.
  cplx shift = 0;
  while (z.real() < 12.0) {
    shift += std::log(z);
    z += 1.0;
  }
  static const double b2k[] = {1.0 / 6,       -1.0 / 30,      1.0 / 42,
                               -1.0 / 30,     5.0 / 66,       -691.0 / 2730,
                               7.0 / 6,       -3617.0 / 510,  43867.0 / 798,
                               -174611.0 / 330};
  cplx res = (z - 0.5) * std::log(z) - z + 0.5 * std::log(kTwoPi);
  cplx zinv = 1.0 / z;
  cplx z2 = zinv * zinv;
  cplx pw = zinv;
  for (int k = 1; k <= 10; ++k) {
    res += b2k[k - 1] / (2.0 * k * (2.0 * k - 1)) * pw;
    pw *= z2;
  }
  return res - shift;
}

double digamma(double x) { return boost::math::digamma(x); }

double normal_tail(double v) { return 0.5 * std::erfc(v / std::sqrt(2.0)); }

std::string format_double(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

}  // namespace momlab
