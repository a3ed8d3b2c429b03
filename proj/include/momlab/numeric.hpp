#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace momlab {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// Execution policy for kernels that have both a serial reference and an
// OpenMP version. Results agree up to summation order.
enum class Exec { serial, parallel };

// Error classes mapped to CLI exit codes (1, 2, 3).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Neumaier compensated summation.
template <class T>
struct CompensatedSum {
  T sum{};
  T comp{};
  void add(T x) {
    if constexpr (std::is_same_v<T, cplx>) {
      double re = sum.real(), ce = comp.real();
      double im = sum.imag(), ci = comp.imag();
      step(re, ce, x.real());
      step(im, ci, x.imag());
      sum = {re, im};
      comp = {ce, ci};
    } else {
      step(sum, comp, x);
    }
  }
  void merge(const CompensatedSum& o) {
    add(o.sum);
    add(o.comp);
  }
  T value() const { return sum + comp; }

 private:
  static void step(double& s, double& c, double x) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
};

struct Integral {
  double value = 0;
  double error = 0;
};

// Adaptive Gauss-Kronrod on [a,b] (b may be +inf). Breakpoints split the
// range where the integrand has kinks.
Integral integrate(const std::function<double(double)>& f, double a, double b,
                   double tol = 1e-10, unsigned max_depth = 18);
Integral integrate_pieces(const std::function<double(double)>& f,
                          std::vector<double> points, double tol = 1e-10,
                          unsigned max_depth = 18);

// log Gamma on the complex plane, continuous along vertical lines with
// Re z > 0 (sum of principal logs plus Stirling).
cplx lgamma_complex(cplx z);
double digamma(double x);

// Standard normal upper tail.
double normal_tail(double v);

std::string format_double(double x, int digits = 17);

}  // namespace momlab
