#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>
#include <vector>

#include "momlab/numeric.hpp"

namespace momlab {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

BigInt factorial(int n);
BigInt mu(int n);                 // Gaussian moments (2m)!/(2^m m!), 0 for odd n
Rational nu(int n);               // n >= 2
Rational nu_prime(int n);         // n even >= 2
Rational nu_dprime(int n);        // n even >= 2
double theta(int n, int r);       // 0 for odd n
double to_double(const Rational& x);

enum class InvolutionClass { F, G, I };
InvolutionClass parse_class(const std::string& tag);
std::string class_name(InvolutionClass c);

struct InvolutionClassCount {
  int s = 0, n = 0;
  InvolutionClass tag = InvolutionClass::F;
  BigInt count = 0;
  uint64_t scanned = 0;                 // raw involutions visited
  std::vector<int> witness;             // one member of the class, if any
};

struct EnumerationOptions {
  // Odd s only: when true, rows outside the 3-row block must be paired with
  // each other; when false, their unique partner may lie in the block.
  bool strict_pairing = true;
  // Optional row relabelling applied before classification (empty = identity).
  std::vector<int> row_perm;
  uint64_t budget = 50'000'000;
  Exec exec = Exec::parallel;
};

struct ClassCounts {
  int s = 0, n = 0;
  uint64_t F = 0, G = 0, I = 0, overlap_FG = 0, scanned = 0;
  std::vector<int> witness_F;
};

// All three classes in one scan of the (s*n - 1)!! fixed-point-free
// involutions of the s x n grid. Throws BudgetError above opts.budget.
ClassCounts enumerate_classes(int s, int n, const EnumerationOptions& opts = {});
InvolutionClassCount enumerate_class(int s, int n, InvolutionClass tag,
                                     const EnumerationOptions& opts = {});
uint64_t double_factorial_odd(int points);  // (points - 1)!!

// Closed-form |F_{s,n}|; throws ValidationError for odd s with odd n.
BigInt f_formula(int s, int n);

struct FormulaCheck {
  int s = 0, n = 0;
  BigInt enumerated = 0, formula = 0;
  bool match = false;
  std::vector<int> witness;
};
std::vector<FormulaCheck> verify_formulas(int max_points, Exec exec = Exec::parallel);

}  // namespace momlab
