#pragma once

#include <string>
#include <utility>
#include <vector>

#include "momlab/numeric.hpp"
#include "momlab/zeros.hpp"

namespace momlab {

struct CheckResult {
  std::string id, name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

struct CheckEnv {
  std::string cache_root;
  Exec exec = Exec::parallel;
};

// Orthogonality for every q <= q_max, and the closed character sum against
// brute force for all prime powers up to pp_max.
CheckResult check_characters(int q_max, int pp_max, const CheckEnv& env);
CheckResult check_conductor_moment(int q_min, int q_max, double tol, const CheckEnv& env);
// Enumerated F classes against the closed forms. even_rn holds (r, n) with
// s = 2r, odd_rn holds (r, n) with s = 2r + 1; optional pairs are skipped
// with a note when the enumeration budget is exceeded.
CheckResult check_combinatorics(const std::vector<std::pair<int, int>>& even_rn,
                                const std::vector<std::pair<int, int>>& odd_rn,
                                const std::vector<std::pair<int, int>>& optional_even_rn,
                                const CheckEnv& env);
// Prime side against zero side (expK:1) at heights T1 < T2.
CheckResult check_explicit_formula(const std::vector<int>& qs, const std::vector<double>& ts,
                                   double T1, double T2, const CheckEnv& env);
// Count check along a height ladder for every list in the store.
CheckResult check_zero_counts(const ZeroStore& store, const CheckEnv& env);
CheckResult check_moment_identities(int q_max, int n_max, const std::vector<double>& xs,
                                    double rel_tol, const CheckEnv& env);
CheckResult check_delta(int s_max, const std::vector<double>& Ts, const CheckEnv& env);
CheckResult check_spectral_vs_empirical(const std::vector<int>& qs,
                                        const std::vector<std::pair<int, int>>& sn, double T,
                                        const std::string& eta, const CheckEnv& env);
CheckResult check_li_monte_carlo(const std::vector<int>& qs, uint64_t samples, uint64_t seed,
                                 const CheckEnv& env);

// The invariant suite behind `verify`: level "quick" or "full".
std::vector<CheckResult> run_checks(const std::string& level, const CheckEnv& env);

}  // namespace momlab
