#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "momlab/moments.hpp"

namespace momlab {

// Philox4x32-10 counter-based generator.
struct Philox4x32 {
  using Counter = std::array<uint32_t, 4>;
  using Key = std::array<uint32_t, 2>;
  static Counter block(Counter ctr, Key key);
};

// Stream `stream` of generator `seed`: counter words 1..2 hold the stream
// index, word 0 counts blocks, the key holds the seed.
class PhiloxStream {
 public:
  PhiloxStream(uint64_t seed, uint64_t stream);
  uint32_t next32();
  double uniform();  // [0, 1) with 53 random bits

 private:
  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  Philox4x32::Counter buf_{};
  int used_ = 4;
};

enum class ModelMode { li, time };
ModelMode parse_model_mode(const std::string& s);
std::string to_string(ModelMode m);

// W(chi) = -sum_gamma eta_hat(gamma/2pi) Z_{gamma,chi} for every position
// (0 at the principal one). LI mode takes one angle per orbit id; time mode
// takes Z = e^{i gamma X}.
std::vector<cplx> model_w_li(const ZeroFamily& fam, const std::vector<double>& angle);
std::vector<cplx> model_w_time(const ZeroFamily& fam, double X);
size_t orbit_count(const ZeroFamily& fam);

// H_n from W through D(a) = (1/phi) sum conj(chi(a)) W(chi), and the same
// quantity as the tuple sum phi^-n sum prod W(chi_j).
cplx h_orthogonal(const CharacterGroup& g, const std::vector<cplx>& W, int n);
cplx h_direct(const CharacterGroup& g, const std::vector<cplx>& W, int n);

struct SampleBatch {
  uint64_t seed = 0;
  ModelMode mode = ModelMode::li;
  int q = 0, n = 0;
  double time_max = 0;  // time mode draws X uniformly from [0, time_max]
  std::vector<double> values;
  double max_imag = 0;
};

SampleBatch sample_H(const ZeroFamily& fam, int n, ModelMode mode, uint64_t seed,
                     uint64_t count, double time_max = 1e4, double budget = 1e10,
                     Exec exec = Exec::parallel);

// phi^-2 sum_chi sum_gamma eta_hat^2 with the zero tail bound.
SumWithBound model_mean_exact(const ZeroFamily& fam, const Weight& eta);

struct MomentEstimate {
  int s = 0;
  double value = 0;
  double std_error = 0;  // bootstrap
  double prediction = 0;
};
struct MomentsRecord {
  uint64_t count = 0;
  double mean = 0, mean_se = 0;
  double V_n = 0;
  std::vector<MomentEstimate> moments;
};
// Centered sample moments for each s with bootstrap errors; `prediction(s)`
// fills the main-term column when given. V_n is left for the caller.
MomentsRecord estimate_moments(const std::vector<double>& values, const std::vector<int>& s_list,
                               int bootstrap = 200, uint64_t seed = 0,
                               const std::function<double(int)>& prediction = {});

struct TimeSeries {
  std::vector<double> t, H;
  double max_imag = 0;
  double average = 0;  // trapezoid average over the grid
  SumWithBound exact_mean;
};
TimeSeries time_average_mode(const ZeroFamily& fam, const Weight& eta, int n,
                             const std::vector<double>& grid, Exec exec = Exec::parallel);

}  // namespace momlab
