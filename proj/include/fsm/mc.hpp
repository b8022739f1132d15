#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace fsm {

// Monte Carlo result: complex mean, scalar standard error of the mean,
// sample count.
struct McEstimate {
  std::complex<double> mean{0.0, 0.0};
  double stderr_{0.0};
  std::uint64_t n{0};
};

namespace mc {

// Neumaier compensated sum; keeps large-n reductions order-stable in the
// last bits.
struct Kahan {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

// Reduce per-sample complex values (already stored in sample order) into an
// estimate.  The reduction order is fixed by the slot order, so the result
// is independent of how the slots were filled.
McEstimate reduce(const std::vector<std::complex<double>>& samples);

// Run fn(i) for i in [0, n) on `workers` threads.  Each fn writes only to
// its own output slot; scheduling order carries no observable effect.
void parallel_for(std::uint64_t n, int workers, const std::function<void(std::uint64_t)>& fn);

}  // namespace mc
}  // namespace fsm
