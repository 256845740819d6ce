// Wall-time comparison of the serial reference kernels against their OpenMP
// counterparts. The outputs must match bit for bit (tested in
// test_parallel_kernels); this binary only reports the speedup.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pcrpo/montecarlo.hpp"
#include "pcrpo/sweeps.hpp"

using namespace pcrpo;

namespace {

template <typename F>
double time_ms(F&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-24s serial %9.1f ms   parallel %9.1f ms   speedup %.2fx\n",
              name, serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; parallel kernels run serially\n");
#endif

  {
    const long n = 400000;
    double serial_ms = time_ms([&] { gradient_sweep_serial(8, n, 7); });
    double parallel_ms = time_ms([&] { gradient_sweep_parallel(8, n, 7); });
    report("gradient sweep (dim 8)", serial_ms, parallel_ms);
  }
  {
    const long n = 2000;
    double serial_ms = time_ms([&] { theorem_sweep_serial(n, 7); });
    double parallel_ms = time_ms([&] { theorem_sweep_parallel(n, 7); });
    report("theorem sweep", serial_ms, parallel_ms);
  }
  {
    const CmdpSpec spec = build_gridworld(
        5, 5, {{1, 1}, {2, 3}, {3, 1}}, {4, 4}, 0.1, 0.9, 1.0);
    const SoftmaxPolicy uniform(spec.n_states, spec.n_actions);
    const long n = 200000;
    double serial_ms = time_ms(
        [&] { mc_value_serial(spec, uniform, Channel::reward(), n, -1, 7); });
    double parallel_ms =
        time_ms([&] { mc_value(spec, uniform, Channel::reward(), n, -1, 7); });
    report("monte carlo value", serial_ms, parallel_ms);
  }
  return 0;
}
