// Times the OpenMP kernel reductions against the serial reference and
// checks they agree bit for bit while doing so.

#include <chrono>
#include <cstdio>
#include <vector>

#include "driftsync/rkhs.hpp"
#include "driftsync/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using driftsync::KernelModel;
using driftsync::KernelSpec;

KernelModel random_model(int n, int d, std::uint64_t key) {
  driftsync::Rng rng(key);
  KernelModel f{KernelSpec::gaussian(1.0)};
  for (int i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    f.add({std::move(x), {i, 0}}, rng.uniform(-1.0, 1.0));
  }
  return f;
}

template <class F>
double time_ms(F&& body, int reps) {
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) body();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

volatile double sink = 0.0;

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (built without OpenMP)\n");
#endif
  std::printf("%-14s %6s %4s  %10s %10s %8s %6s\n", "op", "n", "d", "serial_ms",
              "openmp_ms", "speedup", "match");

  for (int d : {4, 16}) {
    for (int n : {256, 1024, 4096}) {
      const KernelModel f = random_model(n, d, driftsync::mix_key(7, n, d));
      const KernelModel g = random_model(n, d, driftsync::mix_key(11, n, d));
      const int reps = n >= 4096 ? 3 : 10;

      const double serial_ip = driftsync::serial::inner_product(f, g);
      const double parallel_ip = driftsync::inner_product(f, g);
      const double ts = time_ms([&] { sink = driftsync::serial::inner_product(f, g); }, reps);
      const double tp = time_ms([&] { sink = driftsync::inner_product(f, g); }, reps);
      std::printf("%-14s %6d %4d  %10.3f %10.3f %7.2fx %6s\n", "inner_product",
                  n, d, ts, tp, ts / tp, serial_ip == parallel_ip ? "yes" : "NO");
    }
  }

  // the monitoring-path reduction: spread of m models around their mean
  for (int n : {256, 1024}) {
    driftsync::ModelConfiguration mc;
    for (int i = 0; i < 8; ++i)
      mc.models.push_back(random_model(n, 8, driftsync::mix_key(13, i, n)));
    const double vs = driftsync::serial::divergence(mc);
    const double vp = driftsync::divergence(mc);
    const int reps = n >= 1024 ? 1 : 3;
    const double ts = time_ms([&] { sink = driftsync::serial::divergence(mc); }, reps);
    const double tp = time_ms([&] { sink = driftsync::divergence(mc); }, reps);
    std::printf("%-14s %6d %4d  %10.3f %10.3f %7.2fx %6s\n", "divergence(8)",
                n, 8, ts, tp, ts / tp, vs == vp ? "yes" : "NO");
  }
  return 0;
}
