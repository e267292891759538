// Timing comparison of the serial and OpenMP paths of the phase-space
// audits.  The parallel path must agree with the serial reference
// bit-for-bit (same samples, same margins); this is asserted, not just
// timed.

#include <chrono>
#include <cstdio>

#include "kaqnf/phase_space.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace kaqnf;

namespace {

template <typename F>
double time_once(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n_ss = argc > 1 ? std::stoul(argv[1]) : 200000;
  const std::size_t n_nt = argc > 2 ? std::stoul(argv[2]) : 200;
  BlackHoleParams p{0.3, 1.0, 1.0};

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (no OpenMP)\n");
#endif

  SourceSinkReport ss_par, ss_ser;
  const double t_ss_par = time_once(
      [&] { ss_par = source_sink_audit(p, n_ss, 1e-4, 1, /*parallel=*/true); });
  const double t_ss_ser = time_once([&] {
    ss_ser = source_sink_audit(p, n_ss, 1e-4, 1, /*parallel=*/false);
  });
  if (ss_par.worst_margin != ss_ser.worst_margin ||
      ss_par.fitted_c != ss_ser.fitted_c) {
    std::fprintf(stderr, "source/sink: serial and parallel paths disagree\n");
    return 1;
  }
  std::printf("source_sink_audit  n=%zu  serial %.3f s  parallel %.3f s  "
              "speedup %.2fx\n",
              n_ss, t_ss_ser, t_ss_par, t_ss_ser / t_ss_par);

  NontrappingReport nt_par, nt_ser;
  const double t_nt_par = time_once([&] {
    nt_par = nontrapping_audit(p, n_nt, FlowConfig{}, 1, /*parallel=*/true);
  });
  const double t_nt_ser = time_once([&] {
    nt_ser = nontrapping_audit(p, n_nt, FlowConfig{}, 1, /*parallel=*/false);
  });
  if (nt_par.fraction_classified != nt_ser.fraction_classified) {
    std::fprintf(stderr, "nontrapping: serial and parallel paths disagree\n");
    return 1;
  }
  std::printf("nontrapping_audit  n=%zu  serial %.3f s  parallel %.3f s  "
              "speedup %.2fx\n",
              n_nt, t_nt_ser, t_nt_par, t_nt_ser / t_nt_par);
  return 0;
}
