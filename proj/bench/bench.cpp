// Times the parallel kernels in both execution modes and checks that they
// produce identical results. The serial mode is the reference implementation;
// the OpenMP mode must match it bitwise because every parallel loop writes
// only to slots keyed by the loop index.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "mlc/maps.hpp"
#include "mlc/measures.hpp"
#include "mlc/oracles.hpp"
#include "mlc/parallel.hpp"
#include "mlc/rng.hpp"
#include "mlc/statespace.hpp"
#include "mlc/transforms.hpp"

namespace {

using Clock = std::chrono::steady_clock;

struct ModeGuard {
  mlc::ExecMode saved;
  explicit ModeGuard(mlc::ExecMode m) : saved(mlc::exec_mode()) {
    mlc::exec_mode() = m;
  }
  ~ModeGuard() { mlc::exec_mode() = saved; }
};

// Membership projection of a known non-member, so every restart in the
// budget runs instead of short-circuiting on the first success.
double membership_restarts() {
  mlc::OracleBudget budget;
  budget.max_iterations = 1500;
  budget.restarts = 9;
  budget.seed = 71;
  auto cert = mlc::project_in_Ik(mlc::outer_product(mlc::maximally_coherent(6)),
                                 mlc::CoherenceLevel(3), budget);
  return cert.residual;
}

// One restart chunk of the robustness minimization.
double robustness_oracle() {
  mlc::OracleBudget budget;
  budget.max_iterations = 800;
  budget.restarts = 4;
  budget.seed = 17;
  mlc::PureState target = mlc::sample_pure(4, 2024, 4);
  auto r = mlc::robustness_k_oracle(mlc::outer_product(target),
                                    mlc::CoherenceLevel(2), budget);
  return r.value;
}

// Random-input verification of one conversion map, certificate per trial.
double verification_trials() {
  mlc::OracleBudget budget;
  budget.seed = 5;
  mlc::PureState source = mlc::maximally_coherent(4);
  mlc::PureState target = mlc::sample_pure(4, 99, 4);
  auto report = mlc::deterministic_feasible(source, target,
                                            mlc::CoherenceLevel(2), budget);
  auto verification = mlc::verify_preserves_Ik(*report.map, 32, budget, 321);
  double sum = 0.0;
  for (const auto& t : verification.records) sum += t.overlap + t.residual;
  return sum;
}

// A batch of independent conversion rows, the same shape as the sweep
// subcommand: sample a pair, bound the probability, build and check the map
// when feasible.
double conversion_batch() {
  const int rows = 128;
  std::vector<double> out(rows, 0.0);
  mlc::parallel_for(rows, [&](std::size_t i) {
    mlc::CoherenceLevel level(2);
    mlc::PureState source =
        mlc::sample_pure(4, mlc::derive_seed(31337, 2 * i), 3);
    mlc::PureState target =
        mlc::sample_pure(4, mlc::derive_seed(31337, 2 * i + 1), 3);
    double p = mlc::max_conversion_probability(source, target, level);
    out[i] = p;
    if (p >= 1.0) {
      mlc::OracleBudget budget;
      budget.seed = mlc::derive_seed(31337, 1000 + i);
      auto map = mlc::build_k_preserving(source, target, level, 1.0, budget);
      out[i] += mlc::apply(map.base, mlc::outer_product(source)).trace();
    }
  });
  double sum = 0.0;
  for (double v : out) sum += v;
  return sum;
}

struct Workload {
  const char* name;
  double (*fn)();
};

double run_timed(const Workload& w, mlc::ExecMode mode, int reps,
                 double* checksum) {
  ModeGuard guard(mode);
  double best = 0.0;
  for (int r = 0; r < reps; ++r) {
    auto t0 = Clock::now();
    *checksum = w.fn();
    double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0)
                    .count();
    if (r == 0 || ms < best) best = ms;
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 3;
  if (argc > 1) {
    int v = std::atoi(argv[1]);
    if (v > 0) reps = v;
  }

  const Workload workloads[] = {
      {"membership restarts (d=6, k=3)", membership_restarts},
      {"robustness oracle (d=4, k=2)", robustness_oracle},
      {"map verification, 32 trials", verification_trials},
      {"conversion batch, 128 pairs", conversion_batch},
  };

#ifdef _OPENMP
  std::printf("OpenMP enabled, best of %d runs per mode\n\n", reps);
#else
  std::printf("compiled without OpenMP, both modes run serially\n\n");
#endif
  std::printf("%-34s %12s %12s %9s  %s\n", "workload", "serial ms", "openmp ms",
              "speedup", "results");
  bool all_match = true;
  for (const auto& w : workloads) {
    double serial_sum = 0.0, openmp_sum = 0.0;
    double serial_ms = run_timed(w, mlc::ExecMode::Serial, reps, &serial_sum);
    double openmp_ms = run_timed(w, mlc::ExecMode::OpenMP, reps, &openmp_sum);
    bool match =
        std::memcmp(&serial_sum, &openmp_sum, sizeof(double)) == 0;
    all_match = all_match && match;
    std::printf("%-34s %12.1f %12.1f %8.2fx  %s\n", w.name, serial_ms,
                openmp_ms, serial_ms / openmp_ms,
                match ? "identical" : "DIFFER");
  }
  if (!all_match) {
    std::printf("\nresult mismatch between modes\n");
    return 1;
  }
  return 0;
}
